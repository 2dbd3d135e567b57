use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CoefficientB, TaylorSeries};
use crate::numerics::quad::composite_gauss;
use crate::numerics::Grid1D;
use crate::{GfError, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const S_PANELS: usize = 4;
const S_ORDER: usize = 32;

/// Corrector samples on a `(t, x)` window, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrectorField {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Certified radius of the Taylor series used.
    pub radius: f64,
}

fn check_disk(x: f64, big_b: f64, radius: f64) -> Result<()> {
    let modulus = x.hypot(big_b);
    if modulus > radius {
        return Err(GfError::OutsideCertifiedDisk { modulus, radius });
    }
    Ok(())
}

/// `v(t, x) = scale · i ∫_0^t b(s) K'(x − i(B(t) − B(s))) ds` for `t > 0` and
/// `v = 0` for `t ≤ 0`, with `K'` from the termwise derivative of `series`.
/// Every complex argument must lie in the disk of radius `radius`.
pub fn corrector_v(
    series: &TaylorSeries,
    radius: f64,
    coeff: &CoefficientB,
    t: &[f64],
    x: &[f64],
    scale: f64,
) -> Result<CorrectorField> {
    let rows: Result<Vec<Vec<Complex64>>> = t
        .par_iter()
        .map(|&tv| {
            if tv <= 0.0 {
                return Ok(vec![Complex64::new(0.0, 0.0); x.len()]);
            }
            let bt = coeff.big_b(tv);
            let edges: Vec<f64> = (0..=S_PANELS)
                .map(|j| tv * j as f64 / S_PANELS as f64)
                .collect();
            let (ss, ws) = composite_gauss(&edges, S_ORDER);
            let shifts: Vec<(f64, f64)> = ss
                .iter()
                .zip(&ws)
                .map(|(&s, &w)| (bt - coeff.big_b(s), w * coeff.b(s)))
                .collect();
            x.iter()
                .map(|&xv| {
                    check_disk(xv, bt, radius)?;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(d, w) in &shifts {
                        acc += series.derivative(Complex64::new(xv, -d)) * w;
                    }
                    Ok(acc * I * scale)
                })
                .collect()
        })
        .collect();
    Ok(CorrectorField {
        t: t.to_vec(),
        x: x.to_vec(),
        values: rows?.concat(),
        radius,
    })
}

/// `scale · (K(x) − K(x − iB(t)))` for `t > 0`, the closed form of
/// [`corrector_v`].
pub fn corrector_closed_form(
    series: &TaylorSeries,
    radius: f64,
    coeff: &CoefficientB,
    t: &[f64],
    x: &[f64],
    scale: f64,
) -> Result<CorrectorField> {
    let mut values = Vec::with_capacity(t.len() * x.len());
    for &tv in t {
        let bt = if tv > 0.0 { coeff.big_b(tv) } else { 0.0 };
        for &xv in x {
            if tv <= 0.0 {
                values.push(Complex64::new(0.0, 0.0));
                continue;
            }
            check_disk(xv, bt, radius)?;
            let z = Complex64::new(xv, 0.0);
            values.push((series.eval(z) - series.eval(z - I * bt)) * scale);
        }
    }
    Ok(CorrectorField {
        t: t.to_vec(),
        x: x.to_vec(),
        values,
        radius,
    })
}

/// Window `x` values of a grid with `|x| ≤ reach`.
pub(crate) fn window_indices(grid: &Grid1D, keep: impl Fn(f64) -> bool) -> Vec<usize> {
    (0..grid.points).filter(|&i| keep(grid.coord(i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mizohata::GridKf;

    #[test]
    fn quadrature_matches_closed_form() {
        let g = GridKf {
            xi: vec![0.0, 0.5, 1.0, 1.5],
            weights: vec![
                Complex64::new(0.2, 0.0),
                Complex64::new(0.1, 0.05),
                Complex64::new(-0.03, 0.02),
                Complex64::new(0.01, 0.0),
            ],
        };
        let series = g.taylor(40);
        let r = series.certified_radius(1e-12, 5.0);
        for coeff in [CoefficientB::linear(), CoefficientB::cubic()] {
            let t = [-0.3, 0.0, 0.2, 0.8];
            let x = [-0.5, 0.0, 0.7];
            let a = corrector_v(&series, r, &coeff, &t, &x, 1.0).unwrap();
            let b = corrector_closed_form(&series, r, &coeff, &t, &x, 1.0).unwrap();
            for (p, q) in a.values.iter().zip(&b.values) {
                assert!((p - q).norm() < 1e-12, "{p} vs {q}");
            }
        }
    }

    #[test]
    fn outside_disk_is_rejected() {
        let g = GridKf {
            xi: vec![0.0, 1.0],
            weights: vec![Complex64::new(1.0, 0.0); 2],
        };
        let s = g.taylor(10);
        let e = corrector_v(&s, 0.5, &CoefficientB::linear(), &[0.9], &[0.45], 1.0);
        assert!(matches!(e, Err(GfError::OutsideCertifiedDisk { .. })));
    }
}

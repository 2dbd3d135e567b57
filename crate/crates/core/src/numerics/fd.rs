//! Finite-difference stencils from Fornberg's recursion.

use num_complex::Complex64;

use crate::{GfError, Result};

/// Weights `w[d][j]` for the `d`-th derivative at `z` from values at `nodes`,
/// for every `d ≤ max_deriv`.
pub fn fd_weights(z: f64, nodes: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let m = max_deriv;
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// A stencil on integer offsets, scaled for unit spacing.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub offsets: Vec<i64>,
    pub weights: Vec<f64>,
}

impl Stencil {
    /// Stencil for `deriv` with `width` points starting at offset `start`.
    pub fn new(deriv: usize, start: i64, width: usize) -> Self {
        let offsets: Vec<i64> = (0..width as i64).map(|k| start + k).collect();
        let nodes: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
        let w = fd_weights(0.0, &nodes, deriv);
        Self {
            offsets,
            weights: w[deriv].clone(),
        }
    }

    /// Centered stencil reaching formal accuracy `accuracy` (even).
    pub fn centered(deriv: usize, accuracy: usize) -> Self {
        let width = centered_width(deriv, accuracy);
        Self::new(deriv, -((width / 2) as i64), width)
    }
}

/// Number of points of a centered stencil of the given accuracy.
pub fn centered_width(deriv: usize, accuracy: usize) -> usize {
    2 * ((deriv + 1) / 2) - 1 + accuracy
}

/// `d`-th derivative of uniform samples with spacing `dx`, centered stencils of
/// formal order `accuracy` in the interior and shifted one-sided stencils of
/// the same width at non-periodic boundaries.
pub fn derivative_1d(
    samples: &[Complex64],
    dx: f64,
    deriv: usize,
    accuracy: usize,
    periodic: bool,
) -> Result<Vec<Complex64>> {
    let n = samples.len();
    if deriv == 0 {
        return Ok(samples.to_vec());
    }
    let width = centered_width(deriv, accuracy);
    // one-sided stencils need one extra point to keep the formal order
    let edge_width = width + 1;
    if n < edge_width {
        return Err(GfError::Unresolved {
            what: format!("derivative of order {deriv}"),
            detail: format!("{n} samples, stencil needs {edge_width}"),
        });
    }
    let scale = dx.powi(deriv as i32).recip();
    let center = Stencil::centered(deriv, accuracy);
    let half = (width / 2) as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut edge_cache: Vec<Option<Stencil>> = vec![None; 2 * half as usize + 2];
    for (i, o) in out.iter_mut().enumerate() {
        let ii = i as i64;
        let interior = ii - half >= 0 && ii + half < n as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        if interior || periodic {
            for (&off, &w) in center.offsets.iter().zip(&center.weights) {
                let j = (ii + off).rem_euclid(n as i64) as usize;
                acc += samples[j] * w;
            }
        } else {
            let start = if ii - half < 0 {
                -ii
            } else {
                (n as i64 - 1 - ii) - (edge_width as i64 - 1)
            };
            let key = if ii - half < 0 {
                i
            } else {
                (half as usize + 1) + (n - 1 - i)
            };
            let st = edge_cache[key].get_or_insert_with(|| Stencil::new(deriv, start, edge_width));
            for (&off, &w) in st.offsets.iter().zip(&st.weights) {
                acc += samples[(ii + off) as usize] * w;
            }
        }
        *o = acc * scale;
    }
    Ok(out)
}

/// Derivative of a row-major `(t, x)` field along one axis (0 = t, 1 = x).
pub fn derivative_2d(
    field: &[Complex64],
    rows: usize,
    cols: usize,
    axis: usize,
    spacing: f64,
    deriv: usize,
    accuracy: usize,
    periodic: bool,
) -> Result<Vec<Complex64>> {
    assert_eq!(field.len(), rows * cols);
    if deriv == 0 {
        return Ok(field.to_vec());
    }
    let mut out = vec![Complex64::new(0.0, 0.0); field.len()];
    if axis == 1 {
        for r in 0..rows {
            let d = derivative_1d(
                &field[r * cols..(r + 1) * cols],
                spacing,
                deriv,
                accuracy,
                periodic,
            )?;
            out[r * cols..(r + 1) * cols].copy_from_slice(&d);
        }
    } else {
        let mut col = vec![Complex64::new(0.0, 0.0); rows];
        for c in 0..cols {
            for r in 0..rows {
                col[r] = field[r * cols + c];
            }
            let d = derivative_1d(&col, spacing, deriv, accuracy, periodic)?;
            for r in 0..rows {
                out[r * cols + c] = d[r];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_second_order_weights() {
        let s = Stencil::centered(1, 2);
        assert_eq!(s.offsets, vec![-1, 0, 1]);
        assert!((s.weights[0] + 0.5).abs() < 1e-15 && (s.weights[2] - 0.5).abs() < 1e-15);
        let s = Stencil::centered(2, 2);
        assert!((s.weights[1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn fourth_order_convergence() {
        let errs: Vec<f64> = [64usize, 128]
            .iter()
            .map(|&n| {
                let dx = 2.0 / (n - 1) as f64;
                let s: Vec<Complex64> = (0..n)
                    .map(|i| Complex64::new((-1.0 + dx * i as f64).sin(), 0.0))
                    .collect();
                let d = derivative_1d(&s, dx, 1, 4, false).unwrap();
                (0..n)
                    .map(|i| (d[i].re - (-1.0 + dx * i as f64).cos()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!(ratio > 14.0, "ratio {ratio}");
    }

    #[test]
    fn periodic_derivative_of_sine() {
        let n = 256;
        let dx = 2.0 * std::f64::consts::PI / n as f64;
        let s: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((dx * i as f64).sin(), 0.0))
            .collect();
        let d = derivative_1d(&s, dx, 1, 6, true).unwrap();
        for i in 0..n {
            assert!((d[i].re - (dx * i as f64).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn higher_derivatives_exact_on_polynomials() {
        let n = 30;
        let dx = 0.1;
        let s: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = dx * i as f64;
                Complex64::new(x.powi(4), 0.0)
            })
            .collect();
        let d = derivative_1d(&s, dx, 3, 4, false).unwrap();
        for i in 0..n {
            assert!(
                (d[i].re - 24.0 * dx * i as f64).abs() < 1e-7,
                "i={i} {}",
                d[i].re
            );
        }
    }
}

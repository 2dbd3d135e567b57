//! Continuous Fourier transforms approximated on uniform grids.
//!
//! With nodes `x_j = x_0 + jΔx`, `j < N`, and frequencies
//! `ξ_k = 2π k / (NΔx)` in FFT order (`k` signed, `-N/2 ≤ k < N/2`):
//!
//! ```text
//! f̂(ξ_k)  ≈ Δx e^{-i x_0 ξ_k} Σ_j f(x_j) e^{-2πi jk/N}
//! f(x_j)  ≈ (1/(NΔx)) Σ_k f̂(ξ_k) e^{i x_0 ξ_k} e^{2πi jk/N}
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::grid::{Grid1D, Grid2D};
use crate::{GfError, Result};

/// Forward/inverse continuous-FT plan matched to one spatial grid.
#[derive(Clone)]
pub struct SpectralPlan {
    grid: Grid1D,
    xi: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralPlan")
            .field("grid", &self.grid)
            .field("dxi", &self.dxi())
            .finish()
    }
}

impl SpectralPlan {
    pub fn new(grid: &Grid1D) -> Self {
        let n = grid.points;
        let dxi = 2.0 * PI / (n as f64 * grid.spacing());
        let xi = (0..n)
            .map(|k| {
                let ks = if k < n.div_ceil(2) {
                    k as f64
                } else {
                    k as f64 - n as f64
                };
                ks * dxi
            })
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            grid: grid.clone(),
            xi,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Frequencies in FFT storage order.
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.grid.period()
    }

    /// Largest resolved |ξ|.
    pub fn nyquist(&self) -> f64 {
        PI / self.grid.spacing()
    }

    pub fn forward(&self, samples: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(
            samples.len(),
            self.len(),
            "sample length does not match plan"
        );
        let mut buf = samples.to_vec();
        self.forward.process(&mut buf);
        let dx = self.grid.spacing();
        let x0 = self.grid.lower;
        for (v, &xi) in buf.iter_mut().zip(&self.xi) {
            *v *= Complex64::from_polar(dx, -x0 * xi);
        }
        buf
    }

    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(
            spectrum.len(),
            self.len(),
            "spectrum length does not match plan"
        );
        let x0 = self.grid.lower;
        let mut buf: Vec<Complex64> = spectrum
            .iter()
            .zip(&self.xi)
            .map(|(v, &xi)| v * Complex64::from_polar(1.0, x0 * xi))
            .collect();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.grid.period();
        for v in &mut buf {
            *v *= scale;
        }
        buf
    }

    pub fn forward_real(&self, samples: &[f64]) -> Vec<Complex64> {
        let c: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&c)
    }

    /// Applies the Fourier multiplier `m(ξ)`: `F^{-1}[m(ξ) F[u]]`.
    pub fn apply_multiplier(
        &self,
        samples: &[Complex64],
        multiplier: impl Fn(f64) -> Complex64,
    ) -> Vec<Complex64> {
        let mut spec = self.forward(samples);
        for (v, &xi) in spec.iter_mut().zip(&self.xi) {
            *v *= multiplier(xi);
        }
        self.inverse(&spec)
    }
}

/// A 2D field transformed along `x`, stored row-major over `(t, ξ)` with the
/// `ξ` axis in FFT order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransformedField {
    pub t: Grid1D,
    pub xi: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl TransformedField {
    pub fn at(&self, it: usize, k: usize) -> Complex64 {
        self.values[it * self.xi.len() + k]
    }
}

/// Relative L¹ mass of `row` carried by the outer `band` fraction of cells.
pub(crate) fn boundary_tail_mass(row: &[Complex64], band: f64) -> f64 {
    let n = row.len();
    let b = ((band * n as f64).ceil() as usize).clamp(1, n / 2);
    let total: f64 = row.iter().map(|v| v.norm()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let tail: f64 = row[..b].iter().chain(&row[n - b..]).map(|v| v.norm()).sum();
    tail / total
}

/// Transforms a `(t, x)` field along `x`, after checking that every row is
/// negligible near the `x` boundaries (relative tail mass `≤ tail_tol` in the
/// outer 5% of cells).
pub fn forward_x_transform(
    grid: &Grid2D,
    field: &[Complex64],
    tail_tol: f64,
) -> Result<TransformedField> {
    if field.len() != grid.len() {
        return Err(GfError::invalid("field length does not match the grid"));
    }
    let nx = grid.x.points;
    for (it, row) in field.chunks(nx).enumerate() {
        let tail = boundary_tail_mass(row, 0.05);
        if tail > tail_tol {
            return Err(GfError::Support(format!(
                "row t = {:.4} has boundary tail mass {tail:.3e} > {tail_tol:.1e}",
                grid.t.coord(it)
            )));
        }
    }
    let plan = SpectralPlan::new(&grid.x);
    let values: Vec<Complex64> = field
        .par_chunks(nx)
        .flat_map_iter(|row| plan.forward(row))
        .collect();
    Ok(TransformedField {
        t: grid.t.clone(),
        xi: plan.xi().to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = Grid1D::new(-20.0, 20.0, 512).unwrap();
        let plan = SpectralPlan::new(&g);
        let f: Vec<f64> = g.coords().iter().map(|x| (-x * x / 2.0).exp()).collect();
        let fh = plan.forward_real(&f);
        for (v, &xi) in fh.iter().zip(plan.xi()) {
            let exact = (2.0 * PI).sqrt() * (-xi * xi / 2.0).exp();
            assert!((v - exact).norm() < 1e-8, "xi = {xi}: {v} vs {exact}");
        }
    }

    #[test]
    fn shift_is_a_phase() {
        let g = Grid1D::new(-20.0, 20.0, 400).unwrap();
        let plan = SpectralPlan::new(&g);
        let a = 1.3;
        let f: Vec<f64> = g.coords().iter().map(|x| (-x * x / 2.0).exp()).collect();
        let fs: Vec<f64> = g
            .coords()
            .iter()
            .map(|x| (-(x - a) * (x - a) / 2.0).exp())
            .collect();
        let fh = plan.forward_real(&f);
        let fsh = plan.forward_real(&fs);
        for ((u, v), &xi) in fh.iter().zip(&fsh).zip(plan.xi()) {
            let expect = u * Complex64::from_polar(1.0, -a * xi);
            assert!((v - expect).norm() < 1e-8);
        }
    }

    #[test]
    fn round_trip_on_white_noise() {
        let g = Grid1D::new(-3.0, 5.0, 301).unwrap();
        let plan = SpectralPlan::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f: Vec<Complex64> = (0..g.points)
            .map(|_| Complex64::new(rng.gen(), rng.gen()))
            .collect();
        let back = plan.inverse(&plan.forward(&f));
        let err = f
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "round-trip error {err}");
    }

    #[test]
    fn parseval_on_smooth_field() {
        let g = Grid1D::new(-10.0, 10.0, 256).unwrap();
        let plan = SpectralPlan::new(&g);
        let f: Vec<Complex64> = g
            .coords()
            .iter()
            .map(|&x| Complex64::new((-x * x).exp() * (3.0 * x).cos(), x * (-x * x / 3.0).exp()))
            .collect();
        let fh = plan.forward(&f);
        let lhs: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.spacing();
        let rhs: f64 = fh.iter().map(|v| v.norm_sqr()).sum::<f64>() * plan.dxi() / (2.0 * PI);
        assert!((lhs - rhs).abs() < 1e-8 * lhs.max(1.0));
    }

    #[test]
    fn zero_field_and_support_check() {
        let grid = Grid2D::new(
            Grid1D::new(-1.0, 1.0, 5).unwrap(),
            Grid1D::new(-4.0, 4.0, 64).unwrap(),
        );
        let zero = vec![Complex64::new(0.0, 0.0); grid.len()];
        let t = forward_x_transform(&grid, &zero, 1e-10).unwrap();
        assert!(t.values.iter().all(|v| v.norm() == 0.0));
        let ones = vec![Complex64::new(1.0, 0.0); grid.len()];
        assert!(matches!(
            forward_x_transform(&grid, &ones, 1e-10),
            Err(GfError::Support(_))
        ));
    }
}

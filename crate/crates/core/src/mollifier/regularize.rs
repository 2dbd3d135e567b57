use num_complex::Complex64;
use rayon::prelude::*;

use super::{HSchedule, Mollifier};
use crate::gf::Net;
use crate::numerics::fd::derivative_1d;
use crate::numerics::{Grid1D, GridSpec, SpectralPlan};
use crate::{GfError, Result};

/// Spectral convolution on a fixed grid. Non-periodic data is zero-padded to
/// twice its length so the circular product does not wrap around.
#[derive(Clone, Debug)]
pub struct Convolver {
    plan: SpectralPlan,
    points: usize,
}

impl Convolver {
    pub fn new(grid: &Grid1D) -> Result<Self> {
        let n = grid.points;
        let padded = if grid.periodic {
            grid.clone()
        } else {
            let dx = grid.spacing();
            Grid1D::new(grid.lower, grid.lower + dx * (2 * n - 1) as f64, 2 * n)?
        };
        Ok(Self {
            plan: SpectralPlan::new(&padded),
            points: n,
        })
    }

    /// Frequencies of the (padded) transform, FFT order.
    pub fn xi(&self) -> &[f64] {
        self.plan.xi()
    }

    /// `F^{-1}[m · F[row]]` restricted to the original nodes, with `m` given on
    /// [`Convolver::xi`].
    pub fn apply(&self, row: &[Complex64], multiplier: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.plan.len()];
        buf[..self.points].copy_from_slice(row);
        let mut spec = self.plan.forward(&buf);
        for (v, m) in spec.iter_mut().zip(multiplier) {
            *v *= m;
        }
        let mut out = self.plan.inverse(&spec);
        out.truncate(self.points);
        out
    }
}

/// Convolution of `row` with the kernel whose spectrum is `kernel_hat`.
pub fn convolve_spectral(
    row: &[Complex64],
    grid: &Grid1D,
    kernel_hat: impl Fn(f64) -> f64,
) -> Result<Vec<Complex64>> {
    let conv = Convolver::new(grid)?;
    let m: Vec<Complex64> = conv
        .xi()
        .iter()
        .map(|&x| Complex64::new(kernel_hat(x), 0.0))
        .collect();
    Ok(conv.apply(row, &m))
}

/// Multiplier `ρ̂(hξ)^α` of the scaled iterated kernel `ρ^{[α]}_h`.
pub fn kernel_multiplier(rho: &Mollifier, alpha: usize, h: f64, xi: &[f64]) -> Vec<Complex64> {
    xi.iter()
        .map(|&x| Complex64::new(rho.hat(h * x).powi(alpha as i32), 0.0))
        .collect()
}

/// `∂^α row ∗ ρ^{[α]}_h` on a single row: finite-difference derivative of
/// order 8, then spectral convolution.
pub fn regularized_derivative_samples(
    row: &[Complex64],
    grid: &Grid1D,
    alpha: usize,
    h: f64,
    rho: &Mollifier,
) -> Result<Vec<Complex64>> {
    if alpha == 0 {
        return Ok(row.to_vec());
    }
    rho.check_resolved(h, grid.spacing())?;
    let d = derivative_1d(row, grid.spacing(), alpha, 8, grid.periodic)?;
    let conv = Convolver::new(grid)?;
    let m = kernel_multiplier(rho, alpha, h, conv.xi());
    Ok(conv.apply(&d, &m))
}

/// Regularized derivative `(∂̃^α)_h u` of a net, along `x` (the only axis of a
/// 1D net; the second axis of a `(t, x)` net, at fixed `t`).
pub fn regularized_derivative(
    net: &Net,
    alpha: usize,
    h: HSchedule,
    rho: &Mollifier,
) -> Result<Net> {
    if alpha == 0 {
        let mut out = net.clone();
        out.label = format!("reg_d0[{}]", net.label);
        return Ok(out);
    }
    h.validate(&net.ladder.values)?;
    let xgrid = match &net.grid {
        GridSpec::One(g) => g.clone(),
        GridSpec::Two(g) => g.x.clone(),
    };
    let nx = xgrid.points;
    for &eps in &net.ladder.values {
        rho.check_resolved(h.eval(eps), xgrid.spacing())?;
    }
    let conv = Convolver::new(&xgrid)?;
    let samples: Result<Vec<Vec<Complex64>>> = net
        .ladder
        .values
        .par_iter()
        .zip(&net.samples)
        .map(|(&eps, field)| {
            let m = kernel_multiplier(rho, alpha, h.eval(eps), conv.xi());
            let mut out = Vec::with_capacity(field.len());
            for row in field.chunks(nx) {
                let d = derivative_1d(row, xgrid.spacing(), alpha, 8, xgrid.periodic)?;
                out.extend(conv.apply(&d, &m));
            }
            if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(GfError::NonFinite("regularized derivative".into()));
            }
            Ok(out)
        })
        .collect();
    let mut out = Net::new(
        format!(
            "reg_d{alpha}[{}; h={}, rho={}]",
            net.label,
            h.tag(),
            rho.kind
        ),
        net.ladder.clone(),
        net.grid.clone(),
        samples?,
    )?;
    out.embedding = net.embedding.clone();
    Ok(out)
}

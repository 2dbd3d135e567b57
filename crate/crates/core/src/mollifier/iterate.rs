use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Mollifier, MollifierKind};
use crate::numerics::fourier::boundary_tail_mass;
use crate::numerics::{derivative_1d, trapezoid, Grid1D, SpectralPlan};
use crate::{GfError, Result};

/// Relative energy allowed in the outer band of a kernel grid.
pub const ALIASING_LIMIT: f64 = 1e-10;

/// `ρ^{[k]}`, the convolution product of `k` copies of `ρ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IteratedKernel {
    pub kind: MollifierKind,
    pub parameter: f64,
    pub order: usize,
    pub grid: Grid1D,
    pub samples: Vec<f64>,
    /// Frequencies in FFT order and the profile `ρ̂(ξ)^k` on them.
    pub xi: Vec<f64>,
    pub hat: Vec<f64>,
    pub mass: f64,
    /// `max |F[samples] − ρ̂^k|` over the frequency grid.
    pub spectral_error: f64,
}

/// Grid wide enough for `ρ^{[k]}` padded to twice its support, fine enough
/// for derivatives: `cells_per_unit` nodes per kernel length scale.
fn kernel_grid(rho: &Mollifier, k: usize, cells_per_unit: usize) -> Result<Grid1D> {
    match rho.kind {
        MollifierKind::Bump => {
            let r = rho.parameter;
            let half = 2.0 * k as f64 * r;
            let points = 4 * k * cells_per_unit + 1;
            Grid1D::symmetric(half, points)
        }
        MollifierKind::MomentFree => {
            let c = rho.parameter;
            let half = 256.0 / c;
            let dx = 16.0 / (cells_per_unit as f64 * c);
            let points = ((2.0 * half / dx).round() as usize + 1).max(1025);
            Grid1D::symmetric(half, points)
        }
    }
}

/// Spectrum of `ρ` on the frequencies of `plan`.
fn base_spectrum(rho: &Mollifier, plan: &SpectralPlan) -> Vec<f64> {
    match rho.kind {
        MollifierKind::MomentFree => plan.xi().iter().map(|&x| rho.hat(x)).collect(),
        MollifierKind::Bump => {
            let samples: Vec<f64> = plan.grid().coords().iter().map(|&x| rho.eval(x)).collect();
            plan.forward_real(&samples).iter().map(|v| v.re).collect()
        }
    }
}

/// Samples of `∂^deriv ρ^{[power]}` on `grid`, computed from the spectral
/// product `(iξ)^deriv ρ̂(ξ)^power`. Fails on aliasing.
pub fn kernel_samples(
    rho: &Mollifier,
    power: usize,
    deriv: usize,
    grid: &Grid1D,
) -> Result<Vec<f64>> {
    let plan = SpectralPlan::new(grid);
    let base = base_spectrum(rho, &plan);
    spectral_samples(&plan, &base, power, deriv)
}

fn spectral_samples(
    plan: &SpectralPlan,
    base: &[f64],
    power: usize,
    deriv: usize,
) -> Result<Vec<f64>> {
    let spec: Vec<Complex64> = plan
        .xi()
        .iter()
        .zip(base)
        .map(|(&xi, &b)| Complex64::new(0.0, xi).powu(deriv as u32) * b.powi(power as i32))
        .collect();
    let vals = plan.inverse(&spec);
    let energy: Vec<Complex64> = vals
        .iter()
        .map(|v| Complex64::new(v.norm_sqr(), 0.0))
        .collect();
    let tail = boundary_tail_mass(&energy, 0.05);
    if tail > ALIASING_LIMIT {
        return Err(GfError::Aliasing {
            energy: tail,
            limit: ALIASING_LIMIT,
        });
    }
    Ok(vals.iter().map(|v| v.re).collect())
}

pub fn iterate_convolution(rho: &Mollifier, k: usize) -> Result<IteratedKernel> {
    if k == 0 {
        return Err(GfError::invalid("iteration order must be at least 1"));
    }
    let grid = kernel_grid(rho, k, 512)?;
    let plan = SpectralPlan::new(&grid);
    let base = base_spectrum(rho, &plan);
    let samples = if k == 1 && rho.kind == MollifierKind::Bump {
        grid.coords().iter().map(|&x| rho.eval(x)).collect()
    } else {
        spectral_samples(&plan, &base, k, 0)?
    };
    let hat: Vec<f64> = base.iter().map(|b| b.powi(k as i32)).collect();
    let check = plan.forward_real(&samples);
    let spectral_error = check
        .iter()
        .zip(&hat)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let mass = trapezoid(&samples, grid.spacing());
    Ok(IteratedKernel {
        kind: rho.kind,
        parameter: rho.parameter,
        order: k,
        grid,
        samples,
        xi: plan.xi().to_vec(),
        hat,
        mass,
        spectral_error,
    })
}

/// `c_α = ‖∂^α ρ^{[α]}‖_{L¹}` by 8th-order finite differences and the
/// trapezoid rule on two grids, combined by Richardson extrapolation (the
/// kinks of `|∂^α ρ^{[α]}|` make the rule second order).
pub fn norm_c_alpha(rho: &Mollifier, alpha: usize) -> Result<f64> {
    if alpha == 0 {
        return Err(GfError::invalid(
            "c_alpha is defined for alpha >= 1 (c_0 = 1 by convention)",
        ));
    }
    let l1 = |cells: usize| -> Result<f64> {
        let grid = kernel_grid(rho, alpha, cells)?;
        let s = kernel_samples(rho, alpha, 0, &grid)?;
        let c: Vec<Complex64> = s.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let d = derivative_1d(&c, grid.spacing(), alpha, 8, false)?;
        let abs: Vec<f64> = d.iter().map(|v| v.norm()).collect();
        Ok(trapezoid(&abs, grid.spacing()))
    };
    let (fine_cells, coarse_cells) = match rho.kind {
        MollifierKind::Bump => (1024, 512),
        MollifierKind::MomentFree => (640, 320),
    };
    let fine = l1(fine_cells)?;
    let coarse = l1(coarse_cells)?;
    let value = fine + (fine - coarse) / 3.0;
    let rel = (fine - coarse).abs() / 3.0 / value.abs().max(f64::MIN_POSITIVE);
    if !value.is_finite() || rel > 1e-4 {
        return Err(GfError::Unresolved {
            what: format!("c_{alpha} of the {} kernel", rho.kind),
            detail: format!("estimated relative error {rel:.2e}"),
        });
    }
    Ok(value)
}

/// `c_α` values keyed by kernel kind and order.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CAlphaTable {
    pub entries: Vec<CAlphaEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CAlphaEntry {
    pub kind: MollifierKind,
    pub parameter: f64,
    pub alpha: usize,
    pub c_alpha: f64,
}

impl CAlphaTable {
    pub fn compute(kernels: &[&Mollifier], alpha_max: usize) -> Result<Self> {
        let mut entries = Vec::new();
        for rho in kernels {
            for alpha in 1..=alpha_max {
                entries.push(CAlphaEntry {
                    kind: rho.kind,
                    parameter: rho.parameter,
                    alpha,
                    c_alpha: norm_c_alpha(rho, alpha)?,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, kind: MollifierKind, alpha: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.kind == kind && e.alpha == alpha)
            .map(|e| e.c_alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::{build_bump, build_moment_free};

    #[test]
    fn first_iterate_is_the_kernel() {
        let m = build_bump(1.0).unwrap();
        let k = iterate_convolution(&m, 1).unwrap();
        for (x, v) in k.grid.coords().iter().zip(&k.samples) {
            assert_eq!(*v, m.eval(*x));
        }
        assert!((k.mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn second_iterate_matches_direct_convolution() {
        let m = build_bump(1.0).unwrap();
        let k2 = iterate_convolution(&m, 2).unwrap();
        assert!((k2.mass - 1.0).abs() < 1e-10);
        assert!(k2.spectral_error < 1e-8);
        // direct physical convolution at a few points
        let g = Grid1D::symmetric(1.0, 4001).unwrap();
        let base: Vec<f64> = g.coords().iter().map(|&y| m.eval(y)).collect();
        for x in [0.0, 0.375, 1.25] {
            let prod: Vec<f64> = g
                .coords()
                .iter()
                .zip(&base)
                .map(|(&y, b)| b * m.eval(x - y))
                .collect();
            let direct = trapezoid(&prod, g.spacing());
            let i = k2.grid.nearest(x);
            assert!((k2.grid.coord(i) - x).abs() < 1e-12);
            assert!(
                (k2.samples[i] - direct).abs() < 1e-8,
                "x = {x}: {} vs {direct}",
                k2.samples[i]
            );
        }
    }

    #[test]
    fn moment_free_iterate_keeps_unit_mass() {
        let m = build_moment_free(1.0).unwrap();
        let k3 = iterate_convolution(&m, 3).unwrap();
        assert!((k3.mass - 1.0).abs() < 1e-8);
        assert!(k3.spectral_error < 1e-8);
    }

    #[test]
    fn c1_of_bump_is_twice_the_peak() {
        let m = build_bump(1.0).unwrap();
        let c1 = norm_c_alpha(&m, 1).unwrap();
        assert!((c1 - 2.0 * m.eval(0.0)).abs() < 1e-6, "{c1}");
        let half = m.rescaled(0.5).unwrap();
        let c1h = norm_c_alpha(&half, 1).unwrap();
        assert!((c1h - 2.0 * c1).abs() < 1e-5);
    }

    #[test]
    fn c_alpha_is_positive() {
        let m = build_moment_free(1.0).unwrap();
        for a in 1..=2 {
            assert!(norm_c_alpha(&m, a).unwrap() > 0.0);
        }
        let b = build_bump(1.0).unwrap();
        assert!(norm_c_alpha(&b, 3).unwrap() > 0.0);
    }
}

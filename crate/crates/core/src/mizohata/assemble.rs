use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::corrector::window_indices;
use super::{
    compute_kf, corrector_v, solve_hat, validate_coefficient, BranchSolution, CoefficientB,
    CoefficientRecord, GridKf, KfOptions, KfProfile, Source, TaylorSeries, KF_SCALE,
};
use crate::mollifier::fmt17;
use crate::numerics::fd::derivative_2d;
use crate::numerics::quad::trapezoid_2d;
use crate::numerics::{AnalyticityVerdict, Grid1D, Grid2D, SpectralPlan};
use crate::{GfError, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssemblyOptions {
    /// Truncation order of the Taylor series behind the corrector.
    pub taylor_order: usize,
    /// Allowed truncation error of `K'` inside the certified disk.
    pub certify_tol: f64,
    /// Fraction of the analyticity radius estimate the disk may use.
    pub radius_safety: f64,
    pub residual_tol: f64,
    pub pairing_tol: f64,
    /// Rows within this many cells of `t = 0` are left out of the residual.
    pub band_cells: usize,
    pub kf: KfOptions,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            taylor_order: 48,
            certify_tol: 1e-10,
            radius_safety: 0.9,
            residual_tol: 1e-3,
            pairing_tol: 1e-4,
            band_cells: 2,
            kf: KfOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub max_abs: f64,
    pub at: (f64, f64),
    pub tol: f64,
    pub band_cells: usize,
    pub passed: bool,
}

/// `⟨M w − f, φ⟩` for a bump `φ` straddling `t = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairingCheck {
    pub center: (f64, f64),
    pub radius: f64,
    pub value: Complex64,
    pub tol: f64,
    pub passed: bool,
}

/// `w = u + H(t)·Kf_grid/(2π) − v` on the validity window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionalSolution {
    /// Window sub-grid (non-periodic in `x`).
    pub grid: Grid2D,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub kf_grid: Vec<Complex64>,
    pub w: Vec<Complex64>,
    /// Certified radius: `√(x² + B(t)²)` stays below it on the window.
    pub radius: f64,
    pub taylor: TaylorSeries,
    pub kf_scale: f64,
    pub residual: ResidualRecord,
    pub pairings: Vec<PairingCheck>,
    /// Index ranges of the window in the full solver grid.
    pub t_range: (usize, usize),
    pub x_range: (usize, usize),
}

impl DistributionalSolution {
    pub fn passed(&self) -> bool {
        self.residual.passed && self.pairings.iter().all(|p| p.passed)
    }

    pub fn max_pairing(&self) -> f64 {
        self.pairings
            .iter()
            .map(|p| p.value.norm())
            .fold(0.0, f64::max)
    }

    /// `u.csv`, `v.csv`, `w.csv` as `(t, x, re, im)` and `solution.json`
    /// without the field arrays.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, field) in [("u.csv", &self.u), ("v.csv", &self.v), ("w.csv", &self.w)] {
            write_field(&dir.join(name), &self.grid, field)?;
        }
        let mut w = csv::Writer::from_path(dir.join("kf_grid.csv"))?;
        w.write_record(["x", "re", "im"])?;
        for (x, v) in self.grid.x.coords().iter().zip(&self.kf_grid) {
            w.write_record([fmt17(*x), fmt17(v.re), fmt17(v.im)])?;
        }
        w.flush()?;
        let summary = serde_json::json!({
            "grid": self.grid,
            "radius": self.radius,
            "kf_scale": self.kf_scale,
            "taylor_order": self.taylor.order(),
            "residual": self.residual,
            "pairings": self.pairings,
            "t_range": self.t_range,
            "x_range": self.x_range,
        });
        std::fs::write(
            dir.join("solution.json"),
            serde_json::to_vec_pretty(&summary)?,
        )?;
        Ok(())
    }
}

pub(crate) fn write_field(path: &Path, grid: &Grid2D, field: &[Complex64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "x", "re", "im"])?;
    let xs = grid.x.coords();
    for (it, t) in grid.t.coords().into_iter().enumerate() {
        for (ix, x) in xs.iter().enumerate() {
            let v = field[grid.index(it, ix)];
            w.write_record([fmt17(t), fmt17(*x), fmt17(v.re), fmt17(v.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

impl KfProfile {
    /// `kf.csv` with `(x, re, im)` and `kf_coefficients.csv` with
    /// `(n, re, im, root_magnitude, floor)`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("kf.csv"))?;
        w.write_record(["x", "re", "im"])?;
        for (x, v) in self.x.iter().zip(&self.values) {
            w.write_record([fmt17(*x), fmt17(v.re), fmt17(v.im)])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("kf_coefficients.csv"))?;
        w.write_record(["n", "re", "im", "root_magnitude", "floor"])?;
        let a = &self.analyticity;
        for (n, c) in a.coefficients.iter().enumerate() {
            let floor = a.noise_floor.as_ref().map_or(0.0, |f| f[n]);
            w.write_record([
                n.to_string(),
                fmt17(c.re),
                fmt17(c.im),
                fmt17(a.root_magnitudes[n]),
                fmt17(floor),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn sub_grid(g: &Grid1D, idx: &[usize]) -> Result<Grid1D> {
    Grid1D::new(
        g.coord(idx[0]),
        g.coord(*idx.last().expect("non-empty window")),
        idx.len(),
    )
}

/// Bump `exp(1 − 1/(1 − ρ²))` and its gradient `(∂_t, ∂_x)`.
fn bump_with_gradient(t: f64, x: f64, c: (f64, f64), r: f64) -> (f64, f64, f64) {
    let (dt, dx) = (t - c.0, x - c.1);
    let rho2 = (dt * dt + dx * dx) / (r * r);
    if rho2 >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - rho2;
    let phi = (1.0 - 1.0 / q).exp();
    let d = -phi / (q * q) * 2.0 / (r * r);
    (phi, d * dt, d * dx)
}

/// Assembles `w` from a branch solution on `grid` (the solver grid the branch
/// was computed on) and checks `M w = f` on the validity window.
pub fn assemble_w(
    source: &dyn Source,
    coeff: &CoefficientB,
    branch: &BranchSolution,
    grid: &Grid2D,
    analytic_radius: f64,
    opts: &AssemblyOptions,
) -> Result<DistributionalSolution> {
    let (nt, nx) = grid.shape();
    if branch.values.len() != nt * nx {
        return Err(GfError::invalid("branch solution does not match the grid"));
    }
    let u_full = branch.to_physical(&grid.x);
    let gk = GridKf::from_branch(branch)?;
    let xs = grid.x.coords();
    let kf_full: Vec<Complex64> = xs
        .iter()
        .map(|&x| gk.eval(Complex64::new(x, 0.0)))
        .collect();
    let taylor = gk.taylor(opts.taylor_order);
    let x_extent = xs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let b_extent = grid
        .t
        .coords()
        .iter()
        .map(|&t| coeff.big_b(t))
        .fold(0.0, f64::max);
    let cap = (opts.radius_safety * analytic_radius).min(2.0 * x_extent.hypot(b_extent));
    let radius = taylor.certified_radius(opts.certify_tol, cap);

    let x_reach = (radius / 2f64.sqrt()).min(x_extent);
    let b_reach = (radius * radius - x_reach * x_reach).max(0.0).sqrt();
    let xi_idx = window_indices(&grid.x, |x| x.abs() <= x_reach);
    let ti_idx = window_indices(&grid.t, |t| coeff.big_b(t) <= b_reach);
    if xi_idx.len() < 16 || ti_idx.len() < 16 {
        return Err(GfError::Unresolved {
            what: "validity window".into(),
            detail: format!(
                "certified radius {radius:.3e} leaves {} x {} points",
                ti_idx.len(),
                xi_idx.len()
            ),
        });
    }
    let tw = sub_grid(&grid.t, &ti_idx)?;
    let xw = sub_grid(&grid.x, &xi_idx)?;
    let window = Grid2D::new(tw.clone(), xw.clone());
    let (mt, mx) = (ti_idx.len(), xi_idx.len());
    let t_vals = tw.coords();
    let x_vals = xw.coords();

    let v = corrector_v(&taylor, radius, coeff, &t_vals, &x_vals, KF_SCALE)?.values;
    let heaviside = |t: f64| {
        if t > 0.0 {
            1.0
        } else if t == 0.0 {
            0.5
        } else {
            0.0
        }
    };

    // periodic part u + H κ K on full rows, for periodic x-derivatives
    let mut periodic_part = vec![Complex64::new(0.0, 0.0); mt * nx];
    for (r, &it) in ti_idx.iter().enumerate() {
        let h = heaviside(grid.t.coord(it)) * KF_SCALE;
        for ix in 0..nx {
            periodic_part[r * nx + ix] = u_full[it * nx + ix] + kf_full[ix] * h;
        }
    }
    let dpx = derivative_2d(&periodic_part, mt, nx, 1, grid.x.spacing(), 1, 8, true)?;
    let dvx = derivative_2d(&v, mt, mx, 1, xw.spacing(), 1, 8, false)?;

    let mut u = Vec::with_capacity(mt * mx);
    let mut kf_grid = Vec::with_capacity(mx);
    let mut w = Vec::with_capacity(mt * mx);
    let mut wx = Vec::with_capacity(mt * mx);
    for &ix in &xi_idx {
        kf_grid.push(kf_full[ix]);
    }
    for (r, &it) in ti_idx.iter().enumerate() {
        for (c, &ix) in xi_idx.iter().enumerate() {
            u.push(u_full[it * nx + ix]);
            w.push(periodic_part[r * nx + ix] - v[r * mx + c]);
            wx.push(dpx[r * nx + ix] - dvx[r * mx + c]);
        }
    }
    if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(GfError::NonFinite("assembled solution".into()));
    }
    let wt = derivative_2d(&w, mt, mx, 0, tw.spacing(), 1, 6, false)?;
    let f = source.sample_grid(&window);

    let band = opts.band_cells as f64 * tw.spacing() * (1.0 + 1e-9);
    let mut worst = (0.0f64, (0.0, 0.0));
    for (r, &t) in t_vals.iter().enumerate() {
        if t.abs() <= band {
            continue;
        }
        let bt = coeff.b(t);
        for (c, &x) in x_vals.iter().enumerate() {
            let k = r * mx + c;
            let res = (wt[k] + I * bt * wx[k] - f[k]).norm();
            if res > worst.0 {
                worst = (res, (t, x));
            }
        }
    }
    let residual = ResidualRecord {
        max_abs: worst.0,
        at: worst.1,
        tol: opts.residual_tol,
        band_cells: opts.band_cells,
        passed: worst.0 <= opts.residual_tol,
    };

    // pairings against bumps straddling t = 0
    let t_half = t_vals[0].abs().min(*t_vals.last().unwrap());
    let x_half = x_vals[0].abs().min(*x_vals.last().unwrap());
    let pr = 0.9 * t_half.min(x_half / 2.0);
    let mut pairings = Vec::new();
    for cx in [-x_half / 2.0, 0.0, x_half / 2.0] {
        let c = (0.0, cx);
        let mut integrand = Vec::with_capacity(mt * mx);
        for (r, &t) in t_vals.iter().enumerate() {
            let bt = coeff.b(t);
            for (cc, &x) in x_vals.iter().enumerate() {
                let (phi, pt, px) = bump_with_gradient(t, x, c, pr);
                let k = r * mx + cc;
                integrand.push(-w[k] * (pt + I * bt * px) - f[k] * phi);
            }
        }
        let value = trapezoid_2d(&integrand, mt, mx, tw.spacing(), xw.spacing());
        pairings.push(PairingCheck {
            center: c,
            radius: pr,
            value,
            tol: opts.pairing_tol,
            passed: value.norm() <= opts.pairing_tol,
        });
    }

    Ok(DistributionalSolution {
        grid: window,
        u,
        v,
        kf_grid,
        w,
        radius,
        taylor,
        kf_scale: KF_SCALE,
        residual,
        pairings,
        t_range: (ti_idx[0], *ti_idx.last().unwrap()),
        x_range: (xi_idx[0], *xi_idx.last().unwrap()),
    })
}

/// Outcome of the analyticity gate and, when it passes, the assembled solution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolvabilityVerdict {
    pub source: serde_json::Value,
    pub coefficient: CoefficientRecord,
    pub kf: KfProfile,
    pub verdict: AnalyticityVerdict,
    pub solution: Option<Box<DistributionalSolution>>,
    /// `max |jump − (−G)|` over `ξ ≥ 0` between the branch solution and direct quadrature.
    pub jump_mismatch: Option<f64>,
    pub max_exponent: Option<f64>,
    /// `û(0⁻, ξ)` on the FFT frequencies of the `x` grid.
    #[serde(skip)]
    pub trace_minus: Option<Vec<Complex64>>,
}

impl SolvabilityVerdict {
    pub fn solvable(&self) -> bool {
        self.solution.as_ref().is_some_and(|s| s.passed())
    }
}

/// Runs the whole construction on `grid` (see [`super::solver_grid`]).
/// A solution is assembled only on analytic evidence.
pub fn solvability_verdict(
    source: &dyn Source,
    coeff: &CoefficientB,
    grid: &Grid2D,
    opts: &AssemblyOptions,
) -> Result<SolvabilityVerdict> {
    let coefficient = validate_coefficient(coeff, &grid.t)?;
    let kf = compute_kf(source, coeff, &grid.x.coords(), &opts.kf)?;
    let verdict = kf.analyticity.verdict;
    let mut out = SolvabilityVerdict {
        source: source.describe(),
        coefficient,
        kf,
        verdict,
        solution: None,
        jump_mismatch: None,
        max_exponent: None,
        trace_minus: None,
    };
    if verdict != AnalyticityVerdict::AnalyticEvidence {
        return Ok(out);
    }
    let plan = SpectralPlan::new(&grid.x);
    let branch = solve_hat(source, coeff, &grid.t, plan.xi())?;
    let mut mismatch = 0.0f64;
    for (k, &xi) in branch.xi.iter().enumerate() {
        let direct = super::jump_at_zero(source, coeff, xi)?;
        mismatch = mismatch.max((branch.jump[k] - direct).norm());
    }
    out.jump_mismatch = Some(mismatch);
    out.max_exponent = Some(branch.max_exponent);
    out.trace_minus = Some(branch.u_minus.clone());
    let radius = out.kf.analyticity.radius_or_inf();
    out.solution = Some(Box::new(assemble_w(
        source, coeff, &branch, grid, radius, opts,
    )?));
    Ok(out)
}

/// Convergence ratios `|D_{4h} − D_{2h}| / |D_{2h} − D_h|` of 4th-order
/// differences along `x`, per derivative order `1..=4`, over rows with
/// `|t| ≥ t_min`. A smooth field gives ratios near 16.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub t_min: f64,
    /// `(order, ratio)`; `None` when the differences are at roundoff level.
    pub ratios: Vec<(usize, Option<f64>)>,
}

impl SmoothnessReport {
    pub fn min_ratio(&self) -> f64 {
        self.ratios
            .iter()
            .filter_map(|r| r.1)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn smoothness_ratios(sol: &DistributionalSolution, t_min: f64) -> Result<SmoothnessReport> {
    let (mt, mx) = sol.grid.shape();
    let dx = sol.grid.x.spacing();
    let rows: Vec<usize> = (0..mt)
        .filter(|&r| sol.grid.t.coord(r).abs() >= t_min)
        .collect();
    let scale = sol
        .w
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut ratios = Vec::new();
    for order in 1..=4usize {
        let mut coarse = 0.0f64;
        let mut fine = 0.0f64;
        for &r in &rows {
            let row = &sol.w[r * mx..(r + 1) * mx];
            let sub = |stride: usize| -> Result<Vec<Complex64>> {
                let s: Vec<Complex64> = row.iter().step_by(stride).cloned().collect();
                crate::numerics::derivative_1d(&s, dx * stride as f64, order, 4, false)
            };
            let (d4, d2, d1) = (sub(4)?, sub(2)?, sub(1)?);
            // compare at points common to all three, away from one-sided stencils
            for j in 3..d4.len().saturating_sub(3) {
                coarse = coarse.max((d4[j] - d2[2 * j]).norm());
                fine = fine.max((d2[2 * j] - d1[4 * j]).norm());
            }
        }
        let roundoff = 1e3 * f64::EPSILON * scale / dx.powi(order as i32);
        ratios.push((
            order,
            if fine <= roundoff {
                None
            } else {
                Some(coarse / fine)
            },
        ));
    }
    Ok(SmoothnessReport { t_min, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mizohata::source::{solver_grid, SeparableSource};

    #[test]
    fn manufactured_solution_is_recovered() {
        let c = CoefficientB::linear();
        let src = SeparableSource::manufactured(&c, 0.7, 0.15).unwrap();
        let grid = solver_grid(1.0, 257, 4.0, 128).unwrap();
        let v = solvability_verdict(&src, &c, &grid, &AssemblyOptions::default()).unwrap();
        assert_eq!(v.verdict, AnalyticityVerdict::AnalyticEvidence);
        let sol = v.solution.unwrap();
        assert!(sol.residual.passed, "residual {:?}", sol.residual);
        assert!(sol.pairings.iter().all(|p| p.passed), "{:?}", sol.pairings);
    }

    #[test]
    fn separable_source_assembles_with_corrector() {
        let c = CoefficientB::linear();
        let src = SeparableSource::separable(0.2, 0.5, 0.5).unwrap();
        let grid = solver_grid(1.0, 129, 4.0, 128).unwrap();
        let v = solvability_verdict(&src, &c, &grid, &AssemblyOptions::default()).unwrap();
        let sol = v.solution.expect("analytic");
        assert!(sol.v.iter().any(|z| z.norm() > 1e-6));
        assert!(sol.residual.passed, "residual {:?}", sol.residual);
        assert!(sol.pairings.iter().all(|p| p.passed), "{:?}", sol.pairings);
        let s = smoothness_ratios(&sol, 0.1).unwrap();
        assert!(s.min_ratio() >= 3.5, "{s:?}");
    }
}

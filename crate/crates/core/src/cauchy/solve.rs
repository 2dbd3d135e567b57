use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gate::{check_h_condition, growth_constant, GrowthReport};
use super::problem::{CauchyProblem, CoefficientField, InitialData, SumSource};
use crate::gf::{
    estimate_moderateness, test_negligibility, EpsilonLadder, ModerationReport,
    NegligibilityReport, Net,
};
use crate::mizohata::{validate_coefficient, CoefficientB, Source};
use crate::mollifier::{norm_c_alpha, HSchedule, Mollifier, MollifierKind};
use crate::numerics::{gauss_legendre, Grid2D, GridSpec, SpectralPlan, Window};
use crate::{GfError, Result};

/// Per-ε residual bound, relative to the scale of `∂_t û`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Largest admissible `dt · max|multiplier|` for the explicit stepper.
pub const MAX_COURANT: f64 = 0.5;
/// Relative boundary level above which the `x` truncation is flagged.
pub const BOUNDARY_TOL: f64 = 1e-10;

const DUHAMEL_ORDER: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Exact when every coefficient depends on `t` only, RK4 otherwise.
    Auto,
    /// Integrating factor per mode with Duhamel quadrature.
    Exact,
    /// Explicit 4-stage stepping with pseudo-spectral `∂̃^α`.
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    Enforce,
    /// Solve even when no `p ≤ p_max` passes; the outcome is recorded.
    Override,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegOptions {
    pub method: SolverMethod,
    pub gate: GateMode,
    pub p_max: usize,
    /// `dt · max|multiplier|` for RK4, at most [`MAX_COURANT`].
    pub courant: f64,
    pub residual_tol: f64,
}

impl Default for RegOptions {
    fn default() -> Self {
        Self {
            method: SolverMethod::Auto,
            gate: GateMode::Enforce,
            p_max: 12,
            courant: 0.01,
            residual_tol: RESIDUAL_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    /// Richardson central difference of the propagator against the mode ODE.
    TransformFd,
    /// Step-doubling estimate of the RK4 error.
    StepDoubling,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsRecord {
    pub eps: f64,
    pub h: f64,
    pub method: SolverMethod,
    pub residual: f64,
    pub residual_kind: ResidualKind,
    /// `max_ξ Σ_α sup|a_α| |(iξ ρ̂(hξ))^α|`.
    pub max_multiplier: f64,
    pub steps: usize,
    /// `max |u|` on the outer 5% of `x` cells over `max |u|`.
    pub boundary_level: f64,
    pub sup: f64,
}

/// Net of regularized solutions with the data of the run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneralizedSolution {
    pub net: Net,
    pub schedule: HSchedule,
    pub mollifier: MollifierKind,
    pub mollifier_parameter: f64,
    pub c_alpha: Vec<f64>,
    pub sup_coefficients: Vec<f64>,
    pub growth: GrowthReport,
    pub gate_overridden: bool,
    pub records: Vec<EpsRecord>,
    pub moderation: ModerationReport,
}

impl GeneralizedSolution {
    pub fn max_residual(&self) -> f64 {
        self.records.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn boundary_ok(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.boundary_level <= BOUNDARY_TOL)
    }

    pub fn grid(&self) -> &Grid2D {
        match &self.net.grid {
            GridSpec::Two(g) => g,
            GridSpec::One(_) => unreachable!("solution nets are two-dimensional"),
        }
    }

    /// Writes `growth.json`, `residuals.json` and one `u_eps_<k>.csv` per ε.
    pub fn write(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("growth.json"),
            serde_json::to_vec_pretty(&self.growth)?,
        )?;
        std::fs::write(
            dir.join("residuals.json"),
            serde_json::to_vec_pretty(&self.records)?,
        )?;
        std::fs::write(
            dir.join("moderation.json"),
            serde_json::to_vec_pretty(&self.moderation)?,
        )?;
        for (k, field) in self.net.samples.iter().enumerate() {
            crate::mizohata::write_field(&dir.join(format!("u_eps_{k}.csv")), self.grid(), field)?;
        }
        Ok(())
    }
}

/// `(iξ ρ̂(hξ))^α` for `α = 0..=m` on `xi`.
pub fn symbols(rho: &Mollifier, h: f64, xi: &[f64], order: usize) -> Vec<Vec<Complex64>> {
    (0..=order)
        .map(|a| {
            xi.iter()
                .map(|&x| Complex64::new(0.0, x * rho.hat(h * x)).powu(a as u32))
                .collect()
        })
        .collect()
}

/// `c_α` for `α = 1..=m`.
pub fn c_alpha_values(rho: &Mollifier, order: usize) -> Result<Vec<f64>> {
    (1..=order).map(|a| norm_c_alpha(rho, a)).collect()
}

/// Gate report for a problem: `C` from `c_α` and the coefficient bounds.
pub fn growth_report(
    problem: &CauchyProblem,
    schedule: HSchedule,
    rho: &Mollifier,
    ladder: &EpsilonLadder,
    p_max: usize,
) -> Result<(GrowthReport, Vec<f64>, Vec<f64>)> {
    let c_alpha = c_alpha_values(rho, problem.order())?;
    let sups = problem.sup_coefficients();
    let constant = growth_constant(&sups, &c_alpha)?;
    let report = check_h_condition(schedule, constant, problem.order(), &ladder.values, p_max)?;
    Ok((report, c_alpha, sups))
}

fn initial_spectrum(problem: &CauchyProblem, plan: &SpectralPlan) -> Vec<Complex64> {
    match &problem.initial {
        InitialData::Zero => vec![Complex64::new(0.0, 0.0); plan.len()],
        InitialData::Samples(s) => plan.forward(s),
        InitialData::Spectrum(s) => s.clone(),
    }
}

fn max_multiplier(sups: &[f64], sym: &[Vec<Complex64>]) -> f64 {
    let n = sym[0].len();
    (0..n)
        .map(|k| {
            sups.iter()
                .zip(sym)
                .map(|(s, m)| s * m[k].norm())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Mode `k` of a problem whose coefficients depend on `t` only.
struct Mode<'a> {
    values: Vec<&'a (dyn Fn(f64) -> Complex64 + Send + Sync)>,
    integrals: Vec<&'a (dyn Fn(f64) -> Complex64 + Send + Sync)>,
    sym: Vec<Complex64>,
    xi: f64,
    source: Option<&'a dyn Source>,
    support: (f64, f64),
    gl: &'a (Vec<f64>, Vec<f64>),
    scale: f64,
}

impl Mode<'_> {
    fn lambda(&self, t: f64) -> Complex64 {
        -self
            .values
            .iter()
            .zip(&self.sym)
            .map(|(a, m)| a(t) * m)
            .sum::<Complex64>()
    }

    fn big_lambda(&self, t: f64) -> Complex64 {
        -self
            .integrals
            .iter()
            .zip(&self.sym)
            .map(|(a, m)| a(t) * m)
            .sum::<Complex64>()
    }

    fn f_hat(&self, t: f64) -> Complex64 {
        match self.source {
            Some(s)
                if self.support.1 > self.support.0
                    && t >= self.support.0
                    && t <= self.support.1 =>
            {
                s.hat(t, self.xi)
            }
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// `û(b) = e^{Λ(b)−Λ(a)} û(a) + ∫_a^b e^{Λ(b)−Λ(s)} f̂(s) ds`.
    fn propagate(&self, a: f64, b: f64, ua: Complex64) -> Complex64 {
        let lb = self.big_lambda(b);
        let mut u = (lb - self.big_lambda(a)).exp() * ua;
        let (lo, hi) = (a.min(b), a.max(b));
        let empty = !(self.support.1 > self.support.0);
        if self.source.is_none() || empty || hi < self.support.0 || lo > self.support.1 || a == b {
            return u;
        }
        let width = (self.support.1 - self.support.0) / 64.0;
        let pieces = ((self.scale * (b - a).abs() / 4.0).ceil() as usize)
            .max(((b - a).abs() / width).ceil() as usize)
            .max(1);
        let step = (b - a) / pieces as f64;
        let (gx, gw) = self.gl;
        for p in 0..pieces {
            let (p0, p1) = (a + step * p as f64, a + step * (p + 1) as f64);
            let (mid, half) = (0.5 * (p0 + p1), 0.5 * (p1 - p0));
            for (x, w) in gx.iter().zip(gw) {
                let s = mid + half * x;
                u += (lb - self.big_lambda(s)).exp() * self.f_hat(s) * (w * half);
            }
        }
        u
    }
}

type TimeFns<'a> = (
    Vec<&'a (dyn Fn(f64) -> Complex64 + Send + Sync)>,
    Vec<&'a (dyn Fn(f64) -> Complex64 + Send + Sync)>,
);

fn time_fns(coefficients: &[CoefficientField]) -> Result<TimeFns<'_>> {
    let mut values = Vec::new();
    let mut integrals = Vec::new();
    for c in coefficients {
        match c {
            CoefficientField::Time {
                value, integral, ..
            } => {
                values.push(value.as_ref());
                integrals.push(integral.as_ref());
            }
            CoefficientField::General { label, .. } => {
                return Err(GfError::invalid(format!(
                    "coefficient '{label}' depends on x; the exact route needs t-only coefficients"
                )));
            }
        }
    }
    Ok((values, integrals))
}

struct StepOutcome {
    rows: Vec<Vec<Complex64>>,
    residual: f64,
    kind: ResidualKind,
    steps: usize,
}

fn solve_exact(
    problem: &CauchyProblem,
    source: Option<&dyn Source>,
    plan: &SpectralPlan,
    sym: &[Vec<Complex64>],
    tol: f64,
) -> Result<StepOutcome> {
    let (values, integrals) = time_fns(&problem.coefficients)?;
    let t = problem.grid.t.coords();
    let nt = t.len();
    let z = problem.grid.t.nearest(0.0);
    let dt = problem.grid.t.spacing();
    let u0 = initial_spectrum(problem, plan);
    let gl = gauss_legendre(DUHAMEL_ORDER);
    let support = source.map_or((0.0, 0.0), |s| s.t_support());
    let xi = plan.xi();
    let columns: Vec<(Vec<Complex64>, f64, f64)> = (0..xi.len())
        .into_par_iter()
        .map(|k| {
            let mut mode = Mode {
                values: values.clone(),
                integrals: integrals.clone(),
                sym: sym.iter().map(|m| m[k]).collect(),
                xi: xi[k],
                source,
                support,
                gl: &gl,
                scale: 0.0,
            };
            mode.scale = t.iter().map(|&s| mode.lambda(s).norm()).fold(0.0, f64::max);
            let mut col = vec![Complex64::new(0.0, 0.0); nt];
            col[z] = u0[k];
            for j in z + 1..nt {
                col[j] = mode.propagate(t[j - 1], t[j], col[j - 1]);
            }
            for j in (0..z).rev() {
                col[j] = mode.propagate(t[j + 1], t[j], col[j + 1]);
            }
            // residual of ∂_t û = λ û + f̂ from the propagator itself
            let delta = (0.01 * dt).min(0.01 / mode.scale.max(1e-300));
            let mut worst = 0.0f64;
            let mut size = 0.0f64;
            for j in 1..nt - 1 {
                let anchor = if j > z {
                    j - 1
                } else if j < z {
                    j + 1
                } else {
                    j
                };
                let p = |s: f64| mode.propagate(t[anchor], s, col[anchor]);
                let d = |e: f64| (p(t[j] + e) - p(t[j] - e)) / (2.0 * e);
                let deriv = (4.0 * d(0.5 * delta) - d(delta)) / 3.0;
                let lu = mode.lambda(t[j]) * col[j];
                let f = mode.f_hat(t[j]);
                worst = worst.max((deriv - lu - f).norm());
                size = size.max(lu.norm() + f.norm());
            }
            (col, worst, size)
        })
        .collect();
    let scale = columns.iter().map(|c| c.2).fold(1.0, f64::max);
    let residual = columns.iter().map(|c| c.1).fold(0.0, f64::max) / scale;
    let rows = (0..nt)
        .map(|j| {
            let spec: Vec<Complex64> = columns.iter().map(|c| c.0[j]).collect();
            plan.inverse(&spec)
        })
        .collect();
    if residual > tol {
        return Err(GfError::Tolerance {
            what: "transform-side residual".into(),
            value: residual,
            tol,
        });
    }
    Ok(StepOutcome {
        rows,
        residual,
        kind: ResidualKind::TransformFd,
        steps: 0,
    })
}

struct Stepper<'a> {
    problem: &'a CauchyProblem,
    source: Option<&'a dyn Source>,
    plan: &'a SpectralPlan,
    sym: &'a [Vec<Complex64>],
    x: Vec<f64>,
}

impl Stepper<'_> {
    fn rhs(&self, t: f64, u: &[Complex64]) -> Vec<Complex64> {
        let spec = self.plan.forward(u);
        let mut out = match self.source {
            Some(s) => {
                let (lo, hi) = s.t_support();
                if hi > lo && t >= lo && t <= hi {
                    let f: Vec<Complex64> = self.plan.xi().iter().map(|&xi| s.hat(t, xi)).collect();
                    self.plan.inverse(&f)
                } else {
                    vec![Complex64::new(0.0, 0.0); u.len()]
                }
            }
            None => vec![Complex64::new(0.0, 0.0); u.len()],
        };
        for (a, (coef, m)) in self.problem.coefficients.iter().zip(self.sym).enumerate() {
            let du = if a == 0 {
                u.to_vec()
            } else {
                let d: Vec<Complex64> = spec.iter().zip(m).map(|(s, m)| s * m).collect();
                self.plan.inverse(&d)
            };
            for ((o, d), &x) in out.iter_mut().zip(&du).zip(&self.x) {
                *o -= coef.eval(t, x) * d;
            }
        }
        out
    }

    fn step(&self, t: f64, dt: f64, u: &[Complex64]) -> Vec<Complex64> {
        let axpy = |y: &[Complex64], k: &[Complex64], c: f64| -> Vec<Complex64> {
            y.iter().zip(k).map(|(a, b)| a + b * c).collect()
        };
        let k1 = self.rhs(t, u);
        let k2 = self.rhs(t + 0.5 * dt, &axpy(u, &k1, 0.5 * dt));
        let k3 = self.rhs(t + 0.5 * dt, &axpy(u, &k2, 0.5 * dt));
        let k4 = self.rhs(t + dt, &axpy(u, &k3, dt));
        u.iter()
            .enumerate()
            .map(|(i, v)| v + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0))
            .collect()
    }

    /// Rows on the `t` grid with `sub` steps per cell.
    fn march(&self, u0: &[Complex64], sub: usize) -> Vec<Vec<Complex64>> {
        let t = self.problem.grid.t.coords();
        let z = self.problem.grid.t.nearest(0.0);
        let mut rows = vec![Vec::new(); t.len()];
        rows[z] = u0.to_vec();
        for dir in [1i64, -1] {
            let mut j = z as i64;
            let mut u = u0.to_vec();
            while (0..t.len() as i64).contains(&(j + dir)) {
                let (a, b) = (t[j as usize], t[(j + dir) as usize]);
                let h = (b - a) / sub as f64;
                for s in 0..sub {
                    u = self.step(a + h * s as f64, h, &u);
                }
                j += dir;
                rows[j as usize] = u.clone();
            }
        }
        rows
    }
}

fn solve_rk4(
    problem: &CauchyProblem,
    source: Option<&dyn Source>,
    plan: &SpectralPlan,
    sym: &[Vec<Complex64>],
    lmax: f64,
    courant: f64,
    tol: f64,
) -> Result<StepOutcome> {
    if !(courant > 0.0 && courant <= MAX_COURANT) {
        return Err(GfError::invalid(format!(
            "RK4 courant number {courant} outside (0, {MAX_COURANT}]"
        )));
    }
    let dt = problem.grid.t.spacing();
    let sub = ((dt * lmax / courant).ceil() as usize).max(1);
    let stepper = Stepper {
        problem,
        source,
        plan,
        sym,
        x: problem.grid.x.coords(),
    };
    let u0 = plan.inverse(&initial_spectrum(problem, plan));
    let coarse = stepper.march(&u0, sub);
    let fine = stepper.march(&u0, 2 * sub);
    let sup = fine.iter().flatten().map(|v| v.norm()).fold(1.0, f64::max);
    let err = fine
        .iter()
        .flatten()
        .zip(coarse.iter().flatten())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / 15.0
        / sup;
    if err > tol {
        return Err(GfError::Tolerance {
            what: "RK4 step-doubling error".into(),
            value: err,
            tol,
        });
    }
    Ok(StepOutcome {
        rows: fine,
        residual: err,
        kind: ResidualKind::StepDoubling,
        steps: 2 * sub * (problem.grid.t.points - 1),
    })
}

fn boundary_level(rows: &[Vec<Complex64>]) -> (f64, f64) {
    let sup = rows.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if sup == 0.0 {
        return (0.0, 0.0);
    }
    let n = rows[0].len();
    let b = ((0.05 * n as f64).ceil() as usize).clamp(1, n / 2);
    let edge = rows
        .iter()
        .flat_map(|r| r[..b].iter().chain(&r[n - b..]))
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    (edge / sup, sup)
}

fn solve_one(
    problem: &CauchyProblem,
    source: Option<&dyn Source>,
    eps: f64,
    h: f64,
    rho: &Mollifier,
    sups: &[f64],
    opts: &RegOptions,
) -> Result<(Vec<Complex64>, EpsRecord)> {
    let plan = SpectralPlan::new(&problem.grid.x);
    let sym = symbols(rho, h, plan.xi(), problem.order());
    let lmax = max_multiplier(sups, &sym);
    let method = match opts.method {
        SolverMethod::Auto if problem.separable() => SolverMethod::Exact,
        SolverMethod::Auto => SolverMethod::Rk4,
        m => m,
    };
    let out = match method {
        SolverMethod::Exact => solve_exact(problem, source, &plan, &sym, opts.residual_tol)?,
        _ => solve_rk4(
            problem,
            source,
            &plan,
            &sym,
            lmax,
            opts.courant,
            opts.residual_tol,
        )?,
    };
    let (boundary, sup) = boundary_level(&out.rows);
    let field: Vec<Complex64> = out.rows.into_iter().flatten().collect();
    let record = EpsRecord {
        eps,
        h,
        method,
        residual: out.residual,
        residual_kind: out.kind,
        max_multiplier: lmax,
        steps: out.steps,
        boundary_level: boundary,
        sup,
    };
    Ok((field, record))
}

/// Gate, then one solve per ladder value.
pub fn solve_regularized(
    problem: &CauchyProblem,
    schedule: HSchedule,
    rho: &Mollifier,
    ladder: &EpsilonLadder,
    opts: &RegOptions,
) -> Result<GeneralizedSolution> {
    solve_with_sources(problem, schedule, rho, ladder, opts, |_| {
        problem.source.clone()
    })
}

fn solve_with_sources(
    problem: &CauchyProblem,
    schedule: HSchedule,
    rho: &Mollifier,
    ladder: &EpsilonLadder,
    opts: &RegOptions,
    source_at: impl Fn(f64) -> Option<Arc<dyn Source>> + Sync,
) -> Result<GeneralizedSolution> {
    let (growth, c_alpha, sups) = growth_report(problem, schedule, rho, ladder, opts.p_max)?;
    let gate_overridden = match opts.gate {
        GateMode::Enforce => {
            growth.require()?;
            false
        }
        GateMode::Override => !growth.passed(),
    };
    let solved: Vec<(Vec<Complex64>, EpsRecord)> = ladder
        .values
        .iter()
        .zip(&growth.h_values)
        .map(|(&eps, &h)| {
            let src = source_at(eps);
            solve_one(problem, src.as_deref(), eps, h, rho, &sups, opts)
        })
        .collect::<Result<_>>()?;
    let (samples, records): (Vec<_>, Vec<_>) = solved.into_iter().unzip();
    let mut net = Net::new(
        format!(
            "{} [{} h, {} kernel]",
            problem.label,
            schedule.tag(),
            rho.kind
        ),
        ladder.clone(),
        GridSpec::Two(problem.grid.clone()),
        samples,
    )?;
    net.embedding = Some(format!("regularized Cauchy solve, h = {}", schedule.tag()));
    let moderation = estimate_moderateness(&net, &[0, 0], &Window::interior(&net.grid, 0.1))?;
    Ok(GeneralizedSolution {
        net,
        schedule,
        mollifier: rho.kind,
        mollifier_parameter: rho.parameter,
        c_alpha,
        sup_coefficients: sups,
        growth,
        gate_overridden,
        records,
        moderation,
    })
}

/// `∂_t u + i b(t) ∂̃_x u = f` after the sampled sign check on the `t` grid.
pub fn mizohata_reg_solve(
    coeff: &CoefficientB,
    source: Option<Arc<dyn Source>>,
    initial: InitialData,
    grid: &Grid2D,
    schedule: HSchedule,
    rho: &Mollifier,
    ladder: &EpsilonLadder,
    opts: &RegOptions,
) -> Result<GeneralizedSolution> {
    validate_coefficient(coeff, &grid.t)?;
    let problem = CauchyProblem::mizohata(coeff, source, initial, grid.clone())?;
    solve_regularized(&problem, schedule, rho, ladder, opts)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub q: usize,
    /// Gate exponent `p`, 0 when the gate was overridden.
    pub p: usize,
    /// `q − p`, the order the difference must reach.
    pub required: usize,
    pub negligibility: NegligibilityReport,
    pub measured_order: Option<f64>,
    pub passed: bool,
}

/// Solves with `f` and with `f + ε^q g`; the difference must be negligible
/// at order `q − p`.
pub fn uniqueness_probe(
    problem: &CauchyProblem,
    perturbation: Arc<dyn Source>,
    q: usize,
    schedule: HSchedule,
    rho: &Mollifier,
    ladder: &EpsilonLadder,
    opts: &RegOptions,
) -> Result<UniquenessReport> {
    let base = solve_regularized(problem, schedule, rho, ladder, opts)?;
    let perturbed = solve_with_sources(problem, schedule, rho, ladder, opts, |eps| {
        Some(Arc::new(SumSource {
            base: problem.source.clone(),
            extra: perturbation.clone(),
            scale: eps.powi(q as i32),
        }) as Arc<dyn Source>)
    })?;
    let diff = perturbed.net.sub(&base.net)?;
    let negligibility = test_negligibility(&diff, &[0, 0], q.max(1))?;
    let p = base.growth.minimal_p.unwrap_or(0);
    let required = q.saturating_sub(p);
    let passed = required == 0 || negligibility.passes_at(required);
    Ok(UniquenessReport {
        q,
        p,
        required,
        measured_order: negligibility.decay_order,
        negligibility,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_ladder;
    use crate::mizohata::{solver_grid, SeparableSource};
    use crate::mollifier::build_moment_free;

    fn gaussian_data(grid: &Grid2D, sigma: f64) -> InitialData {
        InitialData::Samples(
            grid.x
                .coords()
                .iter()
                .map(|&x| Complex64::new((-x * x / (2.0 * sigma * sigma)).exp(), 0.0))
                .collect(),
        )
    }

    #[test]
    fn zero_data_gives_zero() {
        let grid = solver_grid(0.5, 33, 4.0, 64).unwrap();
        let b = CoefficientB::linear();
        let rho = build_moment_free(1.0).unwrap();
        let ladder = make_ladder(0.1, 0.5, 4).unwrap();
        let s = mizohata_reg_solve(
            &b,
            None,
            InitialData::Zero,
            &grid,
            HSchedule::Log,
            &rho,
            &ladder,
            &RegOptions::default(),
        )
        .unwrap();
        assert!(s.net.samples.iter().flatten().all(|v| v.norm() == 0.0));
        assert_eq!(s.growth.minimal_p, Some(1));
    }

    #[test]
    fn homogeneous_mizohata_matches_closed_form() {
        let grid = solver_grid(0.6, 49, 4.0, 128).unwrap();
        let b = CoefficientB::linear();
        let rho = build_moment_free(1.0).unwrap();
        let ladder = make_ladder(0.1, 0.5, 4).unwrap();
        let init = gaussian_data(&grid, 0.3);
        let s = mizohata_reg_solve(
            &b,
            None,
            init.clone(),
            &grid,
            HSchedule::Log,
            &rho,
            &ladder,
            &RegOptions::default(),
        )
        .unwrap();
        let plan = SpectralPlan::new(&grid.x);
        let InitialData::Samples(u0) = init else {
            unreachable!()
        };
        let u0h = plan.forward(&u0);
        for (e, field) in ladder.values.iter().zip(&s.net.samples) {
            let h = HSchedule::Log.eval(*e);
            for (j, &t) in grid.t.coords().iter().enumerate() {
                let spec: Vec<Complex64> = plan
                    .xi()
                    .iter()
                    .zip(&u0h)
                    .map(|(&xi, u)| u * (b.big_b(t) * xi * rho.hat(h * xi)).exp())
                    .collect();
                let want = plan.inverse(&spec);
                let got = &field[j * grid.x.points..(j + 1) * grid.x.points];
                let err = got
                    .iter()
                    .zip(&want)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-8, "eps {e} t {t}: {err}");
            }
        }
        assert!(s.max_residual() < RESIDUAL_TOL);
    }

    #[test]
    fn rk4_agrees_with_exact_route() {
        let grid = solver_grid(0.4, 17, 4.0, 64).unwrap();
        let b = CoefficientB::linear();
        let rho = build_moment_free(1.0).unwrap();
        let ladder = make_ladder(0.1, 0.5, 3).unwrap();
        let src: Arc<dyn Source> = Arc::new(SeparableSource::separable(0.1, 0.2, 0.3).unwrap());
        let problem =
            CauchyProblem::mizohata(&b, Some(src), gaussian_data(&grid, 0.4), grid.clone())
                .unwrap();
        let exact = solve_regularized(
            &problem,
            HSchedule::Log,
            &rho,
            &ladder,
            &RegOptions::default(),
        )
        .unwrap();
        let opts = RegOptions {
            method: SolverMethod::Rk4,
            ..RegOptions::default()
        };
        let rk = solve_regularized(&problem, HSchedule::Log, &rho, &ladder, &opts).unwrap();
        for (a, b) in exact.net.samples.iter().zip(&rk.net.samples) {
            let err = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "{err}");
        }
    }

    #[test]
    fn linear_schedule_is_gated() {
        let grid = solver_grid(0.5, 33, 4.0, 64).unwrap();
        let b = CoefficientB::linear();
        let rho = build_moment_free(1.0).unwrap();
        let ladder = make_ladder(0.1, 0.5, 4).unwrap();
        let err = mizohata_reg_solve(
            &b,
            None,
            InitialData::Zero,
            &grid,
            HSchedule::Linear,
            &rho,
            &ladder,
            &RegOptions::default(),
        );
        assert!(matches!(err, Err(GfError::Gate(_))));
        let opts = RegOptions {
            gate: GateMode::Override,
            ..RegOptions::default()
        };
        let s = mizohata_reg_solve(
            &b,
            None,
            InitialData::Zero,
            &grid,
            HSchedule::Linear,
            &rho,
            &ladder,
            &opts,
        )
        .unwrap();
        assert!(s.gate_overridden);
    }

    #[test]
    fn planted_perturbation_is_negligible() {
        let grid = solver_grid(0.6, 49, 4.0, 64).unwrap();
        let b = CoefficientB::linear();
        let rho = build_moment_free(1.0).unwrap();
        let ladder = make_ladder(0.1, 0.5, 5).unwrap();
        let src: Arc<dyn Source> = Arc::new(SeparableSource::separable(0.1, 0.3, 0.3).unwrap());
        let problem = CauchyProblem::mizohata(&b, Some(src), InitialData::Zero, grid).unwrap();
        let g: Arc<dyn Source> = Arc::new(SeparableSource::separable(-0.1, 0.3, 0.4).unwrap());
        let r = uniqueness_probe(
            &problem,
            g,
            4,
            HSchedule::Log,
            &rho,
            &ladder,
            &RegOptions::default(),
        )
        .unwrap();
        assert_eq!(r.p, 1);
        assert!(
            r.passed && r.negligibility.passes_at(3),
            "{:?}",
            r.measured_order
        );
    }
}

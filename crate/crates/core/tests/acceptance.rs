//! Acceptance criteria, one PASS/FAIL line each. Run with `--nocapture` to
//! see the table.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use gfkit::bridge::{run_scenario, BridgeOptions, Conclusion, Scenario};
use gfkit::cauchy::{
    check_h_condition, mizohata_reg_solve, uniqueness_probe, CauchyProblem, InitialData, RegOptions,
};
use gfkit::gf::{
    check_association, embed_by_mollification, embed_smooth_1d, estimate_moderateness, local_bumps,
    make_ladder, test_negligibility, EmbedTarget, Net, Target,
};
use gfkit::mizohata::{
    compute_kf, damped_limit, solvability_verdict, solve_hat, solver_grid, AssemblyOptions,
    CoefficientB, KfOptions, SeparableSource, Source,
};
use gfkit::mollifier::{build_bump, build_moment_free, regularized_derivative, HSchedule};
use gfkit::numerics::{AnalyticityVerdict, Grid1D, GridSpec, SpectralPlan, Window};
use gfkit::{Complex64, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

/// `∫ x^k ρ(x) e^{-(x/L)²} dx` on the kernel's own samples. The Gaussian
/// damping only moves the moments by `O(e^{-(cL)²/4})` for a spectrum flat on
/// `[-c, c]`, and makes the truncated quadrature meaningful for slowly
/// decaying kernels.
fn sampled_moment(rho: &gfkit::mollifier::Mollifier, k: i32, damping: f64) -> f64 {
    let g = &rho.grid;
    let v: Vec<f64> = g
        .coords()
        .iter()
        .zip(&rho.samples)
        .map(|(x, r)| x.powi(k) * r * (-(x / damping).powi(2)).exp())
        .collect();
    gfkit::numerics::trapezoid(&v, g.spacing())
}

fn c1_mollifiers() -> Result<Outcome> {
    let bump = build_bump(1.0)?;
    let free = build_moment_free(1.0)?;
    let damping = 16.0 / free.parameter;
    let mass_err = (bump.mass - 1.0)
        .abs()
        .max((sampled_moment(&free, 0, damping) - 1.0).abs());
    let moment_err = (1..=6)
        .map(|k| sampled_moment(&free, k, damping).abs())
        .fold(0.0, f64::max);
    outcome(
        mass_err <= 1e-8 && moment_err <= 1e-8,
        format!("max |mass - 1| {mass_err:.2e}, max |moment k=1..6| {moment_err:.2e} (tol 1e-8)"),
    )
}

fn c2_regularized_derivative() -> Result<Outcome> {
    let grid = Grid1D::periodic(0.0, 2.0 * PI, 1024)?;
    let ladder = make_ladder(0.2, 0.5, 4)?;
    let u = embed_smooth_1d("sin", f64::sin, &ladder, &grid)?;
    let du = embed_smooth_1d("cos", f64::cos, &ladder, &grid)?;
    let gap = |rho: &gfkit::mollifier::Mollifier| -> Result<gfkit::gf::NegligibilityReport> {
        let reg = regularized_derivative(&u, 1, HSchedule::Linear, rho)?;
        let d = reg.linear_combination(Complex64::new(1.0, 0.0), &du, Complex64::new(-1.0, 0.0))?;
        test_negligibility(&d, &[0], 4)
    };
    let free = gap(&build_moment_free(1.0)?)?;
    let bump = gap(&build_bump(1.0)?)?;
    outcome(
        free.passes_at(4) && bump.passes_at(2) && !bump.passes_at(3),
        format!(
            "moment-free negligible at q=4: {}; bump max q {} (order {:.3})",
            free.passes_at(4),
            bump.max_passing(),
            bump.decay_order.unwrap_or(f64::NAN)
        ),
    )
}

fn c3_heaviside_and_dirac() -> Result<Outcome> {
    let grid = Grid1D::symmetric(2.0, 16001)?;
    let ladder = make_ladder(0.05, 0.5, 4)?;
    let psi = build_bump(1.0)?;
    let h = embed_by_mollification(EmbedTarget::Heaviside, &psi, &ladder, &grid)?;
    let delta = embed_by_mollification(EmbedTarget::Dirac, &psi, &ladder, &grid)?;
    let dh = regularized_derivative(&h, 1, HSchedule::Linear, &psi)?;
    let phis = local_bumps(&[0.0], 0.5, 5, 20240601)?;
    let target = Target::Dirac { at: vec![0.0] };
    let a = check_association(&dh, &target, &phis, 1e-4)?;
    let b = check_association(&delta, &target, &phis, 1e-4)?;
    let diff = test_negligibility(&dh.sub(&delta)?, &[0], 1)?;
    outcome(
        a.associated && b.associated && !diff.passes_at(1),
        format!(
            "gaps {:.2e} / {:.2e} (tol 1e-4); difference negligible at q=1: {}",
            a.max_gap().unwrap_or(f64::NAN),
            b.max_gap().unwrap_or(f64::NAN),
            diff.passes_at(1)
        ),
    )
}

/// `-∫ e^{-B(s)ξ} f̂(s, ξ) ds` by composite Simpson over the support.
fn jump_oracle(f: &dyn Source, b: &CoefficientB, xi: f64) -> Complex64 {
    let (lo, hi) = f.t_support();
    let n = 4000;
    let h = (hi - lo) / n as f64;
    let mut s = Complex64::new(0.0, 0.0);
    for j in 0..=n {
        let t = lo + h * j as f64;
        let w = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += f.hat(t, xi) * (-b.big_b(t) * xi).exp() * w;
    }
    -s * h / 3.0
}

fn c4_jump_identity() -> Result<Outcome> {
    let b = CoefficientB::linear();
    let f = SeparableSource::manufactured(&b, 0.7, 0.15)?;
    let grid = solver_grid(1.0, 257, 4.0, 128)?;
    let plan = SpectralPlan::new(&grid.x);
    let branch = solve_hat(&f, &b, &grid.t, plan.xi())?;
    let mut worst = 0.0f64;
    for (k, &xi) in branch.xi.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let expected = if xi > 0.0 {
            jump_oracle(&f, &b, xi)
        } else {
            Complex64::new(0.0, 0.0)
        };
        worst = worst.max((branch.u_plus[k] - branch.u_minus[k] - expected).norm());
    }
    outcome(
        worst <= 1e-6,
        format!(
            "max |jump - oracle| {worst:.2e} over {} modes (tol 1e-6)",
            branch.xi.len() - 1
        ),
    )
}

fn c5_symmetry_obstruction() -> Result<Outcome> {
    let b = CoefficientB::linear();
    let f = SeparableSource::odd_in_t(0.5, 0.3)?;
    let grid = solver_grid(1.0, 257, 4.0, 128)?;
    let sv = solvability_verdict(&f, &b, &grid, &AssemblyOptions::default())?;
    let max_kf = sv.kf.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    outcome(
        max_kf <= 1e-8 && sv.solvable(),
        format!(
            "max |Kf| {max_kf:.2e} (tol 1e-8), verdict {:?}, solvable {}",
            sv.verdict,
            sv.solvable()
        ),
    )
}

fn c6_distributional_solution() -> Result<Outcome> {
    let b = CoefficientB::linear();
    let f = SeparableSource::manufactured(&b, 0.7, 0.15)?;
    let grid = solver_grid(1.0, 257, 4.0, 256)?;
    let sv = solvability_verdict(&f, &b, &grid, &AssemblyOptions::default())?;
    let Some(sol) = &sv.solution else {
        return outcome(
            false,
            format!("no solution assembled, verdict {:?}", sv.verdict),
        );
    };
    let residual = sol.residual.max_abs;
    let pairing = sol.max_pairing();
    outcome(
        residual <= 1e-3 && pairing <= 1e-4,
        format!(
            "max |Mw - f| {residual:.2e} (tol 1e-3), max pairing at t=0 {pairing:.2e} (tol 1e-4)"
        ),
    )
}

/// `Kf(x)` by the trapezoid rule in `s` and `ξ` with `nodes` points on `[0, xi_max]`.
fn kf_trapezoid(
    f: &dyn Source,
    b: &CoefficientB,
    x: &[f64],
    xi_max: f64,
    nodes: usize,
) -> Vec<Complex64> {
    let (lo, hi) = f.t_support();
    let ns = 2000;
    let ds = (hi - lo) / ns as f64;
    let dxi = xi_max / (nodes - 1) as f64;
    let g: Vec<Complex64> = (0..nodes)
        .map(|k| {
            let xi = dxi * k as f64;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..=ns {
                let t = lo + ds * j as f64;
                let w = if j == 0 || j == ns { 0.5 } else { 1.0 };
                s += f.hat(t, xi) * (-b.big_b(t) * xi).exp() * w;
            }
            s * ds
        })
        .collect();
    x.iter()
        .map(|&x| {
            let mut s = Complex64::new(0.0, 0.0);
            for (k, gk) in g.iter().enumerate() {
                let w = if k == 0 || k == nodes - 1 { 0.5 } else { 1.0 };
                s += Complex64::from_polar(1.0, x * dxi * k as f64) * gk * w;
            }
            s * dxi
        })
        .collect()
}

fn c7_kf_oracles() -> Result<Outcome> {
    let b = CoefficientB::linear();
    let f = SeparableSource::separable(0.2, 0.5, 0.5)?;
    let xs = [-0.5, 0.0, 0.3, 1.0];
    let opts = KfOptions::default();
    let kf = compute_kf(&f, &b, &xs, &opts)?;
    let brute = kf_trapezoid(&f, &b, &xs, kf.xi_max_values, 4 * kf.nodes);
    let damped = damped_limit(&f, &b, &[1e-2, 1e-3, 1e-4], &xs, &opts)?;
    let mut worst = 0.0f64;
    for i in 0..xs.len() {
        let v = [kf.values[i], brute[i], damped.limit[i]];
        for a in 0..3 {
            for c in a + 1..3 {
                worst = worst.max((v[a] - v[c]).norm());
            }
        }
    }
    outcome(
        worst <= 1e-6,
        format!("max pairwise disagreement {worst:.2e} over 3 routes (tol 1e-6)"),
    )
}

fn c8_gate() -> Result<Outcome> {
    let ladder = make_ladder(0.1, 0.5, 5)?;
    let log = check_h_condition(HSchedule::Log, 2.0, 1, &ladder.values, 12)?;
    let lin = check_h_condition(HSchedule::Linear, 2.0, 1, &ladder.values, 12)?;
    let lin_fails = lin.rows.iter().all(|r| !r.passes) && lin.rows.len() == 13;
    outcome(
        log.minimal_p == Some(2) && lin_fails,
        format!(
            "log: minimal p {:?}; linear fails for all p <= 12: {lin_fails}",
            log.minimal_p
        ),
    )
}

fn c9_regularized_cauchy() -> Result<Outcome> {
    let b = CoefficientB::linear();
    let grid = solver_grid(0.6, 121, 4.0, 128)?;
    let f: Arc<dyn Source> = Arc::new(SeparableSource::separable(0.2, 0.5, 0.5)?);
    let rho = build_moment_free(1.0)?;
    let ladder = make_ladder(0.1, 0.5, 5)?;
    let opts = RegOptions::default();
    let u = mizohata_reg_solve(
        &b,
        Some(f.clone()),
        InitialData::Zero,
        &grid,
        HSchedule::Log,
        &rho,
        &ladder,
        &opts,
    )?;
    let residual = u.max_residual();
    let moderate = u.moderation.exponent.is_some_and(f64::is_finite)
        && u.moderation.verdict == gfkit::gf::Moderation::Moderate;
    let problem = CauchyProblem::mizohata(&b, Some(f), InitialData::Zero, grid)?;
    let g: Arc<dyn Source> = Arc::new(SeparableSource::separable(-0.1, 0.3, 0.4)?);
    let probe = uniqueness_probe(&problem, g, 4, HSchedule::Log, &rho, &ladder, &opts)?;
    let unique = probe.negligibility.passes_at(3);
    outcome(
        residual <= 1e-8 && moderate && unique,
        format!(
            "max residual {residual:.2e} (tol 1e-8), moderate {moderate} (m = {:.3}), difference negligible at q=3: {unique}",
            u.moderation.exponent.unwrap_or(f64::NAN)
        ),
    )
}

fn c10_round_trip() -> Result<Outcome> {
    let grid = solver_grid(1.0, 257, 4.0, 128)?;
    let rho = build_moment_free(1.0)?;
    let opts = BridgeOptions::default();
    let mut inconsistent = 0;
    let mut manufactured = None;
    for s in Scenario::ALL {
        let e = run_scenario(s, &grid, &rho, &opts)?;
        if e.conclusion == Conclusion::Inconsistent {
            inconsistent += 1;
        }
        if s == Scenario::Manufactured {
            manufactured = Some(e);
        }
    }
    let m = manufactured.expect("manufactured is shipped");
    let gap = m.association.max_gap();
    let ok = m.schedule == HSchedule::Linear
        && m.association.associated
        && m.association.entries.len() == 5
        && gap.is_some_and(|g| g <= 1e-4)
        && m.analyticity == AnalyticityVerdict::AnalyticEvidence
        && inconsistent == 0;
    outcome(
        ok,
        format!(
            "manufactured gap {:.2e} over {} bumps, {:?}; inconsistent {inconsistent} of {}",
            gap.unwrap_or(f64::NAN),
            m.association.entries.len(),
            m.analyticity,
            Scenario::ALL.len()
        ),
    )
}

fn c11_estimator_calibration() -> Result<Outcome> {
    let ladder = make_ladder(0.1, 0.5, 8)?;
    let grid = GridSpec::One(Grid1D::symmetric(1.0, 201)?);
    let window = Window::interior(&grid, 0.1);
    let mut worst = 0.0f64;
    for s in [-3.0, -1.0, 0.0, 2.0] {
        let net = Net::from_fn("planted", ladder.clone(), grid.clone(), |e, p| {
            Complex64::new(e.powf(s) * (1.0 + 0.5 * (3.0 * p[0]).cos()), 0.0)
        })?;
        let m = estimate_moderateness(&net, &[0], &window)?;
        let n = test_negligibility(&net, &[0], 4)?;
        worst = worst.max((m.exponent.unwrap_or(f64::NAN) + s).abs());
        worst = worst.max((n.decay_order.unwrap_or(f64::NAN) - s).abs());
    }
    outcome(
        worst <= 0.2,
        format!("max exponent error {worst:.2e} over s in {{-3, -1, 0, 2}} (tol 0.2)"),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Result<Outcome>, Duration); 11] = [
        (
            "mollifier mass and moments",
            c1_mollifiers,
            Duration::from_secs(1),
        ),
        (
            "regularized derivative of sin",
            c2_regularized_derivative,
            Duration::from_secs(10),
        ),
        (
            "Heaviside derivative and delta",
            c3_heaviside_and_dirac,
            Duration::from_secs(10),
        ),
        (
            "jump identity at t = 0",
            c4_jump_identity,
            Duration::from_secs(30),
        ),
        (
            "symmetry obstruction",
            c5_symmetry_obstruction,
            Duration::from_secs(30),
        ),
        (
            "explicit construction of w",
            c6_distributional_solution,
            Duration::from_secs(120),
        ),
        (
            "Kf oracle agreement",
            c7_kf_oracles,
            Duration::from_secs(60),
        ),
        ("growth gate", c8_gate, Duration::from_secs(1)),
        (
            "gated regularized solve",
            c9_regularized_cauchy,
            Duration::from_secs(60),
        ),
        (
            "association round trip",
            c10_round_trip,
            Duration::from_secs(300),
        ),
        (
            "estimator calibration",
            c11_estimator_calibration,
            Duration::from_secs(10),
        ),
    ];
    let mut failed = Vec::new();
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = if passed { "PASS" } else { "FAIL" };
        println!(
            "{tag} {:>2} {name}: {detail}; {:.2} s (budget {} s)",
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

//! Experiments linking the regularized solution `U` of
//! `∂_t u + i b(t) ∂̃_x u = f` to the distributional construction: local
//! association at the origin against the analyticity of `Kf`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy::{
    mizohata_reg_solve, EpsRecord, GateMode, GeneralizedSolution, InitialData, RegOptions,
};
use crate::gf::{
    check_local_association, extrapolate, local_bumps, make_ladder, test_negligibility,
    AssociationVerdict, EpsilonLadder, NegligibilityReport, Net, Target, TestFunction,
};
use crate::mizohata::{
    solvability_verdict, AssemblyOptions, CoefficientB, DistributionalSolution, SeparableSource,
    SolvabilityVerdict, Source,
};
use crate::mollifier::{HSchedule, Mollifier, MollifierKind};
use crate::numerics::{linear_fit, AnalyticityVerdict, Grid2D, GridSpec, SpectralPlan};
use crate::{GfError, Result};

/// Shipped scenario set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `f = M u*` for a Gaussian-in-`x`, bump-in-`t` `u*`, `b = t`.
    Manufactured,
    /// The same with `b = t³`.
    ManufacturedCubic,
    /// `f` odd in `t`, `b = t`, so that `Kf = 0`.
    OddInT,
    /// Separable `f` with analytic, nonzero `Kf`.
    Separable,
    Zero,
    /// `f̂` decaying like `e^{-κ|ξ/k|^{1/2}}` on `t ≥ 0`, so `Kf` is not analytic.
    Growth,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Manufactured,
        Scenario::ManufacturedCubic,
        Scenario::OddInT,
        Scenario::Separable,
        Scenario::Zero,
        Scenario::Growth,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Scenario::Manufactured => "manufactured",
            Scenario::ManufacturedCubic => "manufactured-cubic",
            Scenario::OddInT => "odd-in-t",
            Scenario::Separable => "separable",
            Scenario::Zero => "zero",
            Scenario::Growth => "growth",
        }
    }

    pub fn build(&self) -> Result<(CoefficientB, Arc<dyn Source>)> {
        let linear = CoefficientB::linear();
        Ok(match self {
            Scenario::Manufactured => {
                let s = SeparableSource::manufactured(&linear, 0.7, 0.15)?;
                (linear, Arc::new(s))
            }
            Scenario::ManufacturedCubic => {
                let b = CoefficientB::cubic();
                let s = SeparableSource::manufactured(&b, 0.7, 0.15)?;
                (b, Arc::new(s))
            }
            Scenario::OddInT => (linear, Arc::new(SeparableSource::odd_in_t(0.5, 0.3)?)),
            Scenario::Separable => (linear, Arc::new(SeparableSource::separable(0.2, 0.5, 0.5)?)),
            Scenario::Zero => (linear, Arc::new(SeparableSource::zero())),
            Scenario::Growth => (
                linear,
                Arc::new(SeparableSource::growth(0.15, 0.15, 8.0, 1.0)?),
            ),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    AssociatedAndAnalytic,
    NoAssociationAndGrowthEvidence,
    /// Association failed although `Kf` looks analytic: the candidate is
    /// wrong, which the dichotomy allows.
    CandidateRejected,
    /// Association holds but `Kf` shows no analytic evidence.
    Inconsistent,
}

pub fn conclude(associated: bool, verdict: AnalyticityVerdict) -> Conclusion {
    match (associated, verdict) {
        (true, AnalyticityVerdict::AnalyticEvidence) => Conclusion::AssociatedAndAnalytic,
        (true, _) => Conclusion::Inconsistent,
        (false, AnalyticityVerdict::GrowthEvidence) => Conclusion::NoAssociationAndGrowthEvidence,
        (false, _) => Conclusion::CandidateRejected,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BridgeOptions {
    pub schedule: HSchedule,
    pub ladder: EpsilonLadder,
    /// Radius of the ball around the origin holding the test functions.
    pub radius: f64,
    pub bumps: usize,
    pub seed: u64,
    pub tol: f64,
    pub assembly: AssemblyOptions,
    pub reg: RegOptions,
}

impl Default for BridgeOptions {
    fn default() -> Self {
        Self {
            schedule: HSchedule::Linear,
            ladder: make_ladder(0.1, 0.5, 5).expect("static ladder"),
            radius: 0.25,
            bumps: 5,
            seed: 20240601,
            tol: 1e-4,
            assembly: AssemblyOptions::default(),
            reg: RegOptions {
                gate: GateMode::Override,
                ..RegOptions::default()
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionalSummary {
    pub residual: f64,
    pub residual_passed: bool,
    pub max_pairing: f64,
    pub radius: f64,
    pub window_t: (f64, f64),
    pub window_x: (f64, f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularizedSummary {
    pub max_residual: f64,
    pub growth_constant: f64,
    pub minimal_p: Option<usize>,
    pub gate_overridden: bool,
    pub moderation_exponent: Option<f64>,
    pub records: Vec<EpsRecord>,
}

impl RegularizedSummary {
    fn of(u: &GeneralizedSolution) -> Self {
        Self {
            max_residual: u.max_residual(),
            growth_constant: u.growth.constant,
            minimal_p: u.growth.minimal_p,
            gate_overridden: u.gate_overridden,
            moderation_exponent: u.moderation.exponent,
            records: u.records.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BridgeExperiment {
    pub scenario: String,
    pub source: serde_json::Value,
    pub coefficient: String,
    pub schedule: HSchedule,
    pub mollifier: MollifierKind,
    pub mollifier_parameter: f64,
    pub epsilons: Vec<f64>,
    pub analyticity: AnalyticityVerdict,
    pub kf_max: f64,
    pub distributional: Option<DistributionalSummary>,
    pub regularized: RegularizedSummary,
    pub candidate: String,
    pub association: AssociationVerdict,
    /// `U − v` against a constant-in-ε `v` on the window.
    pub uniqueness: Option<NegligibilityReport>,
    /// `(∂̃_x − ∂_x) v(0, ·)` along the ladder.
    pub derivative_gap: Option<NegligibilityReport>,
    pub conclusion: Conclusion,
    #[serde(skip)]
    pub solution: Option<Box<DistributionalSolution>>,
    #[serde(skip)]
    pub generalized: Option<Box<GeneralizedSolution>>,
}

/// Restriction of a `(t, x)` net to the index box of `window`.
pub fn crop_net(
    net: &Net,
    window: &Grid2D,
    t_range: (usize, usize),
    x_range: (usize, usize),
) -> Result<Net> {
    let GridSpec::Two(full) = &net.grid else {
        return Err(GfError::invalid("cropping needs a two-dimensional net"));
    };
    let nx = full.x.points;
    let samples = net
        .samples
        .iter()
        .map(|f| {
            (t_range.0..=t_range.1)
                .flat_map(|it| f[it * nx + x_range.0..=it * nx + x_range.1].iter().copied())
                .collect()
        })
        .collect();
    let mut out = Net::new(
        format!("{} | window", net.label),
        net.ladder.clone(),
        GridSpec::Two(window.clone()),
        samples,
    )?;
    out.embedding = net.embedding.clone();
    Ok(out)
}

/// Association radius that keeps every bump strictly inside the grid.
fn fitted_radius(grid: &GridSpec, wanted: f64) -> f64 {
    let room = grid
        .axes()
        .iter()
        .map(|a| (-a.lower).min(a.upper))
        .fold(f64::INFINITY, f64::min);
    wanted.min(0.95 * room)
}

/// Outcome of the association half of an experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub association: AssociationVerdict,
    pub conclusion: Conclusion,
}

/// Tests local association of `u` with `candidate` at the origin and files
/// the result against the analyticity evidence for `Kf`.
pub fn association_probe(
    u: &Net,
    candidate: &Target,
    verdict: AnalyticityVerdict,
    opts: &BridgeOptions,
) -> Result<ProbeOutcome> {
    let radius = fitted_radius(&u.grid, opts.radius);
    let origin = vec![0.0; u.grid.dim()];
    let phis = local_bumps(&origin, radius, opts.bumps, opts.seed)?;
    let association = check_local_association(u, candidate, &origin, radius, &phis, opts.tol)?;
    let conclusion = conclude(association.associated, verdict);
    Ok(ProbeOutcome {
        association,
        conclusion,
    })
}

fn derivative_gap(
    trace: &[Complex64],
    grid: &Grid2D,
    rho: &Mollifier,
    opts: &BridgeOptions,
) -> Result<NegligibilityReport> {
    let plan = SpectralPlan::new(&grid.x);
    let samples = opts
        .ladder
        .values
        .iter()
        .map(|&e| {
            let h = opts.schedule.eval(e);
            let spec: Vec<Complex64> = plan
                .xi()
                .iter()
                .zip(trace)
                .map(|(&xi, u)| u * Complex64::new(0.0, xi * (rho.hat(h * xi) - 1.0)))
                .collect();
            plan.inverse(&spec)
        })
        .collect();
    let net = Net::new(
        "(reg d_x - d_x) v(0)",
        opts.ladder.clone(),
        GridSpec::One(grid.x.clone()),
        samples,
    )?;
    test_negligibility(&net, &[0], 4)
}

fn experiment_with(
    scenario: &str,
    source: Arc<dyn Source>,
    coeff: &CoefficientB,
    grid: &Grid2D,
    rho: &Mollifier,
    opts: &BridgeOptions,
    sv: SolvabilityVerdict,
) -> Result<BridgeExperiment> {
    let kf_max = sv.kf.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let solvable = sv.solvable();
    let initial = match (&sv.trace_minus, solvable) {
        (Some(tr), true) => InitialData::Spectrum(tr.clone()),
        _ => InitialData::Zero,
    };
    let u = mizohata_reg_solve(
        coeff,
        Some(source.clone()),
        initial,
        grid,
        opts.schedule,
        rho,
        &opts.ladder,
        &opts.reg,
    )?;
    let mut out = BridgeExperiment {
        scenario: scenario.to_string(),
        source: sv.source.clone(),
        coefficient: coeff.label.clone(),
        schedule: opts.schedule,
        mollifier: rho.kind,
        mollifier_parameter: rho.parameter,
        epsilons: opts.ladder.values.clone(),
        analyticity: sv.verdict,
        kf_max,
        distributional: None,
        regularized: RegularizedSummary::of(&u),
        candidate: "0".into(),
        association: AssociationVerdict {
            net: String::new(),
            target: String::new(),
            tolerance: opts.tol,
            entries: Vec::new(),
            associated: false,
            any_divergence: false,
            window: None,
            embedding: None,
        },
        uniqueness: None,
        derivative_gap: None,
        conclusion: Conclusion::CandidateRejected,
        solution: None,
        generalized: None,
    };
    match (solvable, sv.solution) {
        (true, Some(sol)) => {
            let crop = crop_net(&u.net, &sol.grid, sol.t_range, sol.x_range)?;
            let target = Target::Sampled {
                label: "v".into(),
                values: sol.w.clone(),
            };
            let probe = association_probe(&crop, &target, sv.verdict, opts)?;
            let constant = Net::new(
                "v",
                opts.ladder.clone(),
                crop.grid.clone(),
                vec![sol.w.clone(); opts.ladder.count],
            )?;
            out.uniqueness = Some(test_negligibility(&crop.sub(&constant)?, &[0, 0], 1)?);
            if let Some(tr) = &sv.trace_minus {
                out.derivative_gap = Some(derivative_gap(tr, grid, rho, opts)?);
            }
            out.distributional = Some(DistributionalSummary {
                residual: sol.residual.max_abs,
                residual_passed: sol.residual.passed,
                max_pairing: sol.max_pairing(),
                radius: sol.radius,
                window_t: (sol.grid.t.lower, sol.grid.t.upper),
                window_x: (sol.grid.x.lower, sol.grid.x.upper),
            });
            out.candidate = "v".into();
            out.association = probe.association;
            out.conclusion = probe.conclusion;
            out.solution = Some(sol);
        }
        _ => {
            let probe = association_probe(&u.net, &Target::Zero, sv.verdict, opts)?;
            out.association = probe.association;
            out.conclusion = probe.conclusion;
        }
    }
    out.generalized = Some(Box::new(u));
    Ok(out)
}

/// Builds `v`, solves the regularized problem with `U(0) = v(0)` and checks
/// local association of `U` with `v` at the origin. Requires a solvable `f`.
pub fn regularized_pipeline(
    label: &str,
    source: Arc<dyn Source>,
    coeff: &CoefficientB,
    grid: &Grid2D,
    rho: &Mollifier,
    opts: &BridgeOptions,
) -> Result<BridgeExperiment> {
    let sv = solvability_verdict(source.as_ref(), coeff, grid, &opts.assembly)?;
    if !sv.solvable() {
        return Err(GfError::invalid(format!(
            "source '{}' is not solvable: verdict {:?}",
            source.label(),
            sv.verdict
        )));
    }
    experiment_with(label, source, coeff, grid, rho, opts, sv)
}

/// Full experiment: `U(0) = v(0)` and candidate `v` when `f` is solvable,
/// `U(0) = 0` and candidate `0` otherwise.
pub fn run_experiment(
    label: &str,
    source: Arc<dyn Source>,
    coeff: &CoefficientB,
    grid: &Grid2D,
    rho: &Mollifier,
    opts: &BridgeOptions,
) -> Result<BridgeExperiment> {
    let sv = solvability_verdict(source.as_ref(), coeff, grid, &opts.assembly)?;
    experiment_with(label, source, coeff, grid, rho, opts, sv)
}

/// [`run_experiment`] on a shipped scenario.
pub fn run_scenario(
    scenario: Scenario,
    grid: &Grid2D,
    rho: &Mollifier,
    opts: &BridgeOptions,
) -> Result<BridgeExperiment> {
    let (coeff, source) = scenario.build()?;
    run_experiment(scenario.id(), source, &coeff, grid, rho, opts)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiracEntry {
    pub test_function: TestFunction,
    /// `⟨ρ_{h(ε)}, φ⟩` along the ladder.
    pub values: Vec<f64>,
    pub extrapolated: Option<f64>,
    pub target: f64,
    pub gap: Option<f64>,
    /// Slope of `log|⟨ρ_h, φ⟩ − φ(0)|` against `log h`; `None` at roundoff.
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiracLimitReport {
    pub kind: MollifierKind,
    pub parameter: f64,
    pub schedule: HSchedule,
    pub epsilons: Vec<f64>,
    pub h_values: Vec<f64>,
    pub tol: f64,
    pub entries: Vec<DiracEntry>,
    pub passed: bool,
}

/// `⟨ρ_h, φ⟩ = ∫ ρ(y) φ(h y) dy` on the kernel's own grid, tending to `φ(0)`.
pub fn mollifier_dirac_limit_check(
    rho: &Mollifier,
    schedule: HSchedule,
    ladder: &EpsilonLadder,
    phis: &[TestFunction],
    tol: f64,
) -> Result<DiracLimitReport> {
    if (rho.mass - 1.0).abs() > 1e-8 {
        return Err(GfError::invalid(format!(
            "mollifier mass {} is not 1",
            rho.mass
        )));
    }
    schedule.validate(&ladder.values)?;
    let h_values: Vec<f64> = ladder.values.iter().map(|&e| schedule.eval(e)).collect();
    let ys = rho.grid.coords();
    let dy = rho.grid.spacing();
    let mut entries = Vec::with_capacity(phis.len());
    for phi in phis {
        if phi.center.len() != 1 {
            return Err(GfError::invalid(
                "the Dirac check uses one-dimensional test functions",
            ));
        }
        let values: Vec<f64> = h_values
            .iter()
            .map(|&h| {
                ys.iter()
                    .zip(&rho.samples)
                    .map(|(&y, r)| r * phi.eval(&[h * y]))
                    .sum::<f64>()
                    * dy
            })
            .collect();
        let target = phi.eval(&[0.0]);
        let ext = extrapolate(
            &values
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect::<Vec<_>>(),
        );
        let extrapolated = ext.limit.map(|l| l.re);
        let (lx, ly): (Vec<f64>, Vec<f64>) = h_values
            .iter()
            .zip(&values)
            .filter(|(_, v)| (*v - target).abs() > 1e-13)
            .map(|(h, v)| (h.ln(), (v - target).abs().ln()))
            .unzip();
        let rate = if lx.len() >= 2 {
            linear_fit(&lx, &ly).map(|f| f.slope)
        } else {
            None
        };
        entries.push(DiracEntry {
            test_function: phi.clone(),
            values,
            extrapolated,
            target,
            gap: extrapolated.map(|l| (l - target).abs()),
            rate,
        });
    }
    let passed = entries.iter().all(|e| e.gap.is_some_and(|g| g <= tol));
    Ok(DiracLimitReport {
        kind: rho.kind,
        parameter: rho.parameter,
        schedule,
        epsilons: ladder.values.clone(),
        h_values,
        tol,
        entries,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mizohata::solver_grid;
    use crate::mollifier::{build_bump, build_moment_free};

    fn phis() -> Vec<TestFunction> {
        vec![
            TestFunction::bump(vec![0.0], 0.5).unwrap(),
            TestFunction::bump(vec![0.6], 0.5).unwrap(),
            TestFunction::bump(vec![0.2], 0.5).unwrap(),
        ]
    }

    #[test]
    fn conclusions_follow_the_dichotomy() {
        use AnalyticityVerdict::*;
        assert_eq!(
            conclude(true, AnalyticEvidence),
            Conclusion::AssociatedAndAnalytic
        );
        assert_eq!(conclude(true, GrowthEvidence), Conclusion::Inconsistent);
        assert_eq!(
            conclude(false, GrowthEvidence),
            Conclusion::NoAssociationAndGrowthEvidence
        );
        assert_eq!(
            conclude(false, AnalyticEvidence),
            Conclusion::CandidateRejected
        );
    }

    #[test]
    fn scaled_kernels_tend_to_dirac() {
        let ladder = make_ladder(0.2, 0.5, 5).unwrap();
        let mf = build_moment_free(1.0).unwrap();
        let r =
            mollifier_dirac_limit_check(&mf, HSchedule::Linear, &ladder, &phis(), 1e-4).unwrap();
        assert!(r.passed, "{:?}", r.entries);
        assert!(r.entries[1].target == 0.0 && r.entries[1].gap.unwrap() < 1e-4);
        let bump = build_bump(1.0).unwrap();
        let rb =
            mollifier_dirac_limit_check(&bump, HSchedule::Linear, &ladder, &phis(), 1e-4).unwrap();
        // second-order bias of the bump against the vanishing moments
        let rate_b = rb.entries[0].rate.unwrap();
        assert!((rate_b - 2.0).abs() < 0.3, "{rate_b}");
        let raw_mf = (r.entries[0].values[4] - 1.0).abs();
        let raw_b = (rb.entries[0].values[4] - 1.0).abs();
        assert!(raw_mf < raw_b, "{raw_mf} vs {raw_b}");
    }

    #[test]
    fn zero_scenario_is_trivially_associated() {
        let grid = solver_grid(0.5, 65, 4.0, 64).unwrap();
        let rho = build_moment_free(1.0).unwrap();
        let e = run_scenario(Scenario::Zero, &grid, &rho, &BridgeOptions::default()).unwrap();
        assert_eq!(
            e.conclusion,
            Conclusion::AssociatedAndAnalytic,
            "{:?}",
            e.association.max_gap()
        );
    }

    #[test]
    fn shifted_candidate_is_rejected() {
        let grid = solver_grid(0.5, 65, 4.0, 64).unwrap();
        let rho = build_moment_free(1.0).unwrap();
        let e = run_scenario(Scenario::Zero, &grid, &rho, &BridgeOptions::default()).unwrap();
        let u = e.generalized.unwrap();
        let shifted = Target::Sampled {
            label: "v + 1".into(),
            values: vec![Complex64::new(1.0, 0.0); grid.len()],
        };
        let p =
            association_probe(&u.net, &shifted, e.analyticity, &BridgeOptions::default()).unwrap();
        assert_eq!(p.conclusion, Conclusion::CandidateRejected);
    }
}

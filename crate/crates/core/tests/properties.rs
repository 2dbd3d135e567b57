//! Invariants checked on randomized inputs.

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use gfkit::bridge::{conclude, Conclusion};
use gfkit::cauchy::{solve_regularized, CauchyProblem, InitialData, RegOptions, SumSource};
use gfkit::gf::{
    check_local_association, estimate_moderateness, local_bumps, make_ladder, pair,
    test_negligibility, Moderation, Net, Target,
};
use gfkit::mizohata::{solve_hat, solver_grid, CoefficientB, SeparableSource, Source};
use gfkit::mollifier::{
    build_bump, build_moment_free, convolve_spectral, fmt17, iterate_convolution, HSchedule,
};
use gfkit::numerics::{AnalyticityVerdict, Grid1D, GridSpec, SpectralPlan, Window};
use gfkit::{Complex64, GfError};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn periodic_grid(points: usize) -> GridSpec {
    GridSpec::One(Grid1D::periodic(-PI, 2.0 * PI, points).unwrap())
}

fn rel_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(1e-300, f64::max);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn negligibility_is_monotone_in_q(amp in 0.1f64..10.0, s in 0.3f64..6.0, freq in 1usize..4) {
        let ladder = make_ladder(0.1, 0.5, 6).unwrap();
        let net = Net::from_fn("planted", ladder, periodic_grid(128), |e, p| c(amp * e.powf(s) * (freq as f64 * p[0]).sin())).unwrap();
        let rep = test_negligibility(&net, &[0], 6).unwrap();
        for q in 1..=6 {
            prop_assert!(!rep.passes_at(q) || rep.passes_at(q - 1), "q = {q}: {:?}", rep.passes);
        }
    }

    #[test]
    fn planted_growth_exponent_is_recovered(m in 0.0f64..4.0, amp in 0.5f64..3.0, shift in -1.0f64..1.0) {
        let ladder = make_ladder(0.1, 0.5, 6).unwrap();
        let grid = periodic_grid(128);
        let net = Net::from_fn("planted", ladder, grid.clone(), |e, p| c(e.powf(-m) * amp * (2.0 + (p[0] - shift).cos()))).unwrap();
        let rep = estimate_moderateness(&net, &[0], &Window::interior(&grid, 0.05)).unwrap();
        let got = rep.exponent.unwrap();
        prop_assert!((got - m).abs() < 1e-8, "planted {m}, recovered {got}");
        prop_assert_eq!(rep.verdict, Moderation::Moderate);
    }

    #[test]
    fn local_association_separates_clear_cut_nets(x0 in -1.5f64..1.5, k in 0.5f64..3.0, seed in 0u64..1000) {
        let ladder = make_ladder(0.1, 0.5, 6).unwrap();
        let grid = GridSpec::One(Grid1D::symmetric(4.0, 1601).unwrap());
        let g = |x: f64| (k * x).cos();
        let values = (0..grid.len()).map(|i| c(g(grid.point(i)[0]))).collect();
        let target = Target::Sampled { label: "g".into(), values };
        let phis = local_bumps(&[x0], 0.5, 4, seed).unwrap();
        let near = Net::from_fn("g + eps^2", ladder.clone(), grid.clone(), |e, p| c(g(p[0]) + e * e * (1.0 + p[0] * p[0]))).unwrap();
        let off = Net::from_fn("g + 1", ladder, grid, |_, p| c(g(p[0]) + 1.0)).unwrap();
        let yes = check_local_association(&near, &target, &[x0], 0.5, &phis, 1e-6).unwrap();
        let no = check_local_association(&off, &target, &[x0], 0.5, &phis, 1e-6).unwrap();
        prop_assert!(yes.associated, "gap {:?}", yes.max_gap());
        prop_assert!(!no.associated);
    }

    #[test]
    fn pairing_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, p in 0.5f64..2.0, q in 0.5f64..2.0, center in -1.0f64..1.0) {
        let ladder = make_ladder(0.2, 0.5, 4).unwrap();
        let grid = periodic_grid(256);
        let u = Net::from_fn("u", ladder.clone(), grid.clone(), |e, x| c((p * x[0]).sin() / (1.0 + e))).unwrap();
        let v = Net::from_fn("v", ladder, grid, |e, x| Complex64::new(e * (q * x[0]).cos(), x[0])).unwrap();
        let w = u.linear_combination(c(a), &v, c(b)).unwrap();
        let phi = gfkit::gf::TestFunction::bump(vec![center], 1.0).unwrap();
        let (pu, pv, pw) = (pair(&u, &phi).unwrap(), pair(&v, &phi).unwrap(), pair(&w, &phi).unwrap());
        let lin: Vec<Complex64> = pu.values.iter().zip(&pv.values).map(|(x, y)| a * x + b * y).collect();
        prop_assert!(rel_gap(&pw.values, &lin) <= 1e-12);
    }

    #[test]
    fn fmt17_round_trips(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let back: f64 = fmt17(v).parse().unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }

    #[test]
    fn spectral_round_trip_and_parseval(seed in any::<u64>(), points in 16usize..200) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid1D::periodic(-1.3, 2.7, points).unwrap();
        let plan = SpectralPlan::new(&grid);
        let f: Vec<Complex64> = (0..points).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let hat = plan.forward(&f);
        let back = plan.inverse(&hat);
        prop_assert!(rel_gap(&back, &f) <= 1e-10);
        let lhs: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.spacing();
        let rhs: f64 = hat.iter().map(|v| v.norm_sqr()).sum::<f64>() * plan.dxi() / (2.0 * PI);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn spectral_convolution_matches_direct_sum(sigma in 0.2f64..0.6, w in 0.3f64..0.8, shift in -0.5f64..0.5) {
        let grid = Grid1D::symmetric(8.0, 401).unwrap();
        let xs = grid.coords();
        let dx = grid.spacing();
        let row: Vec<Complex64> = xs.iter().map(|&x| c((-(x - shift).powi(2) / (2.0 * w * w)).exp())).collect();
        let kernel = |x: f64| (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt());
        let spectral = convolve_spectral(&row, &grid, |xi| (-0.5 * sigma * sigma * xi * xi).exp()).unwrap();
        let direct: Vec<Complex64> = xs
            .iter()
            .map(|&x| xs.iter().zip(&row).map(|(&y, r)| r * kernel(x - y)).sum::<Complex64>() * dx)
            .collect();
        let err = spectral.iter().zip(&direct).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-8, "max difference {err:e}");
    }

    #[test]
    fn rescaling_and_iteration_keep_unit_mass(s in 0.3f64..2.0, k in 1usize..4, r in 0.5f64..2.0, cut in 0.5f64..2.0) {
        for rho in [build_bump(r).unwrap(), build_moment_free(cut).unwrap()] {
            let scaled = rho.rescaled(s).unwrap();
            prop_assert!((scaled.mass - 1.0).abs() < 1e-9, "{:?} scaled mass {}", rho.kind, scaled.mass);
            let it = iterate_convolution(&rho, k).unwrap();
            prop_assert!((it.mass - 1.0).abs() < 1e-9, "{:?} iterated mass {}", rho.kind, it.mass);
        }
    }

    #[test]
    fn branch_exponents_never_grow(center in -0.6f64..0.6, radius in 0.1f64..0.4, sigma in 0.3f64..1.0, cubic in any::<bool>()) {
        let coeff = if cubic { CoefficientB::cubic() } else { CoefficientB::linear() };
        let src = SeparableSource::separable(center, radius, sigma).unwrap();
        let t = Grid1D::symmetric(1.0, 101).unwrap();
        let xi: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.5).collect();
        let sol = solve_hat(&src, &coeff, &t, &xi).unwrap();
        prop_assert!(sol.max_exponent <= 1e-12, "max exponent {}", sol.max_exponent);
    }
}

fn reg_setup() -> (
    CoefficientB,
    gfkit::numerics::Grid2D,
    gfkit::mollifier::Mollifier,
    gfkit::gf::EpsilonLadder,
) {
    (
        CoefficientB::linear(),
        solver_grid(0.4, 41, 4.0, 64).unwrap(),
        build_moment_free(1.0).unwrap(),
        make_ladder(0.1, 0.5, 5).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3))]

    #[test]
    fn regularized_solution_is_linear_in_the_source(ca in -0.2f64..0.2, cb in -0.2f64..0.2, lambda in -2.0f64..2.0) {
        let (b, grid, rho, ladder) = reg_setup();
        let f: Arc<dyn Source> = Arc::new(SeparableSource::separable(ca, 0.15, 0.5).unwrap());
        let g: Arc<dyn Source> = Arc::new(SeparableSource::separable(cb, 0.1, 0.4).unwrap());
        let sum: Arc<dyn Source> = Arc::new(SumSource { base: Some(f.clone()), extra: g.clone(), scale: lambda });
        let opts = RegOptions::default();
        let solve = |s: Arc<dyn Source>| {
            let p = CauchyProblem::mizohata(&b, Some(s), InitialData::Zero, grid.clone()).unwrap();
            solve_regularized(&p, HSchedule::Log, &rho, &ladder, &opts).unwrap().net
        };
        let (uf, ug, us) = (solve(f), solve(g), solve(sum));
        let lin = uf.linear_combination(c(1.0), &ug, c(lambda)).unwrap();
        for (a, e) in us.samples.iter().zip(&lin.samples) {
            prop_assert!(rel_gap(a, e) <= 1e-10);
        }
    }

    #[test]
    fn regularized_solution_takes_the_initial_data(sigma in 0.3f64..1.0, x1 in -1.0f64..1.0) {
        let (b, grid, rho, ladder) = reg_setup();
        let u0: Vec<Complex64> = grid.x.coords().iter().map(|&x| c((-(x - x1).powi(2) / (2.0 * sigma * sigma)).exp())).collect();
        let p = CauchyProblem::mizohata(&b, None, InitialData::Samples(u0.clone()), grid.clone()).unwrap();
        let sol = solve_regularized(&p, HSchedule::Log, &rho, &ladder, &RegOptions::default()).unwrap();
        let z = grid.t.nearest(0.0);
        let nx = grid.x.points;
        for s in &sol.net.samples {
            prop_assert!(rel_gap(&s[z * nx..(z + 1) * nx], &u0) <= 1e-10);
        }
    }

    #[test]
    fn passing_gate_gives_moderate_solutions(coeff in 0.5f64..1.0, exponent in 0.005f64..0.05, center in -0.2f64..0.2) {
        let (b, grid, rho, ladder) = reg_setup();
        let schedule = HSchedule::Custom { coeff, exponent };
        let f: Arc<dyn Source> = Arc::new(SeparableSource::separable(center, 0.15, 0.5).unwrap());
        let p = CauchyProblem::mizohata(&b, Some(f), InitialData::Zero, grid).unwrap();
        match solve_regularized(&p, schedule, &rho, &ladder, &RegOptions::default()) {
            Ok(sol) => {
                prop_assert!(sol.growth.passed());
                prop_assert_eq!(sol.moderation.verdict, Moderation::Moderate);
                prop_assert!(sol.moderation.exponent.is_some_and(f64::is_finite));
            }
            Err(GfError::Gate(_)) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn conclusions_follow_the_dichotomy() {
    use AnalyticityVerdict::*;
    for associated in [true, false] {
        for verdict in [AnalyticEvidence, GrowthEvidence, Inconclusive] {
            let got = conclude(associated, verdict);
            let expected = match (associated, verdict) {
                (true, AnalyticEvidence) => Conclusion::AssociatedAndAnalytic,
                (true, _) => Conclusion::Inconsistent,
                (false, GrowthEvidence) => Conclusion::NoAssociationAndGrowthEvidence,
                (false, _) => Conclusion::CandidateRejected,
            };
            assert_eq!(got, expected);
            assert_eq!(
                got == Conclusion::AssociatedAndAnalytic,
                associated && verdict == AnalyticEvidence
            );
        }
    }
}

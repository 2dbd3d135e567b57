//! Gated regularized solve of a Mizohata problem with the log schedule and a
//! uniqueness probe against a planted `ε^4` perturbation.

use std::sync::Arc;

use gfkit::cauchy::{mizohata_reg_solve, uniqueness_probe, CauchyProblem, InitialData, RegOptions};
use gfkit::gf::make_ladder;
use gfkit::mizohata::{solver_grid, CoefficientB, SeparableSource, Source};
use gfkit::mollifier::{build_moment_free, HSchedule};
use gfkit::Result;

fn main() -> Result<()> {
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
    println!(
        "C = {:.6}, minimal p = {:?}",
        u.growth.constant, u.growth.minimal_p
    );
    for r in &u.records {
        println!(
            "  eps {:.5}: h {:.5}, residual {:.2e}, sup {:.4e}",
            r.eps, r.h, r.residual, r.sup
        );
    }
    println!(
        "moderation {:?}, exponent {:?}",
        u.moderation.verdict, u.moderation.exponent
    );
    let problem = CauchyProblem::mizohata(&b, Some(f), InitialData::Zero, grid.clone())?;
    let g: Arc<dyn Source> = Arc::new(SeparableSource::separable(-0.1, 0.3, 0.4)?);
    let probe = uniqueness_probe(&problem, g, 4, HSchedule::Log, &rho, &ladder, &opts)?;
    println!(
        "uniqueness: p = {}, required q = {}, measured order {:?}, passed {}",
        probe.p, probe.required, probe.measured_order, probe.passed
    );
    Ok(())
}

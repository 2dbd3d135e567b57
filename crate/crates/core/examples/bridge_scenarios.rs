//! Association experiment on every shipped scenario.

use gfkit::bridge::{run_scenario, BridgeOptions, Scenario};
use gfkit::mizohata::solver_grid;
use gfkit::mollifier::build_moment_free;
use gfkit::Result;

fn main() -> Result<()> {
    let grid = solver_grid(1.0, 257, 4.0, 128)?;
    let rho = build_moment_free(1.0)?;
    let opts = BridgeOptions::default();
    for s in Scenario::ALL {
        let e = run_scenario(s, &grid, &rho, &opts)?;
        println!(
            "{:<20} {:<18} gap {:>9.2e}  reg residual {:.1e}  {:?}",
            s.id(),
            format!("{:?}", e.analyticity),
            e.association.max_gap().unwrap_or(f64::NAN),
            e.regularized.max_residual,
            e.conclusion
        );
    }
    Ok(())
}

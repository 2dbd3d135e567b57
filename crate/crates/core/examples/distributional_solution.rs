//! Explicit solution `w` of `∂_t w + i t ∂_x w = f` for a manufactured
//! source, with the jump identity at `t = 0`.

use gfkit::mizohata::{
    solvability_verdict, solver_grid, AssemblyOptions, CoefficientB, SeparableSource,
};
use gfkit::Result;

fn main() -> Result<()> {
    let b = CoefficientB::linear();
    let f = SeparableSource::manufactured(&b, 0.7, 0.15)?;
    let grid = solver_grid(1.0, 257, 4.0, 256)?;
    let sv = solvability_verdict(&f, &b, &grid, &AssemblyOptions::default())?;
    println!(
        "verdict {:?}, jump mismatch {:.2e}",
        sv.verdict,
        sv.jump_mismatch.unwrap_or(f64::NAN)
    );
    if let Some(sol) = &sv.solution {
        let (t, x) = (sol.grid.t.clone(), sol.grid.x.clone());
        println!(
            "window t in [{:.3}, {:.3}], x in [{:.3}, {:.3}], radius {:.3}",
            t.lower, t.upper, x.lower, x.upper, sol.radius
        );
        println!(
            "max |Mw - f| = {:.3e} at {:?}",
            sol.residual.max_abs, sol.residual.at
        );
        println!("max pairing across t = 0: {:.3e}", sol.max_pairing());
    }
    Ok(())
}

//! `ρ_h → δ` as `h → 0` for both kernels, tested on a few bumps.

use gfkit::bridge::mollifier_dirac_limit_check;
use gfkit::gf::{local_bumps, make_ladder};
use gfkit::mollifier::{build_bump, build_moment_free, HSchedule};
use gfkit::Result;

fn main() -> Result<()> {
    let ladder = make_ladder(0.1, 0.5, 5)?;
    let phis = local_bumps(&[0.0], 1.0, 3, 7)?;
    for rho in [build_bump(1.0)?, build_moment_free(1.0)?] {
        let r = mollifier_dirac_limit_check(&rho, HSchedule::Linear, &ladder, &phis, 1e-6)?;
        println!("{} kernel: passed {}", rho.kind, r.passed);
        for e in &r.entries {
            println!(
                "  phi(0) = {:.6}: gap {:?}, rate {:?}",
                e.target, e.gap, e.rate
            );
        }
    }
    Ok(())
}

//! `(∂̃)_h sin − cos` with `h = ε`: negligible to every probed order for the
//! moment-free kernel, only to order 2 for the bump.

use std::f64::consts::PI;

use gfkit::gf::{embed_smooth_1d, make_ladder, test_negligibility};
use gfkit::mollifier::{build_bump, build_moment_free, regularized_derivative, HSchedule};
use gfkit::numerics::Grid1D;
use gfkit::{Complex64, Result};

fn main() -> Result<()> {
    let grid = Grid1D::periodic(0.0, 2.0 * PI, 1024)?;
    let ladder = make_ladder(0.2, 0.5, 4)?;
    let u = embed_smooth_1d("sin", f64::sin, &ladder, &grid)?;
    let du = embed_smooth_1d("cos", f64::cos, &ladder, &grid)?;
    for rho in [build_moment_free(1.0)?, build_bump(1.0)?] {
        let reg = regularized_derivative(&u, 1, HSchedule::Linear, &rho)?;
        let gap =
            reg.linear_combination(Complex64::new(1.0, 0.0), &du, Complex64::new(-1.0, 0.0))?;
        let r = test_negligibility(&gap, &[0], 4)?;
        println!(
            "{} kernel: sup-norms [{}], order {:?}, negligible up to q = {}",
            rho.kind,
            r.sup_norms
                .iter()
                .map(|v| format!("{v:.3e}"))
                .collect::<Vec<_>>()
                .join(", "),
            r.decay_order,
            r.max_passing()
        );
    }
    Ok(())
}

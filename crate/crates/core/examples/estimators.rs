//! Moderateness and negligibility estimators on nets planted as
//! `ε^s·g(x)`.

use gfkit::gf::{estimate_moderateness, make_ladder, test_negligibility, Net};
use gfkit::numerics::{Grid1D, GridSpec, Window};
use gfkit::{Complex64, Result};

fn main() -> Result<()> {
    let ladder = make_ladder(0.1, 0.5, 8)?;
    let grid = GridSpec::One(Grid1D::symmetric(1.0, 201)?);
    let window = Window::interior(&grid, 0.1);
    for s in [-3.0, -1.0, 0.0, 2.0] {
        let samples = ladder
            .values
            .iter()
            .map(|&e| {
                (0..201)
                    .map(|i| Complex64::new(e.powf(s) * (1.0 + 0.1 * (i as f64 * 0.03).sin()), 0.0))
                    .collect()
            })
            .collect();
        let net = Net::new(
            format!("planted s = {s}"),
            ladder.clone(),
            grid.clone(),
            samples,
        )?;
        let m = estimate_moderateness(&net, &[0], &window)?;
        let n = test_negligibility(&net, &[0], 4)?;
        println!(
            "s = {s:>4}: exponent {:+.4}, verdict {:?}, decay order {:+.4}, negligible up to q = {}",
            m.exponent.unwrap_or(f64::NAN),
            m.verdict,
            n.decay_order.unwrap_or(f64::NAN),
            n.max_passing()
        );
    }
    Ok(())
}

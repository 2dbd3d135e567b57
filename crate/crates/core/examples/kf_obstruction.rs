//! Obstruction `Kf` and its analyticity diagnostic for an analytic and a
//! growth scenario.

use gfkit::mizohata::{compute_kf, CoefficientB, KfOptions, SeparableSource};
use gfkit::Result;

fn main() -> Result<()> {
    let b = CoefficientB::linear();
    let xs: Vec<f64> = (0..=8).map(|j| -1.0 + 0.25 * j as f64).collect();
    let cases = [
        ("separable", SeparableSource::separable(0.2, 0.5, 0.5)?),
        ("growth", SeparableSource::growth(0.3, 0.3, 8.0, 1.0)?),
    ];
    for (name, src) in cases {
        let kf = compute_kf(&src, &b, &xs, &KfOptions::default())?;
        let a = &kf.analyticity;
        println!(
            "{name}: verdict {:?}, tail slope {:?}, radius {:?}, xi_max {:.3e}/{:.3e}, {} nodes",
            a.verdict, a.tail_slope, a.radius, kf.xi_max_values, kf.xi_max_coefficients, kf.nodes
        );
        let c: Vec<String> = a
            .root_magnitudes
            .iter()
            .map(|c| format!("{c:.3}"))
            .collect();
        println!("  c_n = [{}]", c.join(", "));
        println!("  Kf(0) = {:.6e}", kf.values[4]);
    }
    Ok(())
}

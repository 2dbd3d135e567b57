//! `(∂̃)_h H` and the embedded `δ` are both associated with `δ`, yet their
//! difference is not negligible.

use gfkit::gf::{
    check_association, embed_by_mollification, local_bumps, make_ladder, test_negligibility,
    EmbedTarget, Target,
};
use gfkit::mollifier::{build_bump, regularized_derivative, HSchedule};
use gfkit::numerics::Grid1D;
use gfkit::Result;

fn main() -> Result<()> {
    let grid = Grid1D::symmetric(2.0, 16001)?;
    let ladder = make_ladder(0.05, 0.5, 4)?;
    let psi = build_bump(1.0)?;
    let h = embed_by_mollification(EmbedTarget::Heaviside, &psi, &ladder, &grid)?;
    let delta = embed_by_mollification(EmbedTarget::Dirac, &psi, &ladder, &grid)?;
    let dh = regularized_derivative(&h, 1, HSchedule::Linear, &psi)?;
    let phis = local_bumps(&[0.0], 0.5, 5, 20240601)?;
    let target = Target::Dirac { at: vec![0.0] };
    for (name, net) in [("reg. derivative of H", &dh), ("embedded delta", &delta)] {
        let v = check_association(net, &target, &phis, 1e-4)?;
        println!(
            "{name}: associated {} (max gap {:.2e})",
            v.associated,
            v.max_gap().unwrap_or(f64::NAN)
        );
    }
    let diff = dh.sub(&delta)?;
    let r = test_negligibility(&diff, &[0], 2)?;
    println!(
        "difference: sup-norms [{}], negligible at q = 1: {}",
        r.sup_norms
            .iter()
            .map(|v| format!("{v:.3e}"))
            .collect::<Vec<_>>()
            .join(", "),
        r.passes_at(1)
    );
    Ok(())
}

//! Bump and moment-free kernels: mass, moments, iterated convolutions and
//! the norms `c_α`.

use gfkit::mollifier::{
    build_bump, build_moment_free, iterate_convolution, CAlphaTable, MollifierKind,
};
use gfkit::Result;

fn main() -> Result<()> {
    let bump = build_bump(1.0)?;
    let free = build_moment_free(1.0)?;
    for rho in [&bump, &free] {
        println!(
            "{} kernel, parameter {}: mass - 1 = {:.2e}",
            rho.kind,
            rho.parameter,
            rho.mass - 1.0
        );
        if rho.kind == MollifierKind::MomentFree {
            let m: Vec<String> = rho
                .spectral_moments(6)
                .iter()
                .map(|v| format!("{v:.1e}"))
                .collect();
            println!("  moments 1..6: [{}]", m.join(", "));
        } else {
            println!("  second moment {:.6}", rho.sampled_moment(2));
        }
        let k3 = iterate_convolution(rho, 3)?;
        println!(
            "  rho^[3]: mass {:.12}, spectral error {:.2e}",
            k3.mass, k3.spectral_error
        );
    }
    let table = CAlphaTable::compute(&[&bump, &free], 3)?;
    for e in &table.entries {
        println!("c_{} ({}) = {:.8}", e.alpha, e.kind, e.c_alpha);
    }
    Ok(())
}

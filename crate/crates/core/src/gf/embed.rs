use num_complex::Complex64;
use rayon::prelude::*;

use super::{EpsilonLadder, Net};
use crate::mollifier::{regularize::Convolver, Mollifier};
use crate::numerics::{Grid1D, GridSpec};
use crate::{GfError, Result};

/// Constant-in-ε net of the samples of a smooth function.
pub fn embed_smooth(
    label: impl Into<String>,
    f: impl Fn(&[f64]) -> Complex64,
    ladder: &EpsilonLadder,
    grid: &GridSpec,
) -> Result<Net> {
    let field: Vec<Complex64> = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
    if field.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(GfError::NonFinite("embedded smooth function".into()));
    }
    Net::new(
        label,
        ladder.clone(),
        grid.clone(),
        vec![field; ladder.count],
    )
}

/// [`embed_smooth`] for a real function of one variable.
pub fn embed_smooth_1d(
    label: impl Into<String>,
    f: impl Fn(f64) -> f64,
    ladder: &EpsilonLadder,
    grid: &Grid1D,
) -> Result<Net> {
    embed_smooth(
        label,
        |p| Complex64::new(f(p[0]), 0.0),
        ladder,
        &GridSpec::One(grid.clone()),
    )
}

/// Distribution to embed by mollification.
#[derive(Clone, Copy)]
pub enum EmbedTarget<'a> {
    /// A smooth function, mollified by spectral convolution.
    Smooth(&'a (dyn Fn(f64) -> f64 + Sync)),
    /// `H(x)`, the Heaviside step at 0.
    Heaviside,
    /// `δ` at 0.
    Dirac,
}

impl EmbedTarget<'_> {
    fn name(&self) -> &'static str {
        match self {
            EmbedTarget::Smooth(_) => "smooth",
            EmbedTarget::Heaviside => "heaviside",
            EmbedTarget::Dirac => "dirac",
        }
    }
}

/// `u_ε = T ∗ ψ_ε` sampled on `grid` for every ladder value.
pub fn embed_by_mollification(
    target: EmbedTarget<'_>,
    psi: &Mollifier,
    ladder: &EpsilonLadder,
    grid: &Grid1D,
) -> Result<Net> {
    if (psi.mass - 1.0).abs() > 1e-8 {
        return Err(GfError::invalid(format!(
            "mollifier mass {} is not 1",
            psi.mass
        )));
    }
    let reach = psi.effective_radius(ladder.largest());
    if !matches!(target, EmbedTarget::Smooth(_)) && (grid.lower > -reach || grid.upper < reach) {
        return Err(GfError::Support(format!(
            "mollifier reach {reach:.3} at epsilon = {} exceeds the grid [{}, {}]",
            ladder.largest(),
            grid.lower,
            grid.upper
        )));
    }
    let xs = grid.coords();
    let samples: Result<Vec<Vec<Complex64>>> = ladder
        .values
        .par_iter()
        .map(|&eps| -> Result<Vec<Complex64>> {
            let real: Vec<f64> = match target {
                EmbedTarget::Dirac => {
                    psi.check_resolved(eps, grid.spacing())?;
                    xs.iter().map(|&x| psi.eval(x / eps) / eps).collect()
                }
                EmbedTarget::Heaviside => {
                    psi.check_resolved(eps, grid.spacing())?;
                    let r = psi.effective_radius(eps);
                    xs.iter()
                        .map(|&x| match psi.kind {
                            crate::mollifier::MollifierKind::Bump if x <= -r => 0.0,
                            crate::mollifier::MollifierKind::Bump if x >= r => 1.0,
                            _ => psi.cumulative(x / eps),
                        })
                        .collect()
                }
                EmbedTarget::Smooth(f) => {
                    let row: Vec<Complex64> =
                        xs.iter().map(|&x| Complex64::new(f(x), 0.0)).collect();
                    let conv = Convolver::new(grid)?;
                    let m: Vec<Complex64> = conv
                        .xi()
                        .iter()
                        .map(|&k| Complex64::new(psi.hat(eps * k), 0.0))
                        .collect();
                    return Ok(conv.apply(&row, &m));
                }
            };
            Ok(real.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
        })
        .collect();
    let mut net = Net::new(
        format!("{} * {}_eps", target.name(), psi.kind),
        ladder.clone(),
        GridSpec::One(grid.clone()),
        samples?,
    )?;
    net.embedding = Some(format!(
        "mollification by {} kernel (parameter {})",
        psi.kind, psi.parameter
    ));
    Ok(net)
}

//! Mollifiers: the compactly supported bump and the moment-free kernel built
//! from a spectral plateau, their scalings `ρ_s(x) = ρ(x/s)/s`, iterated
//! convolutions `ρ^{[k]}`, the norms `c_α` and the regularized derivative.
//!
//! `ρ^{[k]}` is the convolution product of `k` copies of `ρ`, so `ρ^{[1]} = ρ`
//! and the regularized first derivative uses the kernel itself.

mod iterate;
pub(crate) mod regularize;
mod schedule;

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::numerics::quad::{adaptive, composite_gauss};
use crate::numerics::{fd_weights, trapezoid, Grid1D};
use crate::{GfError, Result};

pub use iterate::{iterate_convolution, kernel_samples, norm_c_alpha, CAlphaTable, IteratedKernel};
pub use regularize::{
    convolve_spectral, kernel_multiplier, regularized_derivative, regularized_derivative_samples,
    Convolver,
};
pub use schedule::HSchedule;

/// Tolerance on `∫ρ = 1`.
pub const MASS_TOL: f64 = 1e-10;
/// Tolerance on vanishing moments.
pub const MOMENT_TOL: f64 = 1e-8;
/// Highest moment order probed for the moment-free kernel.
pub const MOMENT_PROBE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MollifierKind {
    Bump,
    MomentFree,
}

impl std::fmt::Display for MollifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MollifierKind::Bump => "bump",
            MollifierKind::MomentFree => "moment-free",
        })
    }
}

/// A normalized, real, even kernel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mollifier {
    pub kind: MollifierKind,
    /// Support radius (bump) or spectral cutoff (moment-free).
    pub parameter: f64,
    pub grid: Grid1D,
    pub samples: Vec<f64>,
    /// Nonnegative half of a symmetric ξ-grid covering the spectral support
    /// (or the bulk of it for the bump).
    pub xi: Vec<f64>,
    pub hat_samples: Vec<f64>,
    /// `∫ρ` measured on the samples.
    pub mass: f64,
    /// Largest `K` with `∫x^k ρ = 0` verified for every `1 ≤ k ≤ K`.
    pub moment_order: usize,
    /// Normalization of the bump profile on `[-1, 1]`.
    norm: f64,
}

/// `exp(-1/(1-y²))` on `|y| < 1`, zero outside.
pub fn bump_profile(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

/// `∫_{-1}^{1} exp(-1/(1-y²)) dy`.
pub fn bump_profile_mass() -> f64 {
    adaptive(bump_profile, -1.0, 1.0, 1e-16, 1e-15, 10_000)
        .expect("bump mass quadrature converges")
        .value
}

/// Smooth step: 0 for `y ≤ 0`, 1 for `y ≥ 1`, `C^∞` and flat at both ends.
pub fn smooth_step(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / y).exp();
        let b = (-1.0 / (1.0 - y)).exp();
        a / (a + b)
    }
}

/// Plateau profile: 1 on `|ξ| ≤ c`, 0 on `|ξ| ≥ 2c`.
pub fn plateau(xi: f64, cutoff: f64) -> f64 {
    1.0 - smooth_step((xi.abs() - cutoff) / cutoff)
}

pub fn build_bump(support_radius: f64) -> Result<Mollifier> {
    build_bump_on(support_radius, 1025)
}

/// Bump sampled with `points` nodes across its support.
pub fn build_bump_on(support_radius: f64, points: usize) -> Result<Mollifier> {
    if !(support_radius > 0.0 && support_radius.is_finite()) {
        return Err(GfError::invalid(format!(
            "support radius must be positive, got {support_radius}"
        )));
    }
    let grid = Grid1D::symmetric(support_radius, points)?;
    let interior = grid
        .coords()
        .iter()
        .filter(|x| x.abs() < support_radius)
        .count();
    if interior < 32 {
        return Err(GfError::Unresolved {
            what: "bump kernel".into(),
            detail: format!("{interior} interior points, need at least 32"),
        });
    }
    let norm = bump_profile_mass();
    let mut m = Mollifier {
        kind: MollifierKind::Bump,
        parameter: support_radius,
        grid: grid.clone(),
        samples: Vec::new(),
        xi: Vec::new(),
        hat_samples: Vec::new(),
        mass: 0.0,
        moment_order: 0,
        norm,
    };
    m.samples = grid.coords().iter().map(|&x| m.eval(x)).collect();
    m.mass = trapezoid(&m.samples, grid.spacing());
    if (m.mass - 1.0).abs() > MASS_TOL {
        return Err(GfError::Tolerance {
            what: "bump mass".into(),
            value: (m.mass - 1.0).abs(),
            tol: MASS_TOL,
        });
    }
    let dx = grid.spacing();
    let first: f64 = grid
        .coords()
        .iter()
        .zip(&m.samples)
        .map(|(x, r)| x * r)
        .sum::<f64>()
        * dx;
    m.moment_order = usize::from(first.abs() <= MOMENT_TOL);
    let xi_max = 64.0 / support_radius;
    m.xi = (0..=256).map(|k| xi_max * k as f64 / 256.0).collect();
    m.hat_samples = m.xi.iter().map(|&x| m.hat(x)).collect();
    Ok(m)
}

pub fn build_moment_free(spectral_cutoff: f64) -> Result<Mollifier> {
    if !(spectral_cutoff > 0.0 && spectral_cutoff.is_finite()) {
        return Err(GfError::invalid(format!(
            "spectral cutoff must be positive, got {spectral_cutoff}"
        )));
    }
    let c = spectral_cutoff;
    // the kernel decays like exp(-sqrt(2c|x|)); 256/c leaves mass error ~1e-11
    let half = 256.0 / c;
    let dx = 0.5 / c;
    let points = (2.0 * half / dx).round() as usize + 1;
    let grid = Grid1D::symmetric(half, points)?;
    let mut m = Mollifier {
        kind: MollifierKind::MomentFree,
        parameter: c,
        grid: grid.clone(),
        samples: Vec::new(),
        xi: Vec::new(),
        hat_samples: Vec::new(),
        mass: 0.0,
        moment_order: 0,
        norm: 1.0,
    };
    m.xi = (0..=256).map(|k| 2.0 * c * k as f64 / 256.0).collect();
    if m.xi.last().copied().unwrap_or(0.0) < 2.0 * c {
        return Err(GfError::Unresolved {
            what: "plateau".into(),
            detail: "ξ-grid misses [-2c, 2c]".into(),
        });
    }
    m.hat_samples = m.xi.iter().map(|&x| m.hat(x)).collect();
    m.samples = grid.coords().iter().map(|&x| m.eval(x)).collect();
    m.mass = trapezoid(&m.samples, dx);
    if (m.mass - 1.0).abs() > MASS_TOL {
        return Err(GfError::Tolerance {
            what: "moment-free mass".into(),
            value: (m.mass - 1.0).abs(),
            tol: MASS_TOL,
        });
    }
    m.moment_order = m
        .spectral_moments(MOMENT_PROBE)
        .iter()
        .take_while(|v| v.abs() <= MOMENT_TOL)
        .count();
    Ok(m)
}

impl Mollifier {
    /// Pointwise value `ρ(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            MollifierKind::Bump => bump_profile(x / self.parameter) / (self.norm * self.parameter),
            MollifierKind::MomentFree => {
                let c = self.parameter;
                let plateau_part = if x == 0.0 { c } else { (c * x).sin() / x };
                let ramp = self.ramp_integral(|xi| (x * xi).cos(), x.abs());
                (plateau_part + ramp) / PI
            }
        }
    }

    /// `ρ̂(ξ) = ∫ρ(x) e^{-ixξ} dx` (real since ρ is even).
    pub fn hat(&self, xi: f64) -> f64 {
        match self.kind {
            MollifierKind::MomentFree => plateau(xi, self.parameter),
            MollifierKind::Bump => {
                let k = (xi * self.parameter).abs();
                let points = ((8.0 * k) as usize).max(1024) | 1;
                let dy = 2.0 / (points - 1) as f64;
                let mut s = 0.0;
                for j in 1..points - 1 {
                    let y = -1.0 + dy * j as f64;
                    s += bump_profile(y) * (k * y).cos();
                }
                s * dy / self.norm
            }
        }
    }

    /// `Ψ(x) = ∫_{-∞}^x ρ`.
    pub fn cumulative(&self, x: f64) -> f64 {
        match self.kind {
            MollifierKind::Bump => {
                let y = x / self.parameter;
                if y <= -1.0 {
                    0.0
                } else if y >= 1.0 {
                    1.0
                } else if y <= 0.0 {
                    adaptive(bump_profile, -1.0, y, 1e-16, 1e-14, 10_000)
                        .map(|r| r.value)
                        .unwrap_or(f64::NAN)
                        / self.norm
                } else {
                    1.0 - adaptive(bump_profile, y, 1.0, 1e-16, 1e-14, 10_000)
                        .map(|r| r.value)
                        .unwrap_or(f64::NAN)
                        / self.norm
                }
            }
            MollifierKind::MomentFree => {
                // Ψ(x) = 1/2 + (1/π) ∫_0^{2c} ρ̂(ξ) sin(xξ)/ξ dξ
                let c = self.parameter;
                let sinc = |xi: f64| if xi == 0.0 { x } else { (x * xi).sin() / xi };
                let panels = 8 + (x.abs() * c) as usize;
                let (nodes, weights) = composite_gauss(&linspace(0.0, c, panels), 24);
                let flat: f64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&xi, w)| w * sinc(xi))
                    .sum();
                let ramp = self.ramp_integral(sinc, x.abs());
                0.5 + (flat + ramp) / PI
            }
        }
    }

    /// `∫_c^{2c} ρ̂(ξ) g(ξ) dξ` for the moment-free kernel.
    fn ramp_integral(&self, g: impl Fn(f64) -> f64, frequency: f64) -> f64 {
        let c = self.parameter;
        let panels = 16 + (frequency * c / 2.0) as usize;
        let (nodes, weights) = composite_gauss(&linspace(c, 2.0 * c, panels), 24);
        nodes
            .iter()
            .zip(&weights)
            .map(|(&xi, w)| w * plateau(xi, c) * g(xi))
            .sum()
    }

    /// `∫x^k ρ = i^k ρ̂^{(k)}(0)` for `k = 1..=k_max`, from finite differences of
    /// the spectral profile inside the plateau. Only meaningful for the
    /// moment-free kernel, whose profile is flat at 0.
    pub fn spectral_moments(&self, k_max: usize) -> Vec<f64> {
        let step = match self.kind {
            MollifierKind::MomentFree => self.parameter / 16.0,
            MollifierKind::Bump => 0.05 / self.parameter,
        };
        let nodes: Vec<f64> = (-6..=6).map(|j| j as f64 * step).collect();
        let w = fd_weights(0.0, &nodes, k_max);
        // weights of a derivative sum to zero, so subtracting ρ̂(0) removes the
        // constant exactly and the plateau contributes no round-off
        let center = self.hat(0.0);
        let vals: Vec<f64> = nodes.iter().map(|&x| self.hat(x) - center).collect();
        (1..=k_max)
            .map(|k| {
                let d: f64 = w[k].iter().zip(&vals).map(|(a, b)| a * b).sum();
                // i^k is ±1 for even k; odd derivatives of an even profile vanish
                if k % 4 == 2 {
                    -d
                } else {
                    d
                }
            })
            .collect()
    }

    /// Physical moment `∫x^k ρ` by trapezoid on the kernel samples.
    pub fn sampled_moment(&self, k: u32) -> f64 {
        let xs = self.grid.coords();
        let vals: Vec<f64> = xs
            .iter()
            .zip(&self.samples)
            .map(|(x, r)| x.powi(k as i32) * r)
            .collect();
        trapezoid(&vals, self.grid.spacing())
    }

    /// `ρ_s(x) = ρ(x/s)/s` sampled on `grid`; unit mass preserved.
    pub fn scale(&self, s: f64, grid: &Grid1D) -> Result<Vec<f64>> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(GfError::invalid(format!(
                "scale must lie in (0, 1], got {s}"
            )));
        }
        self.check_resolved(s, grid.spacing())?;
        Ok(grid
            .coords()
            .iter()
            .map(|&x| self.eval(x / s) / s)
            .collect())
    }

    /// The kernel `ρ_s` as a mollifier of the same kind.
    pub fn rescaled(&self, s: f64) -> Result<Mollifier> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(GfError::invalid(format!("scale must be positive, got {s}")));
        }
        match self.kind {
            MollifierKind::Bump => build_bump_on(self.parameter * s, self.grid.points),
            MollifierKind::MomentFree => build_moment_free(self.parameter / s),
        }
    }

    /// Length scale of the kernel: support radius, or `π/c` for the plateau.
    pub fn length_scale(&self) -> f64 {
        match self.kind {
            MollifierKind::Bump => self.parameter,
            MollifierKind::MomentFree => PI / self.parameter,
        }
    }

    /// Half-width beyond which `ρ_s` is treated as zero for support checks.
    pub fn effective_radius(&self, s: f64) -> f64 {
        match self.kind {
            MollifierKind::Bump => self.parameter * s,
            MollifierKind::MomentFree => 64.0 * s / self.parameter,
        }
    }

    /// Rejects scales whose kernel the spacing `dx` cannot resolve: at least 4
    /// cells per bump radius, or the scaled plateau inside the Nyquist band.
    pub fn check_resolved(&self, s: f64, dx: f64) -> Result<()> {
        let ok = match self.kind {
            MollifierKind::Bump => self.parameter * s >= 4.0 * dx,
            MollifierKind::MomentFree => 2.0 * self.parameter / s <= PI / dx,
        };
        if ok {
            Ok(())
        } else {
            Err(GfError::Unresolved {
                what: format!("{} kernel at scale {s:.3e}", self.kind),
                detail: format!("grid spacing {dx:.3e}"),
            })
        }
    }

    /// Writes `(x, rho)` and `(xi, rho_hat)` CSV files.
    pub fn export_csv(&self, rho_path: &Path, hat_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(rho_path)?;
        w.write_record(["x", "rho"])?;
        for (x, r) in self.grid.coords().iter().zip(&self.samples) {
            w.write_record([fmt17(*x), fmt17(*r)])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(hat_path)?;
        w.write_record(["xi", "rho_hat"])?;
        for (x, r) in self.xi.iter().zip(&self.hat_samples) {
            w.write_record([fmt17(*x), fmt17(*r)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fixed 17-significant-digit float formatting used by every CSV writer.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn linspace(a: f64, b: f64, panels: usize) -> Vec<f64> {
    (0..=panels)
        .map(|k| a + (b - a) * k as f64 / panels as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_normalized_even_and_positive() {
        let m = build_bump(1.0).unwrap();
        assert!((m.mass - 1.0).abs() < 1e-10);
        assert!(m.sampled_moment(1).abs() < 1e-12);
        assert!(m.sampled_moment(2) > 0.0);
        assert!(m.samples.iter().all(|&v| v >= 0.0));
        assert_eq!(m.moment_order, 1);
    }

    #[test]
    fn bump_rejects_coarse_grid() {
        assert!(build_bump_on(1.0, 20).is_err());
        assert!(build_bump(-1.0).is_err());
    }

    #[test]
    fn bump_hat_matches_forward_quadrature() {
        let m = build_bump(0.7).unwrap();
        for xi in [0.0, 1.0, 5.0, 30.0] {
            let oracle = adaptive(
                |x: f64| m.eval(x) * (x * xi).cos(),
                -0.7,
                0.7,
                1e-15,
                0.0,
                50_000,
            )
            .unwrap()
            .value;
            assert!((m.hat(xi) - oracle).abs() < 1e-12, "xi = {xi}");
        }
        assert!((m.hat(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moment_free_mass_and_moments() {
        let m = build_moment_free(1.0).unwrap();
        assert!((m.mass - 1.0).abs() < 1e-10);
        assert!((m.hat(0.0) - 1.0).abs() < 1e-15);
        assert!(m.moment_order >= 6);
        assert!(m.samples.iter().cloned().fold(f64::INFINITY, f64::min) < 0.0);
        // low physical moments are reachable on the sample grid
        assert!(m.sampled_moment(1).abs() < 1e-12);
        assert!(m.sampled_moment(2).abs() < 1e-6);
    }

    #[test]
    fn moment_free_eval_inverts_hat() {
        let m = build_moment_free(1.5).unwrap();
        for x in [0.0, 0.3, 2.0, 11.0] {
            let oracle = adaptive(
                |xi: f64| plateau(xi, 1.5) * (x * xi).cos(),
                0.0,
                3.0,
                1e-15,
                0.0,
                50_000,
            )
            .unwrap()
            .value
                / PI;
            assert!((m.eval(x) - oracle).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn cumulative_runs_from_zero_to_one() {
        for m in [build_bump(1.0).unwrap(), build_moment_free(1.0).unwrap()] {
            assert!((m.cumulative(0.0) - 0.5).abs() < 1e-12);
            let far = m.effective_radius(1.0) * 4.0;
            assert!(m.cumulative(-far).abs() < 1e-6);
            assert!((m.cumulative(far) - 1.0).abs() < 1e-6);
            let h = 1e-4;
            let d = (m.cumulative(0.3 + h) - m.cumulative(0.3 - h)) / (2.0 * h);
            assert!((d - m.eval(0.3)).abs() < 1e-6);
        }
    }

    #[test]
    fn scale_preserves_mass_and_peak() {
        let m = build_bump(1.0).unwrap();
        let g = Grid1D::symmetric(0.2, 2001).unwrap();
        let s = m.scale(0.1, &g).unwrap();
        assert!((trapezoid(&s, g.spacing()) - 1.0).abs() < 1e-10);
        assert!((s[1000] - m.eval(0.0) / 0.1).abs() < 1e-9);
        let g1 = m.grid.clone();
        let id = m.scale(1.0, &g1).unwrap();
        assert!(id
            .iter()
            .zip(&m.samples)
            .all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(m.scale(0.0005, &g).is_err());
    }
}

//! Colombeau generalized functions realized as ε-nets of sampled smooth
//! functions, and the numerical machinery built on them for Mizohata-type
//! equations `∂_t u + i b(t) ∂_x u = f`:
//!
//! * [`gf`]: ε-ladders, nets, moderateness and negligibility estimators,
//!   pairings and (local) association with distributions.
//! * [`mollifier`]: compactly supported and moment-free kernels, their
//!   scalings, iterated convolutions, the norms `c_α` and the regularized
//!   derivative.
//! * [`numerics`]: grids, Fourier transforms, quadrature, finite
//!   differences, Taylor-coefficient analyticity diagnostics.
//! * [`mizohata`]: the explicit distributional construction: branch
//!   solutions in `(t, ξ)`, the jump at `t = 0`, the obstruction `Kf`, the
//!   corrector and the assembled solution.
//! * [`cauchy`]: the regularized Cauchy problem, its growth constant and the
//!   `e^{C h(ε)^{-m}} = O(ε^{-p})` gate, with an exact integrating-factor
//!   solver and a pseudo-spectral RK4 fallback.
//! * [`bridge`]: experiments tying the regularized solution back to the
//!   distributional one through local association.
//! * [`cli`]: scenario configs, the `gfkit` subcommands and on-disk reports.
//!
//! Fourier convention used everywhere: `f̂(ξ) = ∫ f(x) e^{-ixξ} dx`, inverse
//! `f(x) = (1/2π) ∫ f̂(ξ) e^{ixξ} dξ`.

pub mod bridge;
pub mod cauchy;
pub mod cli;
mod error;
pub mod gf;
pub mod mizohata;
pub mod mollifier;
pub mod numerics;

pub use error::{GfError, Result};

pub use num_complex::Complex64;

/// Human-readable statement of the transform convention, written into every
/// manifest.
pub const FOURIER_CONVENTION: &str =
    "fhat(xi) = int f(x) exp(-i x xi) dx; f(x) = (1/2pi) int fhat(xi) exp(i x xi) dxi";

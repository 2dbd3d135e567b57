//! The distributional construction for `M u = ∂_t u + i b(t) ∂_x u = f`.
//!
//! In transform space each mode solves `∂_t û − b(t)ξ û = f̂`. The branch
//! solution integrates from `t = 0` for `ξ < 0` and from `t = ±∞` for `ξ > 0`,
//! so that every exponent `(B(t) − B(s))ξ` stays non-positive. The price is a
//! jump at `t = 0` whose inverse transform is `−Kf/(2π)`. When `Kf` extends
//! holomorphically, the corrector `v` built from its Taylor series removes the
//! jump and `w = u + H(t) Kf/(2π) − v` solves `M w = f` near the origin.

mod assemble;
mod branch;
pub(crate) mod coefficient;
mod corrector;
mod kf;
mod source;

pub use assemble::*;
pub use branch::{jump_at_zero, ode_residual, solve_hat, Branch, BranchSolution, EXPONENT_SLACK};
pub use coefficient::{validate_coefficient, CoefficientB, CoefficientRecord, CoefficientSpec};
pub use corrector::{corrector_closed_form, corrector_v, CorrectorField};
pub use kf::{
    compute_kf, compute_kf_damped, damped_limit, DampedLimit, GridKf, KfOptions, KfProfile,
    TaylorSeries, COEFF_FLOOR, DEFAULT_N_MAX, KF_NORMALIZATION, KF_SCALE,
};
pub use source::{
    solver_grid, GridSource, SeparableSource, SeparableTerm, Source, SourceF, SpaceProfile,
    TimeProfile, SOURCE_TAIL_TOL,
};

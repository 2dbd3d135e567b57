//! Shared numerical engines: grids, Fourier transforms on grids, quadrature,
//! finite-difference stencils, least-squares fits and Taylor-coefficient
//! analyticity diagnostics.

pub mod fd;
pub mod fit;
pub mod fourier;
pub mod grid;
pub mod quad;
pub mod taylor;

pub use fd::{derivative_1d, fd_weights, Stencil};
pub use fit::{linear_fit, quadratic_curvature, LinearFit};
pub use fourier::{forward_x_transform, SpectralPlan, TransformedField};
pub use grid::{Grid1D, Grid2D, GridSpec, Window};
pub use quad::{
    adaptive, gauss_legendre, quad, trapezoid, trapezoid_2d, CompensatedSum, QuadResult,
};
pub use taylor::{
    classify_analyticity, classify_with_floor, AnalyticityReport, AnalyticityVerdict,
};

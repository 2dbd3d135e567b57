//! The regularized Cauchy problem `∂_t u + Σ_{α ≤ m} a_α ∂̃^α u = f` in the
//! algebra of global generalized functions, with `∂̃^α` the derivative
//! convolved with `ρ^{[α]}_{h(ε)}`. The gate checks `e^{C h(ε)^{-m}} =
//! O(ε^{-p})` for `C = Σ_α c_α sup|a_α|` before anything is solved.

mod gate;
mod problem;
mod solve;

pub use gate::{check_h_condition, growth_constant, GateRow, GrowthReport, GATE_SLOPE_TOL};
pub use problem::{CauchyProblem, CoefficientField, InitialData, SumSource};
pub use solve::{
    c_alpha_values, growth_report, mizohata_reg_solve, solve_regularized, symbols,
    uniqueness_probe, EpsRecord, GateMode, GeneralizedSolution, RegOptions, ResidualKind,
    SolverMethod, UniquenessReport, BOUNDARY_TOL, MAX_COURANT, RESIDUAL_TOL,
};

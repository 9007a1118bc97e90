//! Grid solvers for the discounted Hamilton-Jacobi-Bellman equation.
//!
//! Values are marched backward from a truncation horizon `T` with the
//! semi-Lagrangian recursion
//!
//! ```text
//! V(x, t) = min_u [ L(x,u,t) dt + K(dt) V(x + f(x,u,t) dt, t + dt) ]
//! ```
//!
//! where `K(dt)` is `e^{λ dt}` for exponential discounting and
//! `E_α(λ dt^α)` for the fractional kernel. For `α < 1` the solver also
//! reports how well the solved field satisfies the PDE with the memory term
//! `−λ A(α) ∂^{1−α}V/∂t^{1−α}` (see [`pde_residual`]).
//!
//! Nodes of a time slice are updated in parallel; slices are sequential.

mod cost;
mod grid;
mod lqr;
mod problem;
mod solver;

pub use cost::{evaluate_cost, ControlLaw, PolicyLaw, ESCAPE_FACTOR};
pub use grid::{Boundary, Grid, MAX_DIM};
pub use lqr::lqr_oracle;
pub use problem::{ControlProblem, Dynamics, RunningCost, SolverConfig, TerminalValue};
pub use solver::{
    bellman_residual, discount_factor, min_hamiltonian, pde_residual, pre_hamiltonian, solve_classical, solve_fractional,
    Policy, ResidualField, Solution, ValueField,
};

/// Backward march with an explicit per-step factor, bypassing the discount
/// spec. Exposed for comparing update laws.
pub fn march_with_factor(prob: &ControlProblem, cfg: &SolverConfig, factor: f64) -> crate::Result<(ValueField, Policy)> {
    solver::march(prob, cfg, factor)
}

//! Finite-difference solver for the nonlinear Dirichlet problem
//!
//! ```text
//! ẍ(t) = f(t, x(t)) + v(t),   x(0) = x(1) = 0
//! ```
//!
//! discretised on `N` subintervals as
//! `Δ²x(k-1) = f(k/N, x(k))/N² + v(k/N)/N²`, `x(0) = x(N) = 0`.
//!
//! The crate checks the hypotheses under which the discrete system has a
//! unique solution (`|f| ≤ A|x| + B` with `A < 1`, `inf f_x > -1`), solves
//! it by damped Newton on the tridiagonal linearisation, and measures how
//! the discrete solutions approach the continuous one as `N` grows.
//!
//! Modules, bottom up:
//!
//! - [`grid`]: grid functions in `E_N`, differences, and the four norms.
//! - [`expr`]: parser, evaluator and symbolic derivative for `f`, `v`, `x*`.
//! - [`problem`]: [`ProblemSpec`], condition checks, classification, a-priori bound.
//! - [`discrete_op`]: `D_N`, residual, Jacobian, tridiagonal solve, `Φ_N`.
//! - [`solver`]: damped Newton and multi-start uniqueness checks.
//! - [`convergence`]: manufactured solutions and refinement studies.
//! - [`corpus`]: built-in example problems.
//! - [`cli`]: config files, CSV output and the command-line driver.

pub mod cli;
pub mod convergence;
pub mod corpus;
pub mod discrete_op;
pub mod expr;
pub mod grid;
pub mod problem;
pub mod solver;

pub use convergence::{
    manufacture, run_study, ConvergenceTable, ManufacturedProblem, StudyProblem,
};
pub use expr::{parse, Expr, Var};
pub use grid::{GridFunction, Norms};
pub use problem::{Constants, ProblemSpec};
pub use solver::{newton_solve, SolveReport, SolveStatus, SolverConfig};

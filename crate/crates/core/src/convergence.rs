//! Grid-refinement studies against a known continuous solution.
//!
//! A manufactured problem fixes `x*` first and sets `v = ẍ* - f(t, x*)`,
//! so the continuous solution is known exactly. Plain problems are compared
//! against a fine-grid solve restricted to the coarse nodes.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{DiffError, EvalError, Expr, Var};
use crate::grid::GridFunction;
use crate::problem::{Constants, ProblemError, ProblemSpec};
use crate::solver::{newton_solve, SolveReport, SolverConfig, SolverError};

/// Fine reference grid is `REF_FACTOR * max(Ns)` for plain problems.
pub const REF_FACTOR: usize = 8;

const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("x* must vanish at t=0 and t=1, got x*(0)={at_zero}, x*(1)={at_one}")]
    BoundaryViolation { at_zero: f64, at_one: f64 },
    #[error("x* must depend on t only")]
    SolutionDependsOnX,
    #[error("x* is not twice differentiable: {0}")]
    NotDifferentiable(#[from] DiffError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("grid sizes must be at least 2 and strictly increasing, got {0:?}")]
    InvalidSizes(Vec<usize>),
    #[error("N = {n} does not divide the reference grid size {n_ref}")]
    NotNested { n: usize, n_ref: usize },
    #[error("studies start every solve from zero; drop the initial guess")]
    InitialGuessGiven,
    #[error("reference solve on N = {n_ref} failed: {source}")]
    ReferenceSetup { n_ref: usize, source: SolverError },
    #[error("reference solve on N = {n_ref} ended with status {status:?}")]
    ReferenceFailed {
        n_ref: usize,
        status: crate::solver::SolveStatus,
    },
    #[error("solve failed at N = {failed_n}; {} rows completed", partial.rows.len())]
    SolveFailed {
        partial: ConvergenceTable,
        failed_n: usize,
        report: Option<Box<SolveReport>>,
        detail: String,
    },
    #[error("empty table")]
    EmptyTable,
}

/// A problem whose continuous solution is `x_star`.
#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    pub spec: ProblemSpec,
    pub x_star: Expr,
}

/// Builds the forcing `v = ẍ* - f(t, x*(t))` symbolically.
pub fn manufacture(
    f: &Expr,
    x_star: &Expr,
    constants: Constants,
) -> Result<ManufacturedProblem, StudyError> {
    if x_star.depends_on(Var::X) {
        return Err(StudyError::SolutionDependsOnX);
    }
    let at_zero = x_star.eval(0.0, 0.0)?;
    let at_one = x_star.eval(1.0, 0.0)?;
    if at_zero.abs() > BOUNDARY_TOL || at_one.abs() > BOUNDARY_TOL {
        return Err(StudyError::BoundaryViolation { at_zero, at_one });
    }
    let accel = x_star.diff(Var::T)?.diff(Var::T)?;
    let v = Expr::binary(crate::expr::BinOp::Sub, accel, f.substitute(Var::X, x_star));
    let spec = ProblemSpec::new(f.clone(), v, constants)?;
    Ok(ManufacturedProblem {
        spec,
        x_star: x_star.clone(),
    })
}

#[derive(Debug, Clone)]
pub enum StudyProblem {
    Manufactured(ManufacturedProblem),
    Plain(ProblemSpec),
}

impl StudyProblem {
    pub fn spec(&self) -> &ProblemSpec {
        match self {
            StudyProblem::Manufactured(m) => &m.spec,
            StudyProblem::Plain(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Manufactured,
    FineGrid { n_ref: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `max_k |x*(k/N) - x_N(k)|`
    pub sup_error: f64,
    /// `log(e_prev / e) / log(N / N_prev)`; absent on the first row or
    /// when either error is zero.
    pub empirical_order: Option<f64>,
    /// `max_k N |Δx_N(k-1)|`
    pub derivative_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub problem_id: String,
    pub provenance: Provenance,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn sup_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sup_error).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].sup_error < w[0].sup_error)
    }
}

fn derivative_bound(x: &GridFunction) -> f64 {
    let n = x.n() as f64;
    x.forward_difference()
        .iter()
        .fold(0.0, |m, d| m.max(n * d.abs()))
}

fn order(prev: &ConvergenceRow, n: usize, err: f64) -> Option<f64> {
    if prev.sup_error > 0.0 && err > 0.0 {
        Some((prev.sup_error / err).ln() / (n as f64 / prev.n as f64).ln())
    } else {
        None
    }
}

/// Solves on every `N` in `ns` and tabulates the error against the
/// continuous solution (or its fine-grid proxy).
///
/// Solves for different `N` run concurrently; rows are assembled in
/// increasing `N`. On a failed solve the error carries the rows completed
/// before it.
pub fn run_study(
    problem: &StudyProblem,
    problem_id: &str,
    ns: &[usize],
    cfg: &SolverConfig,
) -> Result<ConvergenceTable, StudyError> {
    if ns.is_empty() || ns[0] < 2 || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(StudyError::InvalidSizes(ns.to_vec()));
    }
    if cfg.initial_guess.is_some() {
        return Err(StudyError::InitialGuessGiven);
    }
    let spec = problem.spec();

    let (provenance, fine) = match problem {
        StudyProblem::Manufactured(_) => (Provenance::Manufactured, None),
        StudyProblem::Plain(_) => {
            let n_ref = REF_FACTOR * ns[ns.len() - 1];
            if let Some(&n) = ns.iter().find(|&&n| !n_ref.is_multiple_of(n)) {
                return Err(StudyError::NotNested { n, n_ref });
            }
            let report = newton_solve(spec, n_ref, cfg)
                .map_err(|source| StudyError::ReferenceSetup { n_ref, source })?;
            if !report.converged() {
                return Err(StudyError::ReferenceFailed {
                    n_ref,
                    status: report.status,
                });
            }
            (Provenance::FineGrid { n_ref }, Some(report.solution))
        }
    };

    let outcomes: Vec<Result<SolveReport, SolverError>> =
        ns.par_iter().map(|&n| newton_solve(spec, n, cfg)).collect();

    let mut table = ConvergenceTable {
        problem_id: problem_id.to_string(),
        provenance,
        rows: Vec::with_capacity(ns.len()),
    };
    for (&n, outcome) in ns.iter().zip(outcomes) {
        let report = match outcome {
            Ok(r) if r.converged() => r,
            Ok(r) => {
                let detail = format!("status {:?}", r.status);
                return Err(StudyError::SolveFailed {
                    partial: table,
                    failed_n: n,
                    report: Some(Box::new(r)),
                    detail,
                });
            }
            Err(e) => {
                return Err(StudyError::SolveFailed {
                    partial: table,
                    failed_n: n,
                    report: None,
                    detail: e.to_string(),
                })
            }
        };
        let x = &report.solution;
        let mut sup_error = 0.0f64;
        for k in 0..=n {
            let exact = match (problem, &fine) {
                (StudyProblem::Manufactured(m), _) => m.x_star.eval(x.node(k), 0.0)?,
                (_, Some(reference)) => reference.values()[k * (reference.n() / n)],
                (StudyProblem::Plain(_), None) => {
                    unreachable!("plain problems always have a reference")
                }
            };
            sup_error = sup_error.max((exact - x.values()[k]).abs());
        }
        let empirical_order = table.rows.last().and_then(|prev| order(prev, n, sup_error));
        table.rows.push(ConvergenceRow {
            n,
            sup_error,
            empirical_order,
            derivative_bound: derivative_bound(x),
        });
    }
    Ok(table)
}

/// Largest `max_k N|Δx_N(k-1)|` over the table's rows.
pub fn derivative_bound_check(table: &ConvergenceTable) -> Result<f64, StudyError> {
    if table.rows.is_empty() {
        return Err(StudyError::EmptyTable);
    }
    Ok(table
        .rows
        .iter()
        .fold(0.0, |m, r| m.max(r.derivative_bound)))
}

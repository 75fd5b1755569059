//! Damped Newton iteration for the discrete problem.
//!
//! Each step solves `J h = -r` with the tridiagonal Jacobian and backtracks
//! on the merit `½‖r‖²` until the Armijo condition holds. Along the Newton
//! direction the merit's slope is exactly `-‖r‖²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::discrete_op::{jacobian, residual, solve_tridiagonal, OperatorError, Residual};
use crate::grid::{GridError, GridFunction};
use crate::problem::ProblemSpec;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub min_step: f64,
    /// Starting point; `None` means the zero function.
    pub initial_guess: Option<GridFunction>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            min_step: 1e-14,
            initial_guess: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |what: &str| Err(SolverError::InvalidConfig(what.to_string()));
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if !(self.min_step > 0.0 && self.min_step <= 1.0) {
            return bad("min_step must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    SingularJacobian,
    EvalError,
    /// Backtracking shrank the step below `min_step` without satisfying Armijo.
    LineSearchFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub iteration: usize,
    /// Residual norm after this iteration's step.
    pub residual_norm: f64,
    /// Accepted step length; 0 for the initial entry.
    pub step_length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: GridFunction,
    pub n: usize,
    pub residual_norm: f64,
    /// Stopping threshold actually applied to the residual norm.
    pub tolerance: f64,
    pub iterations: usize,
    pub step_trace: Vec<StepRecord>,
    pub status: SolveStatus,
    /// Failure detail when `status` is not `Converged`.
    pub message: Option<String>,
    /// Seed of the random initial guess, when one was used.
    pub seed: Option<u64>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("initial guess has N = {got}, expected {expected}")]
    GuessMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("multi-start needs at least 2 starts and a finite, nonnegative amplitude")]
    InvalidStarts,
    #[error("start {start} ended with status {:?}: {}", report.status, report.message.as_deref().unwrap_or(""))]
    StartFailed {
        start: usize,
        report: Box<SolveReport>,
    },
}

/// `½ ‖residual‖²`.
pub fn merit(spec: &ProblemSpec, x: &GridFunction) -> Result<f64, OperatorError> {
    let r = residual(spec, x)?;
    Ok(0.5 * r.norm * r.norm)
}

/// Gradient of [`merit`] with respect to the interior values, `Jᵀ r`.
pub fn merit_gradient(spec: &ProblemSpec, x: &GridFunction) -> Result<Vec<f64>, OperatorError> {
    let r = residual(spec, x)?;
    Ok(jacobian(spec, x)?.transpose().matvec(&r.vector))
}

/// `tol · (1 + sup_k |v(k/N)| · √N / N²)`; residual entries scale like `1/N²`.
pub fn stopping_tolerance(spec: &ProblemSpec, n: usize, tol: f64) -> Result<f64, OperatorError> {
    let v_sup = spec.v_sup_on_grid(n)?;
    let nf = n as f64;
    Ok(tol * (1.0 + v_sup * nf.sqrt() / (nf * nf)))
}

/// Solves the discrete problem on `N = n` subintervals.
///
/// Configuration and dimension problems are errors; numerical outcomes,
/// including failures, come back in the report's `status`.
pub fn newton_solve(
    spec: &ProblemSpec,
    n: usize,
    cfg: &SolverConfig,
) -> Result<SolveReport, SolverError> {
    cfg.validate()?;
    let mut x = match &cfg.initial_guess {
        Some(g) if g.n() != n => {
            return Err(SolverError::GuessMismatch {
                expected: n,
                got: g.n(),
            })
        }
        Some(g) => g.clone(),
        None => GridFunction::zeros(n)?,
    };
    let tolerance = stopping_tolerance(spec, n, cfg.tol)?;
    let mut report = SolveReport {
        solution: x.clone(),
        n,
        residual_norm: f64::NAN,
        tolerance,
        iterations: 0,
        step_trace: Vec::new(),
        status: SolveStatus::MaxIter,
        message: None,
        seed: None,
    };
    let fail = |mut report: SolveReport, x: GridFunction, status, message: String| {
        report.solution = x;
        report.status = status;
        report.message = Some(message);
        Ok(report)
    };

    let mut r: Residual = match residual(spec, &x) {
        Ok(r) => r,
        Err(e) => return fail(report, x, SolveStatus::EvalError, e.to_string()),
    };
    report.step_trace.push(StepRecord {
        iteration: 0,
        residual_norm: r.norm,
        step_length: 0.0,
    });

    let mut iteration = 0;
    while r.norm > tolerance && iteration < cfg.max_iter {
        iteration += 1;
        report.iterations = iteration;
        report.residual_norm = r.norm;
        let j = match jacobian(spec, &x) {
            Ok(j) => j,
            Err(e) => return fail(report, x, SolveStatus::EvalError, e.to_string()),
        };
        let neg_r: Vec<f64> = r.vector.iter().map(|v| -v).collect();
        let step = match solve_tridiagonal(&j, &neg_r) {
            Ok(h) => GridFunction::from_interior(n, &h)?,
            Err(e @ OperatorError::Singular { .. }) => {
                return fail(report, x, SolveStatus::SingularJacobian, e.to_string())
            }
            Err(e) => return Err(e.into()),
        };

        let merit0 = 0.5 * r.norm * r.norm;
        let slope = r.norm * r.norm;
        let mut alpha = 1.0;
        let accepted = loop {
            let trial = x.axpy(alpha, &step);
            // Evaluation failures at a trial point count as rejections.
            if let Ok(rt) = residual(spec, &trial) {
                if 0.5 * rt.norm * rt.norm <= merit0 - cfg.armijo_c * alpha * slope {
                    break Some((trial, rt));
                }
            }
            alpha *= cfg.backtrack_factor;
            if alpha < cfg.min_step {
                break None;
            }
        };
        let Some((trial, rt)) = accepted else {
            let msg = format!(
                "no acceptable step at iteration {iteration}, residual {:e}",
                r.norm
            );
            return fail(report, x, SolveStatus::LineSearchFailed, msg);
        };
        x = trial;
        r = rt;
        report.step_trace.push(StepRecord {
            iteration,
            residual_norm: r.norm,
            step_length: alpha,
        });
    }

    report.residual_norm = r.norm;
    report.solution = x;
    if r.norm <= tolerance {
        report.status = SolveStatus::Converged;
    } else {
        report.status = SolveStatus::MaxIter;
        report.message = Some(format!(
            "residual {:e} above {:e} after {} iterations",
            r.norm, tolerance, cfg.max_iter
        ));
    }
    Ok(report)
}

/// Seeded random starting points with interior values uniform in
/// `[-amplitude, amplitude]`.
pub fn random_guesses(
    n: usize,
    starts: usize,
    amplitude: f64,
    seed: u64,
) -> Result<Vec<GridFunction>, GridError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..starts)
        .map(|_| {
            GridFunction::from_fn(n, |_| {
                if amplitude > 0.0 {
                    rng.gen_range(-amplitude..=amplitude)
                } else {
                    0.0
                }
            })
        })
        .collect()
}

/// Runs Newton from `starts` seeded random guesses and returns every report,
/// in start order. Any non-converged start is an error naming that start.
pub fn multi_start(
    spec: &ProblemSpec,
    n: usize,
    cfg: &SolverConfig,
    starts: usize,
    amplitude: f64,
    seed: u64,
) -> Result<Vec<SolveReport>, SolverError> {
    if starts < 2 || !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(SolverError::InvalidStarts);
    }
    let guesses = random_guesses(n, starts, amplitude, seed)?;
    let reports: Vec<SolveReport> = guesses
        .into_par_iter()
        .map(|guess| {
            let cfg = SolverConfig {
                initial_guess: Some(guess),
                ..cfg.clone()
            };
            newton_solve(spec, n, &cfg).map(|mut r| {
                r.seed = Some(seed);
                r
            })
        })
        .collect::<Result<_, _>>()?;
    if let Some(start) = reports.iter().position(|r| !r.converged()) {
        return Err(SolverError::StartFailed {
            start,
            report: Box::new(reports[start].clone()),
        });
    }
    Ok(reports)
}

/// Largest pairwise sup-norm distance between the multi-start solutions.
pub fn multi_start_uniqueness(
    spec: &ProblemSpec,
    n: usize,
    cfg: &SolverConfig,
    starts: usize,
    amplitude: f64,
    seed: u64,
) -> Result<f64, SolverError> {
    let reports = multi_start(spec, n, cfg, starts, amplitude, seed)?;
    let mut worst = 0.0f64;
    for (i, a) in reports.iter().enumerate() {
        for b in &reports[i + 1..] {
            worst = worst.max(a.solution.sup_distance(&b.solution));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{apriori_bound, Constants};

    const F1: &str = "(t + sin(x))/(2*x^2 + 4)";

    fn spec(f: &str, v: &str) -> ProblemSpec {
        ProblemSpec::parse(f, v, Constants::new(0.1, 0.5, -0.25)).unwrap()
    }

    #[test]
    fn merit_examples() {
        let s = spec("x^3", "1");
        let z = GridFunction::zeros(10).unwrap();
        assert!((merit(&s, &z).unwrap() - 4.5e-4).abs() < 1e-18);
        assert_eq!(merit(&s, &z).unwrap(), merit(&s, &z).unwrap());

        let s = spec("0", "2");
        let report = newton_solve(&s, 10, &SolverConfig::default()).unwrap();
        assert!(merit(&s, &report.solution).unwrap() < 1e-28);
    }

    #[test]
    fn merit_gradient_examples() {
        let s = spec("0", "2");
        let exact =
            GridFunction::from_fn(10, |k| ((k * k) as f64 - 10.0 * k as f64) / 100.0).unwrap();
        assert!(merit_gradient(&s, &exact)
            .unwrap()
            .iter()
            .all(|g| g.abs() < 1e-14));

        let x = GridFunction::from_interior(5, &[0.3, -1.0, 2.0, 0.7]).unwrap();
        let r = residual(&s, &x).unwrap();
        let jr = jacobian(&s, &x).unwrap().matvec(&r.vector);
        assert_eq!(merit_gradient(&s, &x).unwrap(), jr);
    }

    #[test]
    fn merit_gradient_matches_centred_differences() {
        let s = spec(F1, "1");
        let x = GridFunction::from_interior(8, &[0.3, -1.0, 2.0, 0.7, -0.4, 1.1, 0.2]).unwrap();
        let g = merit_gradient(&s, &x).unwrap();
        let eps = 1e-6;
        for i in 0..7 {
            let mut e = vec![0.0; 7];
            e[i] = 1.0;
            let dir = GridFunction::from_interior(8, &e).unwrap();
            let up = merit(&s, &x.axpy(eps, &dir)).unwrap();
            let down = merit(&s, &x.axpy(-eps, &dir)).unwrap();
            let fd = (up - down) / (2.0 * eps);
            assert!(
                (fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1e-3),
                "{i}: {fd} vs {}",
                g[i]
            );
        }
    }

    #[test]
    fn linear_problem_takes_one_step() {
        let s = spec("0", "2");
        let report = newton_solve(&s, 10, &SolverConfig::default()).unwrap();
        assert!(report.converged());
        assert_eq!(report.iterations, 1);
        for k in 0..=10 {
            let expected = ((k * k) as f64 - 10.0 * k as f64) / 100.0;
            assert!((report.solution.values()[k] - expected).abs() < 1e-14);
        }
        assert_eq!(report.step_trace.len(), 2);
        assert_eq!(report.step_trace[1].step_length, 1.0);
    }

    #[test]
    fn zero_forcing_with_vanishing_f_gives_zero() {
        let s = spec("0.5*sin(x)*exp(t)", "0");
        let report = newton_solve(&s, 25, &SolverConfig::default()).unwrap();
        assert!(report.converged());
        assert_eq!(report.iterations, 0);
        assert!(report.solution.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn f1_converges_within_bound() {
        let s = spec(F1, "1");
        let report = newton_solve(&s, 100, &SolverConfig::default()).unwrap();
        assert!(report.converged());
        assert!(report.residual_norm <= report.tolerance);
        let m = apriori_bound(&s, 1.0).unwrap();
        assert!(report.solution.sup_norm() <= m);
    }

    #[test]
    fn accepted_steps_decrease_merit() {
        let s = spec(F1, "1");
        let guess = random_guesses(40, 1, 10.0, 99).unwrap().pop().unwrap();
        let cfg = SolverConfig {
            initial_guess: Some(guess),
            ..Default::default()
        };
        let report = newton_solve(&s, 40, &cfg).unwrap();
        assert!(report.converged());
        for w in report.step_trace.windows(2) {
            assert!(w[1].residual_norm < w[0].residual_norm);
        }
    }

    #[test]
    fn failure_statuses() {
        // f_x = -2N² makes the first Jacobian row vanish at N = 4.
        let s = ProblemSpec::parse("-32*x", "1", Constants::new(0.1, 0.5, -40.0)).unwrap();
        let report = newton_solve(&s, 4, &SolverConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::SingularJacobian);
        assert!(report.message.is_some());

        let s = spec("1/(x - 0.5)", "1");
        let guess = GridFunction::from_interior(4, &[0.5, 0.0, 0.0]).unwrap();
        let cfg = SolverConfig {
            initial_guess: Some(guess),
            ..Default::default()
        };
        assert_eq!(
            newton_solve(&s, 4, &cfg).unwrap().status,
            SolveStatus::EvalError
        );

        let s = spec(F1, "1");
        let cfg = SolverConfig {
            max_iter: 1,
            initial_guess: Some(random_guesses(30, 1, 50.0, 1).unwrap().pop().unwrap()),
            ..Default::default()
        };
        let report = newton_solve(&s, 30, &cfg).unwrap();
        assert_eq!(report.status, SolveStatus::MaxIter);
        assert!(report.residual_norm > report.tolerance);
    }

    #[test]
    fn configuration_errors() {
        let s = spec("0", "1");
        let cfg = SolverConfig {
            armijo_c: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            newton_solve(&s, 10, &cfg),
            Err(SolverError::InvalidConfig(_))
        ));
        let cfg = SolverConfig {
            initial_guess: Some(GridFunction::zeros(5).unwrap()),
            ..Default::default()
        };
        assert!(matches!(
            newton_solve(&s, 10, &cfg),
            Err(SolverError::GuessMismatch {
                expected: 10,
                got: 5
            })
        ));
        assert!(matches!(
            multi_start_uniqueness(&s, 10, &SolverConfig::default(), 1, 1.0, 0),
            Err(SolverError::InvalidStarts)
        ));
    }

    #[test]
    fn multi_start_examples() {
        let cfg = SolverConfig::default();
        let d = multi_start_uniqueness(&spec(F1, "1"), 50, &cfg, 5, 10.0, 42).unwrap();
        assert!(d <= 1e-8, "{d}");

        let d = multi_start_uniqueness(&spec("0", "2"), 30, &cfg, 6, 100.0, 1).unwrap();
        assert!(d <= 1e-12, "{d}");

        assert_eq!(
            multi_start_uniqueness(&spec(F1, "1"), 20, &cfg, 2, 0.0, 5).unwrap(),
            0.0
        );

        let a = multi_start(&spec(F1, "1"), 20, &cfg, 3, 4.0, 8).unwrap();
        let b = multi_start(&spec(F1, "1"), 20, &cfg, 3, 4.0, 8).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.solution, rb.solution);
            assert_eq!(ra.seed, Some(8));
        }
    }
}

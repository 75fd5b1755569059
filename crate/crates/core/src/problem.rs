//! Problem definition `Δ²x(k-1) = f(k/N, x(k))/N² + v(k/N)/N²` and the
//! hypothesis checks that guarantee unique solvability.
//!
//! The growth condition `|f(t,x)| ≤ A|x| + B` and the lower bound on `f_x`
//! are stated on all of `[0,1] × ℝ`. Here they are sampled on a box, so a
//! clean report is evidence, not proof.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{self, DiffError, EvalError, Expr, Var};

/// Default sampling density in `t` for the condition checks.
pub const DEFAULT_SAMPLES_T: usize = 201;
/// Default sampling density in `x` for the condition checks.
pub const DEFAULT_SAMPLES_X: usize = 2001;
/// Sampling half-width used when the a-priori bound is unavailable (`A ≥ 1`).
pub const FALLBACK_X_RANGE: f64 = 10.0;

/// Comparisons against declared bounds forgive this much relative roundoff.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("constant {name} must be positive and finite, got {value}")]
    NonPositiveConstant { name: &'static str, value: f64 },
    #[error("constant {name} must be finite, got {value}")]
    NonFiniteConstant { name: &'static str, value: f64 },
    #[error("v must depend on t only")]
    VDependsOnX,
    #[error("cannot derive f_x: {0}")]
    Diff(#[from] DiffError),
    #[error(
        "f_x disagrees with a finite difference of f at t={t}, x={x}: symbolic {symbolic}, numeric {numeric}"
    )]
    FxMismatch {
        t: f64,
        x: f64,
        symbolic: f64,
        numeric: f64,
    },
    #[error("cannot parse {field}: {source}")]
    Parse {
        field: &'static str,
        source: expr::ParseError,
    },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("sampling needs x_range > 0 and at least 2 samples per axis")]
    InvalidSampling,
    #[error("a-priori bound undefined for A = {0} (needs A < 1)")]
    BoundUndefined(f64),
}

/// User-declared constants for the growth condition and the `f_x` bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// Growth slope `A` in `|f(t,x)| ≤ A|x| + B`.
    pub a: f64,
    /// Growth offset `B`.
    pub b: f64,
    /// Declared lower bound on `f_x` over `[0,1] × ℝ`.
    pub fx_lower: f64,
}

impl Constants {
    pub fn new(a: f64, b: f64, fx_lower: f64) -> Self {
        Self { a, b, fx_lower }
    }

    fn validate(&self) -> Result<(), ProblemError> {
        for (name, value) in [("A", self.a), ("B", self.b)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ProblemError::NonPositiveConstant { name, value });
            }
        }
        if !self.fx_lower.is_finite() {
            return Err(ProblemError::NonFiniteConstant {
                name: "fx_lower",
                value: self.fx_lower,
            });
        }
        Ok(())
    }
}

/// A validated problem: nonlinearity `f(t,x)`, its partial `f_x`, forcing `v(t)`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    f: Expr,
    fx: Expr,
    v: Expr,
    constants: Constants,
}

impl ProblemSpec {
    /// Derives `f_x` symbolically.
    pub fn new(f: Expr, v: Expr, constants: Constants) -> Result<Self, ProblemError> {
        let fx = f.diff(Var::X)?;
        Self::with_fx(f, fx, v, constants)
    }

    /// Uses a caller-supplied `f_x`, cross-checked against finite differences.
    pub fn with_fx(f: Expr, fx: Expr, v: Expr, constants: Constants) -> Result<Self, ProblemError> {
        constants.validate()?;
        if v.depends_on(Var::X) {
            return Err(ProblemError::VDependsOnX);
        }
        validate_fx(&f, &fx)?;
        Ok(Self {
            f,
            fx,
            v,
            constants,
        })
    }

    /// Parses `f` and `v` from text.
    pub fn parse(f: &str, v: &str, constants: Constants) -> Result<Self, ProblemError> {
        let f = expr::parse(f).map_err(|source| ProblemError::Parse { field: "f", source })?;
        let v = expr::parse(v).map_err(|source| ProblemError::Parse { field: "v", source })?;
        Self::new(f, v, constants)
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn fx(&self) -> &Expr {
        &self.fx
    }

    pub fn v(&self) -> &Expr {
        &self.v
    }

    pub fn constants(&self) -> Constants {
        self.constants
    }

    /// Same problem with a different forcing term.
    pub fn with_forcing(&self, v: Expr) -> Result<Self, ProblemError> {
        if v.depends_on(Var::X) {
            return Err(ProblemError::VDependsOnX);
        }
        Ok(Self { v, ..self.clone() })
    }

    pub fn f_at(&self, t: f64, x: f64) -> Result<f64, EvalError> {
        self.f.eval(t, x)
    }

    pub fn fx_at(&self, t: f64, x: f64) -> Result<f64, EvalError> {
        self.fx.eval(t, x)
    }

    pub fn v_at(&self, t: f64) -> Result<f64, EvalError> {
        self.v.eval(t, 0.0)
    }

    /// `max_k |v(k/N)|` over the grid nodes `k = 0..=n`.
    pub fn v_sup_on_grid(&self, n: usize) -> Result<f64, EvalError> {
        (0..=n).try_fold(0.0f64, |m, k| {
            Ok(m.max(self.v_at(k as f64 / n as f64)?.abs()))
        })
    }
}

/// Cross-checks `fx` against centred differences of `f` on a small box.
/// Points where either expression fails to evaluate are skipped.
fn validate_fx(f: &Expr, fx: &Expr) -> Result<(), ProblemError> {
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        for j in 0..=12 {
            let x = -3.0 + 0.5 * j as f64;
            let h = 1e-6 * (1.0 + x.abs());
            let (Ok(symbolic), Ok(up), Ok(down)) =
                (fx.eval(t, x), f.eval(t, x + h), f.eval(t, x - h))
            else {
                continue;
            };
            let numeric = (up - down) / (2.0 * h);
            if (symbolic - numeric).abs() > 1e-5 * (1.0 + symbolic.abs()) {
                return Err(ProblemError::FxMismatch {
                    t,
                    x,
                    symbolic,
                    numeric,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    /// `|f(t,x)| ≤ A|x| + B`
    Growth,
    /// `f_x(t,x) ≥ fx_lower`
    FxLower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoViolationFound,
    Violated,
}

/// A sample point where a condition failed: `lhs` should not exceed `rhs`
/// for the growth check, and should not fall below it for the `f_x` check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub t: f64,
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub samples_t: usize,
    pub samples_x: usize,
    pub x_range: f64,
}

impl ConditionReport {
    pub fn violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    /// Witness with the largest violation margin.
    pub fn worst(&self) -> Option<&Witness> {
        let margin = |w: &Witness| match self.condition {
            ConditionId::Growth => w.lhs - w.rhs,
            ConditionId::FxLower => w.rhs - w.lhs,
        };
        self.witnesses
            .iter()
            .max_by(|a, b| margin(a).total_cmp(&margin(b)))
    }
}

/// Evaluates `check(t, x)` on the uniform grid `[0,1] × [-x_range, x_range]`
/// and collects every witness, ordered by `t` then `x`.
fn sample_box<F>(
    condition: ConditionId,
    x_range: f64,
    samples_t: usize,
    samples_x: usize,
    check: F,
) -> Result<ConditionReport, ProblemError>
where
    F: Fn(f64, f64) -> Result<Option<Witness>, EvalError> + Sync,
{
    if !(x_range.is_finite() && x_range > 0.0) || samples_t < 2 || samples_x < 2 {
        return Err(ProblemError::InvalidSampling);
    }
    let rows: Vec<Vec<Witness>> = (0..samples_t)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (samples_t - 1) as f64;
            let mut found = Vec::new();
            for j in 0..samples_x {
                let x = -x_range + 2.0 * x_range * j as f64 / (samples_x - 1) as f64;
                if let Some(w) = check(t, x)? {
                    found.push(w);
                }
            }
            Ok(found)
        })
        .collect::<Result<_, EvalError>>()?;
    let witnesses: Vec<Witness> = rows.into_iter().flatten().collect();
    Ok(ConditionReport {
        condition,
        verdict: if witnesses.is_empty() {
            Verdict::NoViolationFound
        } else {
            Verdict::Violated
        },
        witnesses,
        samples_t,
        samples_x,
        x_range,
    })
}

/// Samples `|f(t,x)| ≤ a|x| + b` for an arbitrary expression `f`.
pub fn growth_report(
    f: &Expr,
    a: f64,
    b: f64,
    x_range: f64,
    samples_t: usize,
    samples_x: usize,
) -> Result<ConditionReport, ProblemError> {
    sample_box(
        ConditionId::Growth,
        x_range,
        samples_t,
        samples_x,
        |t, x| {
            let lhs = f.eval(t, x)?.abs();
            let rhs = a * x.abs() + b;
            Ok((lhs > rhs + BOUND_SLACK * (1.0 + rhs)).then_some(Witness { t, x, lhs, rhs }))
        },
    )
}

/// Growth condition `|f(t,x)| ≤ A|x| + B` with the declared constants.
pub fn check_growth(
    spec: &ProblemSpec,
    x_range: f64,
    samples_t: usize,
    samples_x: usize,
) -> Result<ConditionReport, ProblemError> {
    let c = spec.constants();
    growth_report(spec.f(), c.a, c.b, x_range, samples_t, samples_x)
}

/// Lower bound `f_x(t,x) ≥ fx_lower` with the declared constant.
pub fn check_fx_lower(
    spec: &ProblemSpec,
    x_range: f64,
    samples_t: usize,
    samples_x: usize,
) -> Result<ConditionReport, ProblemError> {
    let rhs = spec.constants().fx_lower;
    sample_box(
        ConditionId::FxLower,
        x_range,
        samples_t,
        samples_x,
        |t, x| {
            let lhs = spec.fx_at(t, x)?;
            Ok((lhs < rhs - BOUND_SLACK * (1.0 + rhs.abs())).then_some(Witness { t, x, lhs, rhs }))
        },
    )
}

/// Which solvability theorem the declared constants satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    /// `A < π²` and `fx_lower > -π²`.
    pub continuous_theorem_applies: bool,
    /// `A < 1` and `fx_lower > -1`.
    pub discrete_theorem_applies: bool,
}

pub fn classify(spec: &ProblemSpec) -> Classification {
    classify_constants(spec.constants())
}

pub fn classify_constants(c: Constants) -> Classification {
    let pi2 = PI * PI;
    Classification {
        continuous_theorem_applies: c.a < pi2 && c.fx_lower > -pi2,
        discrete_theorem_applies: c.a < 1.0 && c.fx_lower > -1.0,
    }
}

/// Uniform bound `M = (sup|v| + B) / (1 - A)` on every discrete solution.
pub fn apriori_bound(spec: &ProblemSpec, v_sup: f64) -> Result<f64, ProblemError> {
    let c = spec.constants();
    if c.a >= 1.0 {
        return Err(ProblemError::BoundUndefined(c.a));
    }
    Ok((v_sup + c.b) / (1.0 - c.a))
}

/// Sampling half-width for the condition checks: `2M` when the a-priori
/// bound exists, [`FALLBACK_X_RANGE`] otherwise. `sup|v|` is sampled at
/// [`DEFAULT_SAMPLES_T`] points.
pub fn default_x_range(spec: &ProblemSpec) -> Result<f64, ProblemError> {
    let v_sup = spec.v_sup_on_grid(DEFAULT_SAMPLES_T - 1)?;
    match apriori_bound(spec, v_sup) {
        Ok(m) => Ok(2.0 * m),
        Err(ProblemError::BoundUndefined(_)) => Ok(FALLBACK_X_RANGE),
        Err(e) => Err(e),
    }
}

//! Scalar expressions in the variables `t` and `x`.
//!
//! Expressions are parsed from plain infix text, evaluated pointwise, and
//! differentiated symbolically. Derivatives are never simplified; two
//! expressions are considered equal when they evaluate equally.

mod lexer;
mod parser;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use parser::{parse, ParseError, ParseErrorKind};

/// Independent variable of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    T,
    X,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T => f.write_str("t"),
            Var::X => f.write_str("x"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Atan,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Atan,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Atan => "atan",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree. Children are shared, so cloning and differentiating
/// large expressions stays cheap.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Arc<Expr>),
    Binary(BinOp, Arc<Expr>, Arc<Expr>),
    /// Power with a constant exponent.
    Pow(Arc<Expr>, f64),
    Call(Func, Arc<Expr>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero at t={t}, x={x}")]
    DivisionByZero { t: f64, x: f64 },
    #[error("sqrt of negative value {arg} at t={t}, x={x}")]
    NegativeSqrt { arg: f64, t: f64, x: f64 },
    #[error("power {base}^{exponent} undefined at t={t}, x={x}")]
    InvalidPower {
        base: f64,
        exponent: f64,
        t: f64,
        x: f64,
    },
    #[error("non-finite result at t={t}, x={x}")]
    NonFinite { t: f64, x: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError {
    #[error("abs has no continuous derivative and cannot be differentiated")]
    NotDifferentiable,
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(var: Var) -> Expr {
        Expr::Var(var)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Arc::new(e))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Arc::new(lhs), Arc::new(rhs))
    }

    pub fn pow(base: Expr, exponent: f64) -> Expr {
        Expr::Pow(Arc::new(base), exponent)
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Arc::new(arg))
    }

    /// Evaluates at `(t, x)`. Domain violations are errors, never NaN.
    pub fn eval(&self, t: f64, x: f64) -> Result<f64, EvalError> {
        let value = self.eval_raw(t, x)?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite { t, x })
        }
    }

    fn eval_raw(&self, t: f64, x: f64) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::X) => x,
            Expr::Neg(e) => -e.eval(t, x)?,
            Expr::Binary(op, lhs, rhs) => {
                let a = lhs.eval(t, x)?;
                let b = rhs.eval(t, x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero { t, x });
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(base, exponent) => {
                let b = base.eval(t, x)?;
                let p = *exponent;
                if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                    if b == 0.0 && p < 0.0 {
                        return Err(EvalError::DivisionByZero { t, x });
                    }
                    b.powi(p as i32)
                } else if b > 0.0 {
                    b.powf(p)
                } else {
                    return Err(EvalError::InvalidPower {
                        base: b,
                        exponent: p,
                        t,
                        x,
                    });
                }
            }
            Expr::Call(func, arg) => {
                let a = arg.eval(t, x)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Atan => a.atan(),
                    Func::Abs => a.abs(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::NegativeSqrt { arg: a, t, x });
                        }
                        a.sqrt()
                    }
                }
            }
        })
    }

    /// Exact symbolic partial derivative with respect to `var`.
    pub fn diff(&self, var: Var) -> Result<Expr, DiffError> {
        use BinOp::*;
        Ok(match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(v) => Expr::Const(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(e) => Expr::neg(e.diff(var)?),
            Expr::Binary(op, u, w) => {
                let du = u.diff(var)?;
                let dw = w.diff(var)?;
                let u = (**u).clone();
                let w = (**w).clone();
                match op {
                    Add | Sub => Expr::binary(*op, du, dw),
                    Mul => Expr::binary(Add, Expr::binary(Mul, du, w), Expr::binary(Mul, u, dw)),
                    Div => Expr::binary(
                        Div,
                        Expr::binary(
                            Sub,
                            Expr::binary(Mul, du, w.clone()),
                            Expr::binary(Mul, u, dw),
                        ),
                        Expr::pow(w, 2.0),
                    ),
                }
            }
            Expr::Pow(base, p) => {
                if *p == 0.0 {
                    Expr::Const(0.0)
                } else {
                    let db = base.diff(var)?;
                    Expr::binary(
                        Mul,
                        Expr::binary(Mul, Expr::Const(*p), Expr::pow((**base).clone(), p - 1.0)),
                        db,
                    )
                }
            }
            Expr::Call(func, arg) => {
                let da = arg.diff(var)?;
                let a = (**arg).clone();
                let outer = match func {
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, a)),
                    Func::Exp => Expr::call(Func::Exp, a),
                    Func::Atan => Expr::binary(
                        Div,
                        Expr::Const(1.0),
                        Expr::binary(Add, Expr::Const(1.0), Expr::pow(a, 2.0)),
                    ),
                    Func::Sqrt => Expr::binary(
                        Div,
                        Expr::Const(1.0),
                        Expr::binary(Mul, Expr::Const(2.0), Expr::call(Func::Sqrt, a)),
                    ),
                    Func::Abs => return Err(DiffError::NotDifferentiable),
                };
                Expr::binary(Mul, outer, da)
            }
        })
    }

    /// Replaces every occurrence of `var` by `with`.
    pub fn substitute(&self, var: Var, with: &Expr) -> Expr {
        match self {
            Expr::Var(v) if *v == var => with.clone(),
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(e) => Expr::neg(e.substitute(var, with)),
            Expr::Binary(op, u, w) => {
                Expr::binary(*op, u.substitute(var, with), w.substitute(var, with))
            }
            Expr::Pow(b, p) => Expr::pow(b.substitute(var, with), *p),
            Expr::Call(func, a) => Expr::call(*func, a.substitute(var, with)),
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.depends_on(var),
            Expr::Binary(_, u, w) => u.depends_on(var) || w.depends_on(var),
        }
    }

    pub fn contains_func(&self, func: Func) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Neg(e) | Expr::Pow(e, _) => e.contains_func(func),
            Expr::Call(g, e) => *g == func || e.contains_func(func),
            Expr::Binary(_, u, w) => u.contains_func(func) || w.contains_func(func),
        }
    }
}

fn fmt_number(f: &mut fmt::Formatter<'_>, value: f64) -> fmt::Result {
    // `{:?}` prints the shortest round-trip representation, with exponent
    // when needed (e.g. `1e-7`), all of which the lexer accepts.
    if value < 0.0 {
        write!(f, "(-{:?})", -value)
    } else {
        write!(f, "{value:?}")
    }
}

/// Fully parenthesised rendering that [`parse`] reads back to an equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_number(f, *c),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, u, w) => write!(f, "({u} {} {w})", op.symbol()),
            Expr::Pow(b, p) => {
                write!(f, "({b}^")?;
                fmt_number(f, *p)?;
                f.write_str(")")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const F1: &str = "(t + sin(x)) / (2*x^2 + 4)";
    const F2: &str = "x*exp(t - pi) - atan(x) + exp(t)";

    fn samples() -> impl Iterator<Item = (f64, f64)> {
        (0..100).map(|i| {
            let s = i as f64;
            (
                (s * 0.37).sin() * 0.5 + 0.5,
                (s * 1.3).cos() * 4.0 - 0.2 * s.sin(),
            )
        })
    }

    #[test]
    fn eval_paper_examples() {
        assert_eq!(parse(F1).unwrap().eval(0.0, 0.0).unwrap(), 0.0);
        let v = parse(F2).unwrap().eval(0.0, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eval_domain_errors() {
        assert!(matches!(
            parse("1/x").unwrap().eval(0.3, 0.0),
            Err(EvalError::DivisionByZero { .. })
        ));
        assert!(matches!(
            parse("sqrt(x)").unwrap().eval(0.0, -1.0),
            Err(EvalError::NegativeSqrt { .. })
        ));
        assert!(matches!(
            parse("x^0.5").unwrap().eval(0.0, -1.0),
            Err(EvalError::InvalidPower { .. })
        ));
        assert!(matches!(
            parse("x^0.5").unwrap().eval(0.0, 0.0),
            Err(EvalError::InvalidPower { .. })
        ));
        assert!(matches!(
            parse("x^-2").unwrap().eval(0.0, 0.0),
            Err(EvalError::DivisionByZero { .. })
        ));
        assert!(matches!(
            parse("exp(x)").unwrap().eval(0.0, 1000.0),
            Err(EvalError::NonFinite { .. })
        ));
        assert_eq!(parse("x^3").unwrap().eval(0.0, -2.0).unwrap(), -8.0);
    }

    #[test]
    fn diff_polynomial_plus_sine() {
        let d = parse("x^2 + sin(x)").unwrap().diff(Var::X).unwrap();
        for (t, x) in samples() {
            let expected = 2.0 * x + x.cos();
            assert!((d.eval(t, x).unwrap() - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn diff_f2_in_x() {
        let d = parse(F2).unwrap().diff(Var::X).unwrap();
        for (t, x) in samples() {
            let expected = (t - PI).exp() - 1.0 / (1.0 + x * x);
            assert!((d.eval(t, x).unwrap() - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn second_derivative_of_sine() {
        let s = parse("sin(pi*t)").unwrap();
        let dd = s.diff(Var::T).unwrap().diff(Var::T).unwrap();
        for (t, x) in samples() {
            let expected = -PI * PI * (PI * t).sin();
            assert!((dd.eval(t, x).unwrap() - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn abs_is_not_differentiable() {
        assert_eq!(
            parse("x + abs(t)").unwrap().diff(Var::X),
            Err(DiffError::NotDifferentiable)
        );
    }

    #[test]
    fn substitute_and_dependencies() {
        let f = parse("x^2 + t").unwrap();
        let g = f.substitute(Var::X, &parse("sin(t)").unwrap());
        assert!(!g.depends_on(Var::X));
        assert!(g.depends_on(Var::T));
        let v = g.eval(0.3, 123.0).unwrap();
        assert!((v - (0.3f64.sin().powi(2) + 0.3)).abs() < 1e-15);
        assert!(!f.contains_func(Func::Sin) && g.contains_func(Func::Sin));
    }

    #[test]
    fn display_round_trips() {
        for src in [
            F1,
            F2,
            "-x^2",
            "2^-1 * t",
            "1e-7*x - (-3)",
            "abs(x)/sqrt(1+t)",
        ] {
            let e = parse(src).unwrap();
            let again = parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} -> {e}");
        }
    }
}

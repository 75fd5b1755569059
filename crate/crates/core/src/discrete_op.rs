//! The discrete operator `(D_N x)(k) = Δ²x(k-1) - f(k/N, x(k))/N²`, its
//! tridiagonal derivative, the linearised solve, and the quadratic
//! functional `Φ_N` whose unique critical point is that solve's answer.
//!
//! Vectors over interior nodes have length `N-1`; entry `i` belongs to node
//! `k = i + 1`.

use thiserror::Error;

use crate::expr::EvalError;
use crate::grid::{GridError, GridFunction};
use crate::problem::ProblemSpec;

/// A pivot smaller than this times its row scale is treated as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("singular tridiagonal system: pivot {pivot:e} at row {row}")]
    Singular { row: usize, pivot: f64 },
    #[error("non-finite entry in tridiagonal system")]
    NonFinite,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Square tridiagonal matrix of dimension `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self, OperatorError> {
        let m = diag.len();
        for off in [&sub, &sup] {
            if off.len() + 1 != m.max(1) {
                return Err(OperatorError::Dimension {
                    expected: m.saturating_sub(1),
                    got: off.len(),
                });
            }
        }
        if sub.iter().chain(&diag).chain(&sup).any(|v| !v.is_finite()) {
            return Err(OperatorError::NonFinite);
        }
        Ok(Self { sub, diag, sup })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn sub(&self) -> &[f64] {
        &self.sub
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn sup(&self) -> &[f64] {
        &self.sup
    }

    pub fn transpose(&self) -> Tridiagonal {
        Tridiagonal {
            sub: self.sup.clone(),
            diag: self.diag.clone(),
            sup: self.sub.clone(),
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let m = self.dim();
        assert_eq!(v.len(), m, "dimension mismatch");
        (0..m)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.sub[i - 1] * v[i - 1];
                }
                if i + 1 < m {
                    acc += self.sup[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Dense row-major copy, for tests and small diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        let mut rows = vec![vec![0.0; m]; m];
        for i in 0..m {
            rows[i][i] = self.diag[i];
            if i > 0 {
                rows[i][i - 1] = self.sub[i - 1];
            }
            if i + 1 < m {
                rows[i][i + 1] = self.sup[i];
            }
        }
        rows
    }
}

/// `D_N x`, with zero boundary entries.
pub fn apply_dn(spec: &ProblemSpec, x: &GridFunction) -> Result<GridFunction, OperatorError> {
    let n = x.n();
    let scale = 1.0 / (n * n) as f64;
    let d2 = x.second_difference();
    let interior = d2
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let k = i + 1;
            Ok(d - scale * spec.f_at(x.node(k), x.values()[k])?)
        })
        .collect::<Result<Vec<f64>, EvalError>>()?;
    Ok(GridFunction::from_interior(n, &interior)?)
}

/// Residual of the discrete problem at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    /// `(D_N x)(k) - v(k/N)/N²` for `k = 1..=N-1`.
    pub vector: Vec<f64>,
    /// Euclidean norm of `vector` (the `‖·‖_N` norm).
    pub norm: f64,
}

pub fn residual(spec: &ProblemSpec, x: &GridFunction) -> Result<Residual, OperatorError> {
    let n = x.n();
    let scale = 1.0 / (n * n) as f64;
    let dn = apply_dn(spec, x)?;
    let vector = dn
        .interior()
        .iter()
        .enumerate()
        .map(|(i, d)| Ok(d - scale * spec.v_at(x.node(i + 1))?))
        .collect::<Result<Vec<f64>, EvalError>>()?;
    let norm = vector.iter().map(|r| r * r).sum::<f64>().sqrt();
    Ok(Residual { vector, norm })
}

/// Derivative of `D_N` at `x`: unit off-diagonals and
/// `diag(k) = -2 - f_x(k/N, x(k))/N²`.
pub fn jacobian(spec: &ProblemSpec, x: &GridFunction) -> Result<Tridiagonal, OperatorError> {
    let n = x.n();
    let scale = 1.0 / (n * n) as f64;
    let diag = (1..n)
        .map(|k| Ok(-2.0 - scale * spec.fx_at(x.node(k), x.values()[k])?))
        .collect::<Result<Vec<f64>, EvalError>>()?;
    let off = vec![1.0; n - 2];
    Tridiagonal::new(off.clone(), diag, off)
}

/// Solves `m · h = rhs` by forward elimination and back substitution,
/// without pivoting.
///
/// For the Jacobian of `D_N`, `-J = L + diag(f_x)/N²` where `L` is the
/// discrete Dirichlet Laplacian with smallest eigenvalue
/// `4 sin²(π/2N) ≥ 8/N²` for `N ≥ 2`. When `f_x > -1` the matrix `-J` is
/// symmetric positive definite with eigenvalues above `7/N²`, so every
/// elimination pivot is bounded away from zero and no pivoting is needed.
/// The strict diagonal dominance margin `|diag| - 2 = f_x/N²` may be
/// negative, which is why the argument goes through definiteness. A pivot
/// below [`PIVOT_THRESHOLD`] times its row scale signals that the `f_x`
/// bound does not hold.
pub fn solve_tridiagonal(m: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>, OperatorError> {
    let dim = m.dim();
    if rhs.len() != dim {
        return Err(OperatorError::Dimension {
            expected: dim,
            got: rhs.len(),
        });
    }
    let mut upper = vec![0.0; dim];
    let mut h = vec![0.0; dim];
    for i in 0..dim {
        let lower = if i > 0 { m.sub[i - 1] } else { 0.0 };
        let above = if i + 1 < dim { m.sup[i] } else { 0.0 };
        let (prev_upper, prev_h) = if i > 0 {
            (upper[i - 1], h[i - 1])
        } else {
            (0.0, 0.0)
        };
        let pivot = m.diag[i] - lower * prev_upper;
        let row_scale = m.diag[i].abs() + lower.abs() + above.abs();
        if pivot.is_nan() || pivot.abs() <= PIVOT_THRESHOLD * row_scale {
            return Err(OperatorError::Singular { row: i, pivot });
        }
        upper[i] = above / pivot;
        h[i] = (rhs[i] - lower * prev_h) / pivot;
    }
    for i in (0..dim.saturating_sub(1)).rev() {
        h[i] -= upper[i] * h[i + 1];
    }
    Ok(h)
}

/// The unique `h` in `E_N` with `D_N'(x) h = a` on the interior nodes.
pub fn linearized_solve(
    spec: &ProblemSpec,
    x: &GridFunction,
    a: &[f64],
) -> Result<GridFunction, OperatorError> {
    let j = jacobian(spec, x)?;
    let h = solve_tridiagonal(&j, a)?;
    Ok(GridFunction::from_interior(x.n(), &h)?)
}

/// `Φ_N(h) = ½ Σ_{k=1}^N |Δh(k-1)|² + (1/2N²) Σ_{k=1}^{N-1} f_x(k/N, x(k)) |h(k)|²
///          + Σ_{k=1}^{N-1} h(k) a(k)`.
///
/// Its gradient is `-D_N'(x) h + a`, so the minimiser is
/// [`linearized_solve`]`(spec, x, a)`.
pub fn phi_n(
    spec: &ProblemSpec,
    x: &GridFunction,
    a: &[f64],
    h: &GridFunction,
) -> Result<f64, OperatorError> {
    let n = x.n();
    if h.n() != n {
        return Err(OperatorError::Dimension {
            expected: n,
            got: h.n(),
        });
    }
    if a.len() != n - 1 {
        return Err(OperatorError::Dimension {
            expected: n - 1,
            got: a.len(),
        });
    }
    let kinetic: f64 = h.forward_difference().iter().map(|d| d * d).sum();
    let mut potential = 0.0;
    let mut linear = 0.0;
    for k in 1..n {
        let hk = h.values()[k];
        potential += spec.fx_at(x.node(k), x.values()[k])? * hk * hk;
        linear += hk * a[k - 1];
    }
    Ok(0.5 * kinetic + potential / (2.0 * (n * n) as f64) + linear)
}

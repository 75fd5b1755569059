//! The discrete function space `E_N`: grid functions on nodes `0..=N` that
//! vanish at both ends, their difference operators, and the four norms used
//! throughout the solver.
//!
//! Node `k` corresponds to `t = k/N`. Both boundary nodes are stored, so
//! `values.len() == n + 1` and `values[0] == values[n] == 0`.

use std::ops::{Add, Mul, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("subdivision count must be at least 2, got {0}")]
    TooCoarse(usize),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("boundary value at node {node} is {value}, expected 0")]
    Boundary { node: usize, value: f64 },
    #[error("non-finite value {value} at node {node}")]
    NonFinite { node: usize, value: f64 },
}

/// An element of `E_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    n: usize,
    values: Vec<f64>,
}

impl GridFunction {
    /// The zero element of `E_N`.
    pub fn zeros(n: usize) -> Result<Self, GridError> {
        if n < 2 {
            return Err(GridError::TooCoarse(n));
        }
        Ok(Self {
            n,
            values: vec![0.0; n + 1],
        })
    }

    /// Builds a grid function from all `n + 1` node values, boundary included.
    pub fn from_values(values: Vec<f64>) -> Result<Self, GridError> {
        let n = values.len().saturating_sub(1);
        if n < 2 {
            return Err(GridError::TooCoarse(n));
        }
        for (node, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(GridError::NonFinite { node, value });
            }
        }
        for node in [0, n] {
            if values[node] != 0.0 {
                return Err(GridError::Boundary {
                    node,
                    value: values[node],
                });
            }
        }
        Ok(Self { n, values })
    }

    /// Builds a grid function from the `n - 1` interior values.
    pub fn from_interior(n: usize, interior: &[f64]) -> Result<Self, GridError> {
        if n < 2 {
            return Err(GridError::TooCoarse(n));
        }
        if interior.len() != n - 1 {
            return Err(GridError::Length {
                expected: n - 1,
                got: interior.len(),
            });
        }
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        values.extend_from_slice(interior);
        values.push(0.0);
        Self::from_values(values)
    }

    /// Samples `g(k)` at the interior nodes; the boundary is forced to zero.
    pub fn from_fn(n: usize, mut g: impl FnMut(usize) -> f64) -> Result<Self, GridError> {
        let interior: Vec<f64> = (1..n).map(&mut g).collect();
        Self::from_interior(n, &interior)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values at nodes `1..=n-1`.
    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.n]
    }

    /// Grid coordinate `k/N` of node `k`.
    pub fn node(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    /// Value at node `k`, with the zero extension outside `0..=n`.
    pub fn at(&self, k: isize) -> f64 {
        if k < 0 || k as usize > self.n {
            0.0
        } else {
            self.values[k as usize]
        }
    }

    /// `Δx(k-1) = x(k) - x(k-1)` for `k = 1..=N`; entry `k-1` of the result.
    pub fn forward_difference(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `Δ²x(k-1) = x(k+1) - 2x(k) + x(k-1)` for `k = 1..=N-1`; entry `k-1`.
    pub fn second_difference(&self) -> Vec<f64> {
        self.values
            .windows(3)
            .map(|w| w[2] - 2.0 * w[1] + w[0])
            .collect()
    }

    pub fn norms(&self) -> Norms {
        let n_norm = l2(self.interior());
        let delta_norm = l2(&self.forward_difference());
        let e_norm = l2(&self.second_difference());
        Norms {
            n_norm,
            delta_norm,
            e_norm,
            sup_norm: self.sup_norm(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_k |self(k) - other(k)|`. Panics if the grids differ.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.n, other.n, "grid size mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scale(&self, factor: f64) -> GridFunction {
        GridFunction {
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// `self + alpha * direction`.
    pub fn axpy(&self, alpha: f64, direction: &GridFunction) -> GridFunction {
        assert_eq!(self.n, direction.n, "grid size mismatch");
        GridFunction {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&direction.values)
                .map(|(x, h)| x + alpha * h)
                .collect(),
        }
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;

    fn add(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;

    fn sub(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &GridFunction {
    type Output = GridFunction;

    fn mul(self, rhs: f64) -> GridFunction {
        self.scale(rhs)
    }
}

/// The four norms on `E_N`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Norms {
    /// `(Σ_{i=1}^{N-1} |x(i)|²)^{1/2}`
    pub n_norm: f64,
    /// `(Σ_{i=1}^{N} |Δx(i-1)|²)^{1/2}`
    pub delta_norm: f64,
    /// `(Σ_{i=1}^{N-1} |Δ²x(i-1)|²)^{1/2}`
    pub e_norm: f64,
    /// `max_k |x(k)|`
    pub sup_norm: f64,
}

impl Norms {
    /// The six terms of the chain
    /// `¼‖x‖_E ≤ ½‖x‖_Δ ≤ ‖x‖_N ≤ √N‖x‖_∞ ≤ N‖x‖_Δ ≤ N²‖x‖_E`, in order.
    pub fn chain(&self, n: usize) -> [f64; 6] {
        let nf = n as f64;
        [
            0.25 * self.e_norm,
            0.5 * self.delta_norm,
            self.n_norm,
            nf.sqrt() * self.sup_norm,
            nf * self.delta_norm,
            nf * nf * self.e_norm,
        ]
    }

    /// Smallest gap `chain[i+1] - chain[i]`; nonnegative iff the chain holds.
    pub fn chain_slack(&self, n: usize) -> f64 {
        self.chain(n)
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SummationError {
    #[error("sequences must have {expected} entries (indices 1..=m+1), got a={a}, b={b}")]
    Length { expected: usize, a: usize, b: usize },
}

/// Residual of the summation-by-parts identity
/// `Σ_{k=1}^m a_k Δb_k = a_{m+1} b_{m+1} - a_1 b_1 - Σ_{k=1}^m Δa_k b_{k+1}`.
///
/// Slices are indexed from 1: `a[0]` holds `a_1`. Both need `m + 1` entries.
pub fn summation_by_parts_residual(a: &[f64], b: &[f64], m: usize) -> Result<f64, SummationError> {
    if a.len() != m + 1 || b.len() != m + 1 {
        return Err(SummationError::Length {
            expected: m + 1,
            a: a.len(),
            b: b.len(),
        });
    }
    let lhs: f64 = (0..m).map(|k| a[k] * (b[k + 1] - b[k])).sum();
    let tail: f64 = (0..m).map(|k| (a[k + 1] - a[k]) * b[k + 1]).sum();
    let rhs = a[m] * b[m] - a[0] * b[0] - tail;
    Ok((lhs - rhs).abs())
}

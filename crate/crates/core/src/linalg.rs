//! Small dense complex-matrix helpers.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spin::SparsePauliOperator;

pub type CMatrix = Array2<C64>;

pub fn identity(dim: usize) -> CMatrix {
    Array2::from_diag_elem(dim, C64::new(1.0, 0.0))
}

pub fn dense(op: &SparsePauliOperator) -> CMatrix {
    let rows = op.to_dense();
    let dim = rows.len();
    Array2::from_shape_fn((dim, dim), |(r, c)| rows[r][c])
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    Ok(a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm())))
}

/// `max |(U†U − I)_{ij}|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let prod = adjoint(u).dot(u);
    let id = identity(u.nrows());
    max_abs_diff(&prod, &id).unwrap_or(f64::INFINITY)
}

fn one_norm(m: &CMatrix) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(-i H t)` by scaling and squaring of a Taylor series.
pub fn expm_i(h: &CMatrix, t: f64) -> CMatrix {
    let dim = h.nrows();
    let a = h.mapv(|z| z * C64::new(0.0, -t));
    let norm = one_norm(&a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / f64::powi(2.0, squarings as i32));
    let mut result = identity(dim);
    let mut term = identity(dim);
    for k in 1..=30 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        result = result + &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// Diagonal matrix `diag(e^{-i d_k t})`.
pub fn diagonal_phase(diagonal: &[f64], t: f64) -> CMatrix {
    let dim = diagonal.len();
    let mut m = Array2::zeros((dim, dim));
    for (k, &d) in diagonal.iter().enumerate() {
        m[(k, k)] = C64::from_polar(1.0, -d * t);
    }
    m
}

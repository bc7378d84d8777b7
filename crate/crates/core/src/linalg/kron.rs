//! Kronecker products, the `vec` operator and the commutation matrix.

use num_complex::Complex;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cone, Real};

/// Kronecker product `A ⊗ B`: block `(i, j)` of the result is `a_ij · B`.
pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let (p, q) = a.shape();
    let (s, t) = b.shape();
    let rows = p.checked_mul(s);
    let cols = q.checked_mul(t);
    match (rows, cols) {
        (Some(rows), Some(cols)) if rows.checked_mul(cols).is_some() => {
            Ok(ComplexMatrix::from_fn(rows, cols, |i, j| a[(i / s, j / t)] * b[(i % s, j % t)]))
        }
        _ => Err(Error::Size(format!("kron of {p}x{q} and {s}x{t} overflows"))),
    }
}

/// Stacks the columns of `x` into one vector: entry `i + rows·j` is `x[(i, j)]`.
pub fn vec<T: Real>(x: &ComplexMatrix<T>) -> Vec<Complex<T>> {
    x.as_slice().to_vec()
}

/// Inverse of [`vec`].
pub fn unvec<T: Real>(v: &[Complex<T>], rows: usize, cols: usize) -> Result<ComplexMatrix<T>> {
    if rows.checked_mul(cols) != Some(v.len()) {
        return Err(Error::Size(format!(
            "cannot reshape a vector of length {} into {rows}x{cols}",
            v.len()
        )));
    }
    ComplexMatrix::from_col_major(rows, cols, v.to_vec())
}

/// Index map of the commutation matrix: `vec(Xᵀ)[perm[k]] = vec(X)[k]` for `X` of size `m×r`.
pub fn commutation_perm(m: usize, r: usize) -> Vec<usize> {
    let mut perm = vec![0; m * r];
    for j in 0..r {
        for i in 0..m {
            perm[i + m * j] = j + r * i;
        }
    }
    perm
}

/// The `mr × mr` permutation `N` with `N·vec(X) = vec(Xᵀ)` for every `m×r` matrix `X`.
pub fn commutation_matrix<T: Real>(m: usize, r: usize) -> ComplexMatrix<T> {
    let mut n = ComplexMatrix::zeros(m * r, m * r);
    for (src, dst) in commutation_perm(m, r).into_iter().enumerate() {
        n[(dst, src)] = cone();
    }
    n
}

//! Dense complex linear-algebra kernels.

mod kron;
mod lstsq;
mod matrix;
mod svd;

pub use kron::{commutation_matrix, commutation_perm, kron, unvec, vec};
pub use lstsq::{lstsq_min_norm, lstsq_min_norm_with, LstsqOptions};
pub use matrix::{dotc, vec_norm, ComplexMatrix};
pub use svd::{singular_values, svd_full, SvdFactors};

use crate::scalar::Real;

/// Frobenius norm.
pub fn frob<T: Real>(a: &ComplexMatrix<T>) -> T {
    a.frob()
}

/// Number of singular values above `tol·σ₁`.
pub fn numerical_rank<T: Real>(s: &[T], tol: T) -> usize {
    match s.first() {
        Some(&s1) if s1 > T::zero() => s.iter().filter(|&&x| x > tol * s1).count(),
        _ => 0,
    }
}

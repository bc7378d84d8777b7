//! Minimum-norm linear least squares.

use num_complex::Complex;

use super::matrix::{dotc, vec_norm};
use super::svd::{reduce_tall, reduce_wide};
use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{czero, is_finite, Real};

/// Solver options for [`lstsq_min_norm_with`].
#[derive(Debug, Clone, Copy)]
pub struct LstsqOptions<T: Real> {
    /// Relative singular-value cutoff; `None` means `max(p, q)·u`.
    pub rtol: Option<T>,
}

impl<T: Real> Default for LstsqOptions<T> {
    fn default() -> Self {
        Self { rtol: None }
    }
}

/// Minimum-norm minimizer of `‖A·x − b‖₂`, with the numerical rank decided by
/// `σ_i > max(p, q)·u·σ_max`.
pub fn lstsq_min_norm<T: Real>(a: &ComplexMatrix<T>, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    lstsq_min_norm_with(a, b, LstsqOptions::default())
}

pub fn lstsq_min_norm_with<T: Real>(
    a: &ComplexMatrix<T>,
    b: &[Complex<T>],
    opts: LstsqOptions<T>,
) -> Result<Vec<Complex<T>>> {
    let (p, q) = a.shape();
    if b.len() != p {
        return Err(Error::Size(format!("matrix has {p} rows, right-hand side has {}", b.len())));
    }
    if !a.is_finite() || !b.iter().all(|z| is_finite(*z)) {
        return Err(Error::Input("least-squares data has non-finite entries".into()));
    }
    if p == 0 || q == 0 {
        return Ok(vec![czero(); q]);
    }
    let rtol = opts.rtol.unwrap_or_else(|| T::from_usize_lossy(p.max(q)) * T::unit_roundoff());

    let mut x = vec![czero::<T>(); q];
    if p >= q {
        // A·P = Q·R and Rᴴ·Z = W, so R = Z·Σ·Ũᴴ with w_j = σ_j·ũ_j and
        // y = Pᵀx = Σ w_j (z_jᴴ c) / σ_j².
        let (w, z, c, perm) = reduce_tall(a, b)?;
        let sigma: Vec<T> = (0..q).map(|j| vec_norm(w.col(j))).collect();
        let cutoff = rtol * sigma.iter().copied().fold(T::zero(), T::max);
        let mut y = vec![czero::<T>(); q];
        for j in 0..q {
            if sigma[j] > cutoff && sigma[j] > T::zero() {
                let coef = dotc(z.col(j), &c) / (sigma[j] * sigma[j]);
                for (yi, wi) in y.iter_mut().zip(w.col(j)) {
                    *yi += *wi * coef;
                }
            }
        }
        for (k, yk) in y.into_iter().enumerate() {
            x[perm[k]] = yk;
        }
    } else {
        // Aᴴ·V = W, so A = V·Σ·Ũᴴ with w_j = σ_j·ũ_j and x = Σ w_j (v_jᴴ b) / σ_j².
        let (w, v) = reduce_wide(a)?;
        let sigma: Vec<T> = (0..p).map(|j| vec_norm(w.col(j))).collect();
        let cutoff = rtol * sigma.iter().copied().fold(T::zero(), T::max);
        for j in 0..p {
            if sigma[j] > cutoff && sigma[j] > T::zero() {
                let coef = dotc(v.col(j), b) / (sigma[j] * sigma[j]);
                for (xi, wi) in x.iter_mut().zip(w.col(j)) {
                    *xi += *wi * coef;
                }
            }
        }
    }
    Ok(x)
}

//! Householder QR and one-sided (Hestenes) Jacobi SVD for complex matrices.
//!
//! One-sided Jacobi orthogonalizes the columns of a working copy `W = A·V`
//! by plane rotations accumulated in the unitary `V`. At convergence the
//! column norms of `W` are the singular values and the normalized columns
//! are the left singular vectors.

use num_complex::Complex;

use super::matrix::{dotc, vec_norm};
use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{czero, phase, Real};

const MAX_SWEEPS: usize = 100;

/// Full singular value decomposition `A = R·diag(s)·Tᴴ`.
#[derive(Debug, Clone)]
pub struct SvdFactors<T: Real> {
    /// `rows × rows` unitary.
    pub r: ComplexMatrix<T>,
    /// Nonincreasing, length `min(rows, cols)`.
    pub singular_values: Vec<T>,
    /// `cols × cols` unitary.
    pub t: ComplexMatrix<T>,
}

impl<T: Real> SvdFactors<T> {
    /// `R·Σ·Tᴴ` with the rectangular `Σ`.
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let (m, n) = (self.r.rows(), self.t.rows());
        let mut rs = ComplexMatrix::zeros(m, n);
        for (j, &s) in self.singular_values.iter().enumerate() {
            for i in 0..m {
                rs[(i, j)] = self.r[(i, j)] * s;
            }
        }
        &rs * &self.t.adjoint()
    }
}

fn two_cols_mut<T: Real>(
    data: &mut [Complex<T>],
    rows: usize,
    p: usize,
    q: usize,
) -> (&mut [Complex<T>], &mut [Complex<T>]) {
    debug_assert!(p < q);
    let (lo, hi) = data.split_at_mut(q * rows);
    (&mut lo[p * rows..(p + 1) * rows], &mut hi[..rows])
}

/// `[x, y] ← [c·x − s·ph·y, s·x + c·ph·y]`
#[inline]
fn rotate<T: Real>(x: &mut [Complex<T>], y: &mut [Complex<T>], c: T, s: T, ph: Complex<T>) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let yb = *b * ph;
        let xa = *a;
        *a = xa * c - yb * s;
        *b = xa * s + yb * c;
    }
}

/// Runs Jacobi sweeps on the columns of `w`, accumulating into `v`.
fn jacobi<T: Real>(w: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>) -> Result<()> {
    let (rows, n) = w.shape();
    if n < 2 {
        return Ok(());
    }
    let tol = T::epsilon() * T::from_usize_lossy(rows.max(1)).sqrt();
    let vrows = v.rows();
    let mut norms: Vec<T> = (0..n).map(|j| w.col(j).iter().map(|z| z.norm_sqr()).sum()).collect();
    // Columns below roundoff of the whole matrix are left alone; they sit under
    // any rank cutoff and rotating them only chases noise.
    let negligible = {
        let total: T = norms.iter().copied().sum();
        let u = T::unit_roundoff();
        u * u * total
    };
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = {
                    let data = w.as_slice();
                    dotc(&data[p * rows..(p + 1) * rows], &data[q * rows..(q + 1) * rows])
                };
                let g = gamma.norm();
                if g <= tol * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (g + g);
                let t = {
                    let mag = T::one() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    if zeta < T::zero() {
                        -mag
                    } else {
                        mag
                    }
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let ph = phase(gamma.conj());
                let (x, y) = two_cols_mut(w.as_mut_slice(), rows, p, q);
                rotate(x, y, c, s, ph);
                let (x, y) = two_cols_mut(v.as_mut_slice(), vrows, p, q);
                rotate(x, y, c, s, ph);
                norms[p] = (alpha - t * g).max(T::zero());
                norms[q] = beta + t * g;
            }
        }
        if !rotated {
            return Ok(());
        }
        for (j, nj) in norms.iter_mut().enumerate() {
            *nj = w.col(j).iter().map(|z| z.norm_sqr()).sum();
        }
    }
    Err(Error::Numerical(format!("Jacobi SVD did not converge in {MAX_SWEEPS} sweeps")))
}

fn check_finite<T: Real>(a: &ComplexMatrix<T>) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::Input("matrix has non-finite entries".into()))
    }
}

/// In-place Householder QR of a tall `a` (rows ≥ cols), applying the same
/// reflections to every column of `rhs`. Returns the `cols × cols` triangular factor.
pub(crate) fn householder_qr<T: Real>(
    a: &mut ComplexMatrix<T>,
    rhs: &mut [Vec<Complex<T>>],
) -> ComplexMatrix<T> {
    let (p, q) = a.shape();
    debug_assert!(p >= q);
    let mut v = vec![czero::<T>(); p];
    for k in 0..q {
        let normx = vec_norm(&a.col(k)[k..]);
        if normx == T::zero() {
            continue;
        }
        let x0 = a[(k, k)];
        let alpha = -(phase(x0) * normx);
        let len = p - k;
        v[..len].copy_from_slice(&a.col(k)[k..]);
        v[0] -= alpha;
        let vnorm2: T = v[..len].iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0) / vnorm2;
        let reflect = |col: &mut [Complex<T>]| {
            let s = dotc(&v[..len], col) * two;
            for (c, vi) in col.iter_mut().zip(&v[..len]) {
                *c -= *vi * s;
            }
        };
        for j in k + 1..q {
            reflect(&mut a.col_mut(j)[k..]);
        }
        for b in rhs.iter_mut() {
            reflect(&mut b[k..]);
        }
        let col = a.col_mut(k);
        col[k] = alpha;
        for z in &mut col[k + 1..] {
            *z = czero();
        }
    }
    a.submatrix(0, q, 0, q)
}

fn sorted_order<T: Real>(s: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

/// Singular values only, nonincreasing.
pub fn singular_values<T: Real>(a: &ComplexMatrix<T>) -> Result<Vec<T>> {
    check_finite(a)?;
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(Vec::new());
    }
    let tall = if m >= n { a.clone() } else { a.adjoint() };
    let (p, q) = tall.shape();
    let mut w = if p > q {
        let mut qr = tall;
        householder_qr(&mut qr, &mut [])
    } else {
        tall
    };
    let mut v = ComplexMatrix::identity(q);
    jacobi(&mut w, &mut v)?;
    let mut s: Vec<T> = (0..q).map(|j| vec_norm(w.col(j))).collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

/// Full SVD with square unitary factors.
pub fn svd_full<T: Real>(a: &ComplexMatrix<T>) -> Result<SvdFactors<T>> {
    check_finite(a)?;
    let (m, n) = a.shape();
    if m < n {
        let f = svd_full(&a.adjoint())?;
        return Ok(SvdFactors { r: f.t, singular_values: f.singular_values, t: f.r });
    }
    // Reduce to a square triangular factor, A = Q·[Rt; 0], keeping Q explicitly.
    let (mut w, q) = if m > n {
        let mut qr = a.clone();
        let mut qh_cols: Vec<Vec<Complex<T>>> = (0..m)
            .map(|k| {
                let mut e = vec![czero::<T>(); m];
                e[k] = crate::scalar::cone();
                e
            })
            .collect();
        let rt = householder_qr(&mut qr, &mut qh_cols);
        let qh = ComplexMatrix::from_fn(m, m, |i, j| qh_cols[j][i]);
        (rt, Some(qh.adjoint()))
    } else {
        (a.clone(), None)
    };
    let mut v = ComplexMatrix::identity(n);
    jacobi(&mut w, &mut v)?;
    let norms: Vec<T> = (0..n).map(|j| vec_norm(w.col(j))).collect();
    let order = sorted_order(&norms);
    // Columns Jacobi left untouched as negligible get a fresh orthonormal completion.
    let floor = T::unit_roundoff() * norms.iter().map(|x| *x * *x).sum::<T>().sqrt();

    let mut t = ComplexMatrix::zeros(n, n);
    let mut left = ComplexMatrix::zeros(n, n);
    let mut filled = vec![false; n];
    let mut singular_values = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        t.col_mut(k).copy_from_slice(v.col(j));
        let s = norms[j];
        singular_values.push(s);
        if s > floor && s > T::min_positive_value() {
            for (dst, src) in left.col_mut(k).iter_mut().zip(w.col(j)) {
                *dst = *src / s;
            }
            filled[k] = true;
        }
    }
    complete_unitary(&mut left, &mut filled);
    let r = match q {
        None => left,
        Some(q) => {
            let mut block = ComplexMatrix::identity(m);
            block.set_block(0, 0, &left);
            &q * &block
        }
    };
    Ok(SvdFactors { r, singular_values, t })
}

/// Fills the unmarked columns of `r` with an orthonormal completion of the marked ones.
fn complete_unitary<T: Real>(r: &mut ComplexMatrix<T>, filled: &mut [bool]) {
    let m = r.rows();
    for slot in 0..m {
        if filled[slot] {
            continue;
        }
        let mut best: Option<(T, Vec<Complex<T>>)> = None;
        for e in 0..m {
            let mut x = vec![czero::<T>(); m];
            x[e] = crate::scalar::cone();
            for _ in 0..2 {
                for (j, &done) in filled.iter().enumerate() {
                    if done {
                        let proj = dotc(r.col(j), &x);
                        for (xi, rj) in x.iter_mut().zip(r.col(j)) {
                            *xi -= *rj * proj;
                        }
                    }
                }
            }
            let nx = vec_norm(&x);
            if best.as_ref().is_none_or(|(b, _)| nx > *b) {
                best = Some((nx, x));
            }
        }
        let (nx, x) = best.expect("m >= 1");
        for (dst, xi) in r.col_mut(slot).iter_mut().zip(&x) {
            *dst = *xi / nx;
        }
        filled[slot] = true;
    }
}

/// Householder QR with column pivoting: `A·P = Q·R`. Returns `R` (`cols × cols`)
/// and `perm` with column `k` of `A·P` being column `perm[k]` of `A`.
fn householder_qr_pivoted<T: Real>(
    a: &mut ComplexMatrix<T>,
    rhs: &mut [Vec<Complex<T>>],
) -> (ComplexMatrix<T>, Vec<usize>) {
    let (p, q) = a.shape();
    let mut perm: Vec<usize> = (0..q).collect();
    let mut v = vec![czero::<T>(); p];
    for k in 0..q {
        let piv = (k..q)
            .map(|j| (j, a.col(j)[k..].iter().map(|z| z.norm_sqr()).sum::<T>()))
            .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0;
        if piv != k {
            let (x, y) = two_cols_mut(a.as_mut_slice(), p, k, piv);
            x.swap_with_slice(y);
            perm.swap(k, piv);
        }
        let normx = vec_norm(&a.col(k)[k..]);
        if normx == T::zero() {
            break;
        }
        let alpha = -(phase(a[(k, k)]) * normx);
        let len = p - k;
        v[..len].copy_from_slice(&a.col(k)[k..]);
        v[0] -= alpha;
        let vnorm2: T = v[..len].iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 > T::zero() {
            let two = T::lit(2.0) / vnorm2;
            let reflect = |col: &mut [Complex<T>]| {
                let s = dotc(&v[..len], col) * two;
                for (c, vi) in col.iter_mut().zip(&v[..len]) {
                    *c -= *vi * s;
                }
            };
            for j in k + 1..q {
                reflect(&mut a.col_mut(j)[k..]);
            }
            for b in rhs.iter_mut() {
                reflect(&mut b[k..]);
            }
        }
        let col = a.col_mut(k);
        col[k] = alpha;
        for z in &mut col[k + 1..] {
            *z = czero();
        }
    }
    (a.submatrix(0, q, 0, q), perm)
}

/// Factorization used by the least-squares solver in the tall case.
///
/// With `A·P = Q·R`, Jacobi runs on `Rᴴ` so that `Rᴴ·Z = W` has orthogonal
/// columns. Returns `(W, Z, c, perm)` where `c` holds the leading entries of `Qᴴb`.
/// Pivoting grades the rows of `R`, which keeps the sweep count low.
#[allow(clippy::type_complexity)]
pub(crate) fn reduce_tall<T: Real>(
    a: &ComplexMatrix<T>,
    b: &[Complex<T>],
) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>, Vec<Complex<T>>, Vec<usize>)> {
    let (_, q) = a.shape();
    let mut qr = a.clone();
    let mut rhs = vec![b.to_vec()];
    let (r, perm) = householder_qr_pivoted(&mut qr, &mut rhs);
    let mut c = rhs.pop().unwrap();
    c.truncate(q);
    let mut w = r.adjoint();
    let mut z = ComplexMatrix::identity(q);
    jacobi(&mut w, &mut z)?;
    Ok((w, z, c, perm))
}

/// Wide-case counterpart: Jacobi on `Aᴴ` so that `Aᴴ·V = W`.
pub(crate) fn reduce_wide<T: Real>(a: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    let mut w = a.adjoint();
    let mut v = ComplexMatrix::identity(a.rows());
    jacobi(&mut w, &mut v)?;
    Ok((w, v))
}

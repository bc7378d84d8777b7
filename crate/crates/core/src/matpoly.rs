//! Matrix polynomials `P(λ) = A₀ + λA₁ + … + λ^d A_d` of a fixed grade.
//!
//! A pencil `A − λB` is stored as the grade-1 polynomial with coefficients
//! `(A, −B)`; conversions to the `A − λB` form only happen at I/O boundaries.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, singular_values, ComplexMatrix};
use crate::scalar::{cone, Field, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial<T: Real> {
    rows: usize,
    cols: usize,
    coeffs: Vec<ComplexMatrix<T>>,
    field: Field,
}

impl<T: Real> MatrixPolynomial<T> {
    /// Validates shapes and the field tag (a real tag requires zero imaginary parts).
    pub fn new(coeffs: Vec<ComplexMatrix<T>>, field: Field) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::Size("a matrix polynomial needs at least one coefficient".into()))?;
        let (rows, cols) = first.shape();
        if let Some(i) = coeffs.iter().position(|c| c.shape() != (rows, cols)) {
            return Err(Error::Size(format!(
                "coefficient {i} is {}x{}, expected {rows}x{cols}",
                coeffs[i].rows(),
                coeffs[i].cols()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("coefficients must be finite".into()));
        }
        if field == Field::Real && coeffs.iter().any(|c| !c.is_real()) {
            return Err(Error::Input("real-tagged polynomial has nonzero imaginary parts".into()));
        }
        Ok(Self { rows, cols, coeffs, field })
    }

    /// Like [`new`](Self::new) but tags the field from the data.
    pub fn from_coeffs(coeffs: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let field = if coeffs.iter().all(|c| c.is_real()) { Field::Real } else { Field::Complex };
        Self::new(coeffs, field)
    }

    pub fn zeros(rows: usize, cols: usize, grade: usize, field: Field) -> Self {
        Self { rows, cols, coeffs: vec![ComplexMatrix::zeros(rows, cols); grade + 1], field }
    }

    /// Pencil `A − λB`, stored as coefficients `(A, −B)`.
    pub fn pencil(a: ComplexMatrix<T>, b: ComplexMatrix<T>) -> Result<Self> {
        Self::from_coeffs(vec![a, -&b])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn grade(&self) -> usize {
        self.coeffs.len() - 1
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn coeffs(&self) -> &[ComplexMatrix<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &ComplexMatrix<T> {
        &self.coeffs[i]
    }

    pub fn into_coeffs(self) -> Vec<ComplexMatrix<T>> {
        self.coeffs
    }

    /// Horner evaluation at `λ0`.
    pub fn evaluate(&self, lambda: Complex<T>) -> ComplexMatrix<T> {
        let mut acc = self.coeffs[self.grade()].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = &acc.scale(lambda) + c;
        }
        acc
    }

    /// `(Σ_i ‖A_i‖_F²)^{1/2}`.
    pub fn norm(&self) -> T {
        self.coeffs.iter().map(|c| c.frob_sq()).sum::<T>().sqrt()
    }

    /// Distance in the coefficient Frobenius metric; the shorter grade is zero-padded.
    pub fn dist(&self, other: &Self) -> Result<T> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Size(format!(
                "cannot compare {}x{} and {}x{} polynomials",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let g = self.grade().max(other.grade());
        let mut total = T::zero();
        for i in 0..=g {
            total += match (self.coeffs.get(i), other.coeffs.get(i)) {
                (Some(a), Some(b)) => (a - b).frob_sq(),
                (Some(a), None) | (None, Some(a)) => a.frob_sq(),
                (None, None) => T::zero(),
            };
        }
        Ok(total.sqrt())
    }

    /// `[vec(A₀); …; vec(A_d)]`.
    pub fn vectorize(&self) -> Vec<Complex<T>> {
        let mut out = Vec::with_capacity(self.coeffs.len() * self.rows * self.cols);
        for c in &self.coeffs {
            out.extend_from_slice(c.as_slice());
        }
        out
    }

    /// Inverse of [`vectorize`](Self::vectorize).
    pub fn from_vectorized(v: &[Complex<T>], rows: usize, cols: usize, grade: usize, field: Field) -> Result<Self> {
        let block = rows * cols;
        if v.len() != block * (grade + 1) {
            return Err(Error::Size(format!(
                "vector of length {} does not hold grade-{grade} {rows}x{cols} coefficients",
                v.len()
            )));
        }
        let coeffs = (0..=grade)
            .map(|i| ComplexMatrix::from_col_major(rows, cols, v[i * block..(i + 1) * block].to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let coeffs = match field {
            Field::Real => coeffs.into_iter().map(|c| c.real_part()).collect(),
            Field::Complex => coeffs,
        };
        Self::new(coeffs, field)
    }

    fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Size(format!("{what} needs a square polynomial, got {}x{}", self.rows, self.cols)))
        }
    }

    /// `max_i ‖A_i + A_iᵀ‖_F`, plain transpose.
    pub fn skew_residual(&self) -> Result<T> {
        self.require_square("skew_residual")?;
        Ok(self
            .coeffs
            .iter()
            .map(|c| (c + &c.transpose()).frob())
            .fold(T::zero(), T::max))
    }

    /// Coefficientwise `(A_i − A_iᵀ)/2`, the nearest skew-symmetric polynomial.
    pub fn skew_part(&self) -> Result<Self> {
        self.require_square("skew_part")?;
        let half = T::lit(0.5);
        let coeffs = self.coeffs.iter().map(|c| (c - &c.transpose()).scale_real(half)).collect();
        Ok(Self { coeffs, ..self.clone() })
    }

    /// Coefficientwise `(A_i + A_iᵀ)/2`.
    pub fn sym_part(&self) -> Result<Self> {
        self.require_square("sym_part")?;
        let half = T::lit(0.5);
        let coeffs = self.coeffs.iter().map(|c| (c + &c.transpose()).scale_real(half)).collect();
        Ok(Self { coeffs, ..self.clone() })
    }

    /// Largest `k` with `‖A_k‖_F > tol·max_i ‖A_i‖_F`, and whether the polynomial is zero.
    pub fn degree(&self, tol: T) -> (usize, bool) {
        let norms: Vec<T> = self.coeffs.iter().map(|c| c.frob()).collect();
        let top = norms.iter().copied().fold(T::zero(), T::max);
        if top == T::zero() {
            return (0, true);
        }
        let k = norms.iter().rposition(|&n| n > tol * top).unwrap_or(0);
        (k, false)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a.try_add(b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a.try_sub(b))
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.scale_real(s)).collect(), ..self.clone() }
    }

    fn combine(
        &self,
        other: &Self,
        f: impl Fn(&ComplexMatrix<T>, &ComplexMatrix<T>) -> Result<ComplexMatrix<T>>,
    ) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Size("polynomial shapes differ".into()));
        }
        let g = self.grade().max(other.grade());
        let zero = ComplexMatrix::zeros(self.rows, self.cols);
        let coeffs = (0..=g)
            .map(|i| f(self.coeffs.get(i).unwrap_or(&zero), other.coeffs.get(i).unwrap_or(&zero)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows: self.rows, cols: self.cols, coeffs, field: self.field.join(other.field) })
    }

    /// Pads with zero coefficients up to `grade`; never truncates.
    pub fn with_grade(&self, grade: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() < grade + 1 {
            coeffs.push(ComplexMatrix::zeros(self.rows, self.cols));
        }
        Self { coeffs, ..self.clone() }
    }

    /// Reinterprets a polynomial with all-real data under the `Real` tag.
    pub fn with_inferred_field(self) -> Self {
        let field = if self.coeffs.iter().all(|c| c.is_real()) { Field::Real } else { Field::Complex };
        Self { field, ..self }
    }

    /// Numerical normal rank: the maximal numerical rank of `P(λ_j)` over
    /// `num_samples` pseudo-random points alternating between the unit circle
    /// and the circle of radius 10.
    pub fn normal_rank_estimate(&self, num_samples: usize, tol: T, seed: u64) -> Result<usize> {
        let mut best = 0;
        for lambda in sample_points(num_samples, seed) {
            let s = singular_values(&self.evaluate(lambda))?;
            best = best.max(numerical_rank(&s, tol));
        }
        Ok(best)
    }
}

/// Deterministic evaluation points: even indices on `|λ| = 1`, odd ones on `|λ| = 10`,
/// with uniformly random angles.
pub fn sample_points<T: Real>(num_samples: usize, seed: u64) -> Vec<Complex<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num_samples.max(1))
        .map(|j| {
            let radius = if j % 2 == 0 { 1.0 } else { 10.0 };
            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            Complex::new(T::lit(radius * theta.cos()), T::lit(radius * theta.sin()))
        })
        .collect()
}

/// Term-by-term `Σ λ^i A_i`; exists to cross-check Horner evaluation.
pub fn evaluate_naive<T: Real>(p: &MatrixPolynomial<T>, lambda: Complex<T>) -> ComplexMatrix<T> {
    let mut acc = ComplexMatrix::zeros(p.rows(), p.cols());
    let mut pow = cone::<T>();
    for c in p.coeffs() {
        acc = &acc + &c.scale(pow);
        pow *= lambda;
    }
    acc
}

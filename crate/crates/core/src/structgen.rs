//! Instance generators: random skew polynomials, canonical skew pencil blocks,
//! generic bounded-rank pencils, rank-one assemblies, congruences and planted
//! near-low-rank instances.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::gears::{assemble, check_rank, gaussian_matrix, init_factors, rng_for, FactorPair, InitMode};
use crate::linalg::{singular_values, ComplexMatrix};
use crate::matpoly::MatrixPolynomial;
use crate::scalar::{cone, creal, Field, Real};

/// RNG stream used for the perturbation of planted instances.
const PLANT_NOISE_STREAM: u64 = 1;

/// Skew polynomial with coefficients `G_i − G_iᵀ`, `G_i` standard normal
/// (independent real and imaginary parts in the complex field).
pub fn random_skew_poly<T: Real>(m: usize, d: usize, field: Field, seed: u64) -> MatrixPolynomial<T> {
    random_skew_poly_stream(m, d, field, seed, 0)
}

/// [`random_skew_poly`] drawn from RNG stream `stream` of `seed`.
pub fn random_skew_poly_stream<T: Real>(m: usize, d: usize, field: Field, seed: u64, stream: u64) -> MatrixPolynomial<T> {
    let mut rng = rng_for(seed, stream);
    let coeffs = (0..=d)
        .map(|_| {
            let g: ComplexMatrix<T> = gaussian_matrix(m, m, field, &mut rng);
            &g - &g.transpose()
        })
        .collect();
    MatrixPolynomial::new(coeffs, field).expect("gaussian coefficients are finite")
}

/// One summand of the congruence canonical form of a skew pencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockDesc<T: Real> {
    /// Finite eigenvalue `μ` with a `h × h` Jordan block; size `2h`.
    H { h: usize, mu: Complex<T> },
    /// Infinite eigenvalue with a `k × k` nilpotent block; size `2k`.
    K { k: usize },
    /// Minimal indices `s`; size `2s + 1`.
    M { s: usize },
}

impl<T: Real> BlockDesc<T> {
    pub fn size(&self) -> usize {
        match *self {
            BlockDesc::H { h, .. } => 2 * h,
            BlockDesc::K { k } => 2 * k,
            BlockDesc::M { s } => 2 * s + 1,
        }
    }
}

/// Parses `H:h:re[:im]`, `K:k` or `M:s`.
impl<T: Real> FromStr for BlockDesc<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Parse(format!("bad block descriptor {s:?}; expected H:h:re[:im], K:k or M:s"));
        let int = |x: &str| x.parse::<usize>().map_err(|_| bad());
        let num = |x: &str| x.parse::<f64>().map(T::lit).map_err(|_| bad());
        match parts.as_slice() {
            ["H", h, re] => Ok(BlockDesc::H { h: int(h)?, mu: creal(num(re)?) }),
            ["H", h, re, im] => Ok(BlockDesc::H { h: int(h)?, mu: Complex::new(num(re)?, num(im)?) }),
            ["K", k] => Ok(BlockDesc::K { k: int(k)? }),
            ["M", s] => Ok(BlockDesc::M { s: int(s)? }),
            _ => Err(bad()),
        }
    }
}

impl<T: Real> fmt::Display for BlockDesc<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockDesc::H { h, mu } if mu.im == T::zero() => write!(f, "H:{h}:{}", mu.re),
            BlockDesc::H { h, mu } => write!(f, "H:{h}:{}:{}", mu.re, mu.im),
            BlockDesc::K { k } => write!(f, "K:{k}"),
            BlockDesc::M { s } => write!(f, "M:{s}"),
        }
    }
}

/// Ordered direct sum of canonical blocks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CanonicalSpec<T: Real> {
    pub blocks: Vec<BlockDesc<T>>,
}

impl<T: Real> CanonicalSpec<T> {
    pub fn size(&self) -> usize {
        self.blocks.iter().map(BlockDesc::size).sum()
    }
}

impl<T: Real> FromStr for CanonicalSpec<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let blocks = s.split(',').filter(|b| !b.trim().is_empty()).map(str::parse).collect::<Result<Vec<_>>>()?;
        Ok(Self { blocks })
    }
}

/// `[[0, X], [−Xᵀ, 0]]` for a `p × q` matrix `X`.
fn skew_embed<T: Real>(x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (p, q) = x.shape();
    let mut out = ComplexMatrix::zeros(p + q, p + q);
    out.set_block(0, p, x);
    out.set_block(p, 0, &-&x.transpose());
    out
}

fn jordan<T: Real>(k: usize, mu: Complex<T>) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(k, k, |i, j| {
        if i == j {
            mu
        } else if j == i + 1 {
            cone()
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// `s × (s+1)` matrix with ones on the superdiagonal (`shift = 1`) or diagonal (`shift = 0`).
fn shifted_eye<T: Real>(s: usize, shift: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(s, s + 1, |i, j| if j == i + shift { cone() } else { creal(T::zero()) })
}

/// The canonical pencil `A − λB` of one block, stored as coefficients `(A, −B)`.
pub fn canonical_block<T: Real>(desc: &BlockDesc<T>) -> Result<MatrixPolynomial<T>> {
    let (a, b) = match *desc {
        BlockDesc::H { h, mu } => {
            if h == 0 {
                return Err(Error::Parameter("H block needs h >= 1".into()));
            }
            (skew_embed(&jordan(h, mu)), skew_embed(&ComplexMatrix::identity(h)))
        }
        BlockDesc::K { k } => {
            if k == 0 {
                return Err(Error::Parameter("K block needs k >= 1".into()));
            }
            (skew_embed(&ComplexMatrix::identity(k)), skew_embed(&jordan(k, creal(T::zero()))))
        }
        BlockDesc::M { s } => (skew_embed(&shifted_eye(s, 1)), skew_embed(&shifted_eye(s, 0))),
    };
    MatrixPolynomial::pencil(a, b)
}

/// Block-diagonal direct sum of the canonical blocks in `spec`.
pub fn canonical_pencil<T: Real>(spec: &CanonicalSpec<T>) -> Result<MatrixPolynomial<T>> {
    if spec.blocks.is_empty() {
        return Err(Error::Parameter("canonical spec has no blocks".into()));
    }
    let m = spec.size();
    let mut a0 = ComplexMatrix::zeros(m, m);
    let mut a1 = ComplexMatrix::zeros(m, m);
    let mut offset = 0;
    for desc in &spec.blocks {
        let block = canonical_block(desc)?;
        a0.set_block(offset, offset, block.coeff(0));
        a1.set_block(offset, offset, block.coeff(1));
        offset += desc.size();
    }
    MatrixPolynomial::from_coeffs(vec![a0, a1])
}

/// Generic minimal-index data of the rank-`2r` skew polynomials of grade `d`:
/// `m − 2r` indices, `t` of them equal to `alpha_or_beta + 1` and the rest
/// equal to `alpha_or_beta`, summing to `r·d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenericIndices {
    pub alpha_or_beta: usize,
    pub t: usize,
    pub count_large: usize,
    pub count_small: usize,
}

impl GenericIndices {
    /// Sizes of the `M` blocks of the generic pencil, largest first.
    pub fn pencil_blocks(&self) -> Vec<usize> {
        let mut sizes = vec![self.alpha_or_beta + 1; self.count_large];
        sizes.extend(std::iter::repeat_n(self.alpha_or_beta, self.count_small));
        sizes
    }
}

fn check_generic(m: usize, r: usize) -> Result<()> {
    if m <= 2 {
        return Err(Error::Parameter(format!("matrix size m = {m} must exceed 2")));
    }
    check_rank(m, r)
}

/// `β = ⌊rd/(m − 2r)⌋`, `t = rd mod (m − 2r)`; for `d = 1` these are the
/// pencil values `α` and `t`.
pub fn generic_indices(m: usize, r: usize, d: usize) -> Result<GenericIndices> {
    check_generic(m, r)?;
    if d == 0 {
        return Err(Error::Parameter("grade must be at least 1".into()));
    }
    let free = m - 2 * r;
    let rd = r * d;
    let t = rd % free;
    Ok(GenericIndices { alpha_or_beta: rd / free, t, count_large: t, count_small: free - t })
}

/// The generic skew pencil of rank `2r`: `t` blocks `M_{α+1}` followed by
/// `m − 2r − t` blocks `M_α`.
pub fn generic_pencil<T: Real>(m: usize, r: usize) -> Result<MatrixPolynomial<T>> {
    let gi = generic_indices(m, r, 1)?;
    let blocks = gi.pencil_blocks().into_iter().map(|s| BlockDesc::M { s }).collect();
    canonical_pencil(&CanonicalSpec { blocks })
}

/// `Σ u_i v_iᵀ − v_i u_iᵀ` for constant `u_i` and `m × 1` polynomials `v_i` of grade ≤ 1.
pub fn rank1_assemble<T: Real>(us: &[Vec<Complex<T>>], vs: &[MatrixPolynomial<T>]) -> Result<MatrixPolynomial<T>> {
    if us.len() != vs.len() || us.is_empty() {
        return Err(Error::Size(format!("need equally many u and v vectors, got {} and {}", us.len(), vs.len())));
    }
    let m = us[0].len();
    let mut coeffs = vec![ComplexMatrix::zeros(m, m); 2];
    for (u, v) in us.iter().zip(vs) {
        if u.len() != m || v.rows() != m || v.cols() != 1 || v.grade() > 1 {
            return Err(Error::Size(format!("vectors must be {m}x1 with grade <= 1")));
        }
        for (i, vk) in v.coeffs().iter().enumerate() {
            for a in 0..m {
                for b in 0..m {
                    coeffs[i][(a, b)] += u[a] * vk[(b, 0)] - vk[(a, 0)] * u[b];
                }
            }
        }
    }
    MatrixPolynomial::from_coeffs(coeffs)
}

/// Condition bound above which a congruence matrix counts as singular.
pub const CONGRUENCE_MAX_COND: f64 = 1e12;

/// Coefficientwise `Sᵀ·A_i·S`.
pub fn congruence<T: Real>(p: &MatrixPolynomial<T>, s: &ComplexMatrix<T>) -> Result<MatrixPolynomial<T>> {
    let m = p.rows();
    if !p.is_square() || s.shape() != (m, m) {
        return Err(Error::Size(format!("congruence needs an {m}x{m} matrix, got {}x{}", s.rows(), s.cols())));
    }
    let sv = singular_values(s)?;
    let (smax, smin) = (sv[0], sv[m - 1]);
    if !(smin > T::zero()) || smax / smin >= T::lit(CONGRUENCE_MAX_COND) {
        return Err(Error::Input("congruence matrix is numerically singular".into()));
    }
    let st = s.transpose();
    let coeffs = p.coeffs().iter().map(|a| &(&st * a) * s).collect();
    MatrixPolynomial::new(coeffs, p.field().join(if s.is_real() { Field::Real } else { Field::Complex }))
}

/// A planted instance `P = Q + E`.
#[derive(Debug, Clone)]
pub struct Planted<T: Real> {
    pub p: MatrixPolynomial<T>,
    /// Rank-`2r` skew polynomial of unit norm.
    pub q: MatrixPolynomial<T>,
    /// Skew perturbation of norm `ε`.
    pub e: MatrixPolynomial<T>,
    /// Factors with `assemble(factors) = Q`.
    pub factors: FactorPair<T>,
}

/// Planted instance: `Q` from random factors scaled to unit norm, `E` a random
/// skew polynomial scaled to norm `epsilon`.
pub fn plant<T: Real>(m: usize, d: usize, r: usize, epsilon: T, field: Field, seed: u64) -> Result<Planted<T>> {
    check_generic(m, r)?;
    if !(epsilon >= T::zero()) || !epsilon.is_finite() {
        return Err(Error::Parameter("epsilon must be finite and nonnegative".into()));
    }
    let factors = init_factors(m, r, d, field, seed, &InitMode::Random, T::one())?;
    let q = assemble(&factors);
    let noise: MatrixPolynomial<T> = random_skew_poly_stream(m, d, field, seed, PLANT_NOISE_STREAM);
    let e = noise.scale_real(epsilon / noise.norm());
    let p = q.try_add(&e)?;
    Ok(Planted { p, q, e, factors })
}

//! Alternating least squares over the factor parameterization
//! `S(λ) = U(λ)V(λ)ᵀ − V(λ)U(λ)ᵀ` of skew-symmetric polynomials of rank ≤ 2r.
//!
//! With `U` of grade ⌊d/2⌋ and `V` of grade ⌈d/2⌉ (both `m × r`), the
//! vectorized product is linear in either factor:
//!
//! ```text
//! vec(S) = M(V)·vec(U) = −M(U)·vec(V)
//! ```
//!
//! where `M(W)` is the block-banded matrix built by [`build_m`]. Each half
//! step is therefore a linear least-squares problem, solved here in the
//! minimum-norm sense.

use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{commutation_matrix, kron, lstsq_min_norm, ComplexMatrix};
use crate::matpoly::MatrixPolynomial;
use crate::scalar::{Field, Real};

/// The factors `(U(λ), V(λ))` of `U·Vᵀ − V·Uᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair<T: Real> {
    u: MatrixPolynomial<T>,
    v: MatrixPolynomial<T>,
}

impl<T: Real> FactorPair<T> {
    /// Checks that both factors are `m × r` with grades `⌊d/2⌋` and `⌈d/2⌉` for some `d`.
    pub fn new(u: MatrixPolynomial<T>, v: MatrixPolynomial<T>) -> Result<Self> {
        if u.rows() != v.rows() || u.cols() != v.cols() {
            return Err(Error::Size(format!(
                "factor shapes differ: U is {}x{}, V is {}x{}",
                u.rows(),
                u.cols(),
                v.rows(),
                v.cols()
            )));
        }
        if u.cols() == 0 {
            return Err(Error::Parameter("factors need at least one column".into()));
        }
        let d = u.grade() + v.grade();
        if u.grade() != d / 2 || v.grade() != d.div_ceil(2) {
            return Err(Error::Size(format!(
                "factor grades ({}, {}) do not split a total grade as (⌊d/2⌋, ⌈d/2⌉)",
                u.grade(),
                v.grade()
            )));
        }
        Ok(Self { u, v })
    }

    pub fn u(&self) -> &MatrixPolynomial<T> {
        &self.u
    }

    pub fn v(&self) -> &MatrixPolynomial<T> {
        &self.v
    }

    pub fn m(&self) -> usize {
        self.u.rows()
    }

    /// Half-rank `r` (number of factor columns).
    pub fn r(&self) -> usize {
        self.u.cols()
    }

    /// Total grade `d`.
    pub fn grade(&self) -> usize {
        self.u.grade() + self.v.grade()
    }

    pub fn into_parts(self) -> (MatrixPolynomial<T>, MatrixPolynomial<T>) {
        (self.u, self.v)
    }

    fn scaled(&self, s: T) -> Self {
        Self { u: self.u.scale_real(s), v: self.v.scale_real(s) }
    }
}

/// Rejects target ranks outside `2 ≤ 2r ≤ m − 1`.
pub fn check_rank(m: usize, r: usize) -> Result<()> {
    if r == 0 || 2 * r + 1 > m {
        return Err(Error::Parameter(format!(
            "target rank 2r = {} must satisfy 2 <= 2r <= m - 1 = {}",
            2 * r,
            m as isize - 1
        )));
    }
    Ok(())
}

/// `S(λ) = U(λ)V(λ)ᵀ − V(λ)U(λ)ᵀ`; coefficient `i` is `Σ_{k+l=i} U_k V_lᵀ − V_l U_kᵀ`.
pub fn assemble<T: Real>(f: &FactorPair<T>) -> MatrixPolynomial<T> {
    let m = f.m();
    let d = f.grade();
    let mut coeffs = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let mut y = ComplexMatrix::zeros(m, m);
        for k in 0..=f.u.grade().min(i) {
            let l = i - k;
            if l > f.v.grade() {
                continue;
            }
            y = &y + &(f.u.coeff(k) * &f.v.coeff(l).transpose());
        }
        coeffs.push(&y - &y.transpose());
    }
    MatrixPolynomial::new(coeffs, f.u.field().join(f.v.field()))
        .expect("assembled coefficients share one shape")
}

/// `(W ⊗ I_m) − (I_m ⊗ W)·N` for an `m × r` matrix `W`.
fn kron_block<T: Real>(w: &ComplexMatrix<T>, n: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let m = w.rows();
    let eye = ComplexMatrix::identity(m);
    let left = kron(w, &eye)?;
    let right = kron(&eye, w)?.try_matmul(n)?;
    left.try_sub(&right)
}

/// The `(d+1)m² × (d−t+1)mr` operator `M(W)` for `W` of grade `t`: block column
/// `j` holds `(W_k ⊗ I) − (I ⊗ W_k)N` in block row `j + k`, `k = 0..=t`.
pub fn build_m<T: Real>(w: &MatrixPolynomial<T>, d: usize) -> Result<ComplexMatrix<T>> {
    let t = w.grade();
    if t > d {
        return Err(Error::Size(format!("factor grade {t} exceeds total grade {d}")));
    }
    let (m, r) = (w.rows(), w.cols());
    let n = commutation_matrix(m, r);
    let blocks = w.coeffs().iter().map(|wk| kron_block(wk, &n)).collect::<Result<Vec<_>>>()?;
    let (bh, bw) = (m * m, m * r);
    let mut out = ComplexMatrix::zeros((d + 1) * bh, (d - t + 1) * bw);
    for j in 0..=d - t {
        for (k, block) in blocks.iter().enumerate() {
            out.set_block((j + k) * bh, j * bw, block);
        }
    }
    Ok(out)
}

fn check_step_inputs<T: Real>(p: &MatrixPolynomial<T>, w: &MatrixPolynomial<T>, grade: usize, what: &str) -> Result<()> {
    if !p.is_square() {
        return Err(Error::Size(format!("target must be square, got {}x{}", p.rows(), p.cols())));
    }
    if w.rows() != p.rows() || w.grade() != grade {
        return Err(Error::Size(format!(
            "{what} must have {} rows and grade {grade}, got {} rows and grade {}",
            p.rows(),
            w.rows(),
            w.grade()
        )));
    }
    Ok(())
}

/// Fixes `U` and returns the minimum-norm minimizer `V` of
/// `‖vec(P) + M(U)·vec(V)‖`, with the attained distance `‖P − (UVᵀ − VUᵀ)‖`.
pub fn v_step<T: Real>(p: &MatrixPolynomial<T>, u: &MatrixPolynomial<T>) -> Result<(MatrixPolynomial<T>, T)> {
    let d = p.grade();
    check_step_inputs(p, u, d / 2, "U")?;
    let mop = build_m(u, d)?;
    let rhs: Vec<Complex<T>> = p.vectorize().into_iter().map(|z| -z).collect();
    let x = lstsq_min_norm(&mop, &rhs)?;
    let field = p.field().join(u.field());
    let v = MatrixPolynomial::from_vectorized(&x, p.rows(), u.cols(), d.div_ceil(2), field)?;
    let dist = p.dist(&assemble(&FactorPair { u: u.clone(), v: v.clone() }))?;
    Ok((v, dist))
}

/// Fixes `V` and returns the minimum-norm minimizer `U` of
/// `‖vec(P) − M(V)·vec(U)‖`, with the attained distance.
pub fn u_step<T: Real>(p: &MatrixPolynomial<T>, v: &MatrixPolynomial<T>) -> Result<(MatrixPolynomial<T>, T)> {
    let d = p.grade();
    check_step_inputs(p, v, d.div_ceil(2), "V")?;
    let mop = build_m(v, d)?;
    let x = lstsq_min_norm(&mop, &p.vectorize())?;
    let field = p.field().join(v.field());
    let u = MatrixPolynomial::from_vectorized(&x, p.rows(), v.cols(), d / 2, field)?;
    let dist = p.dist(&assemble(&FactorPair { u: u.clone(), v: v.clone() }))?;
    Ok((u, dist))
}

/// Starting point of an ALS run.
#[derive(Debug, Clone, Default)]
pub enum InitMode<T: Real> {
    /// I.i.d. standard normal coefficients (independent real and imaginary
    /// parts in the complex field), rescaled to a target norm.
    #[default]
    Random,
    /// Start from the given factors.
    Warm(FactorPair<T>),
}

/// Deterministic RNG stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn gaussian_matrix<T: Real>(rows: usize, cols: usize, field: Field, rng: &mut ChaCha8Rng) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = match field {
            Field::Real => 0.0,
            Field::Complex => StandardNormal.sample(rng),
        };
        Complex::new(T::lit(re), T::lit(im))
    })
}

fn random_factors<T: Real>(m: usize, r: usize, d: usize, field: Field, rng: &mut ChaCha8Rng) -> FactorPair<T> {
    let mut draw = |grade: usize| {
        let coeffs = (0..=grade).map(|_| gaussian_matrix(m, r, field, rng)).collect();
        MatrixPolynomial::new(coeffs, field).expect("gaussian coefficients are finite")
    };
    let u = draw(d / 2);
    let v = draw(d.div_ceil(2));
    FactorPair { u, v }
}

/// Initial factors for target half-rank `r` and grade `d`.
///
/// Random mode draws from stream 0 of `seed` and scales both factors by a
/// common factor so that `‖assemble(F)‖ = target_norm`. Warm mode validates
/// and returns the given pair.
pub fn init_factors<T: Real>(
    m: usize,
    r: usize,
    d: usize,
    field: Field,
    seed: u64,
    mode: &InitMode<T>,
    target_norm: T,
) -> Result<FactorPair<T>> {
    init_factors_stream(m, r, d, field, seed, 0, mode, target_norm)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn init_factors_stream<T: Real>(
    m: usize,
    r: usize,
    d: usize,
    field: Field,
    seed: u64,
    stream: u64,
    mode: &InitMode<T>,
    target_norm: T,
) -> Result<FactorPair<T>> {
    check_rank(m, r)?;
    match mode {
        InitMode::Warm(f) => {
            if f.m() != m || f.r() != r || f.grade() != d {
                return Err(Error::Parameter(format!(
                    "warm start factors are {}x{} of grade {}, expected {m}x{r} of grade {d}",
                    f.m(),
                    f.r(),
                    f.grade()
                )));
            }
            Ok(f.clone())
        }
        InitMode::Random => {
            let mut rng = rng_for(seed, stream);
            let f: FactorPair<T> = random_factors(m, r, d, field, &mut rng);
            let n0 = assemble(&f).norm();
            if n0 == T::zero() || !n0.is_finite() {
                return Err(Error::Numerical("random factors assembled to a zero polynomial".into()));
            }
            Ok(f.scaled((target_norm / n0).sqrt()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct GearsOptions<T: Real> {
    /// Stop when the distance to the skew part of `P` drops by less than
    /// `tol_rel` times its norm in one sweep. `None` picks 1e−4 for complex
    /// and 1e−3 for real inputs.
    pub tol_rel: Option<T>,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Stop once the distance to the skew part of `P` is at most `abs_floor`.
    /// `None` means 1e−14 times the norm of that skew part.
    pub abs_floor: Option<T>,
    pub init: InitMode<T>,
    /// Replace the target by its skew-symmetric part before iterating.
    pub pre_skew: bool,
}

impl<T: Real> Default for GearsOptions<T> {
    fn default() -> Self {
        Self {
            tol_rel: None,
            max_iter: 500,
            restarts: 5,
            seed: 0,
            abs_floor: None,
            init: InitMode::Random,
            pre_skew: false,
        }
    }
}

impl<T: Real> GearsOptions<T> {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Parameter("restarts must be at least 1".into()));
        }
        if let Some(t) = self.tol_rel {
            if !(t > T::zero()) {
                return Err(Error::Parameter("tol_rel must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn tol_rel_for(&self, field: Field) -> T {
        self.tol_rel.unwrap_or_else(|| match field {
            Field::Complex => T::lit(1e-4),
            Field::Real => T::lit(1e-3),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Progress per sweep fell below the relative tolerance, or the sweep
    /// stopped decreasing the distance.
    Converged,
    MaxIter,
    FloorReached,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIter => "max_iter",
            Status::FloorReached => "floor_reached",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GearsResult<T: Real> {
    /// The approximant `assemble(factors)`.
    pub s: MatrixPolynomial<T>,
    pub factors: FactorPair<T>,
    /// `ρ_k = ‖P − S^{(k)}‖` after each full (V, U) sweep.
    pub distances: Vec<T>,
    /// Wall time since the start of the winning restart at the end of each sweep.
    pub elapsed: Vec<Duration>,
    pub iterations: usize,
    pub status: Status,
    pub restart_index: usize,
    /// Distance after the first V-step of the winning restart.
    pub first_v_distance: T,
    /// Whether the target was replaced by its skew part before iterating.
    pub pre_skewed: bool,
}

impl<T: Real> GearsResult<T> {
    pub fn distance(&self) -> T {
        *self.distances.last().expect("at least one sweep")
    }
}

/// One ALS sweep: returns the factors after the V-step and after the U-step.
pub(crate) type Sweep<'a, T> =
    dyn Fn(&MatrixPolynomial<T>, &FactorPair<T>) -> Result<(FactorPair<T>, FactorPair<T>)> + Sync + 'a;

fn gears_sweep<T: Real>(p: &MatrixPolynomial<T>, f: &FactorPair<T>) -> Result<(FactorPair<T>, FactorPair<T>)> {
    let (v, _) = v_step(p, &f.u)?;
    let after_v = FactorPair { u: f.u.clone(), v };
    let (u, _) = u_step(p, &after_v.v)?;
    let after_u = FactorPair { u, v: after_v.v.clone() };
    Ok((after_v, after_u))
}

pub(crate) fn validate_target<T: Real>(p: &MatrixPolynomial<T>, r: usize) -> Result<()> {
    if !p.is_square() {
        return Err(Error::Size(format!("target must be square, got {}x{}", p.rows(), p.cols())));
    }
    if p.rows() <= 2 {
        return Err(Error::Parameter(format!("matrix size m = {} must exceed 2", p.rows())));
    }
    check_rank(p.rows(), r)
}

/// ALS driver shared by the general and pencil variants. Distances are always
/// measured against `original`; `work` is what the sweeps fit.
pub(crate) fn drive<T: Real>(
    original: &MatrixPolynomial<T>,
    work: &MatrixPolynomial<T>,
    r: usize,
    opts: &GearsOptions<T>,
    pre_skewed: bool,
    sweep: &Sweep<'_, T>,
) -> Result<GearsResult<T>> {
    opts.validate()?;
    // The fitted family is skew, so the symmetric part of the target only adds
    // a constant to the squared distance. Stopping decisions use the distance
    // to the skew part, which makes a run independent of that constant.
    let skew = original.skew_part()?;
    let norm = skew.norm();
    let tol = opts.tol_rel_for(original.field()) * norm;
    let floor = opts.abs_floor.unwrap_or(T::lit(1e-14) * norm);
    let target = if norm > T::zero() { norm } else { T::one() };
    let (m, d) = (original.rows(), original.grade());

    let single = |restart: usize| -> Result<GearsResult<T>> {
        let mut f = init_factors_stream(m, r, d, work.field(), opts.seed, restart as u64, &opts.init, target)?;
        let start = Instant::now();
        let mut distances: Vec<T> = Vec::new();
        let mut elapsed = Vec::new();
        let mut first_v = None;
        let mut status = Status::MaxIter;
        let mut prev: Option<T> = None;
        for _ in 0..opts.max_iter {
            let (after_v, after_u) = sweep(work, &f)?;
            if first_v.is_none() {
                first_v = Some(original.dist(&assemble(&after_v))?);
            }
            let s = assemble(&after_u);
            let rho = skew.dist(&s)?;
            if prev.is_some_and(|prev| rho > prev) {
                // Roundoff-level stagnation; keep the previous iterate.
                status = Status::Converged;
                break;
            }
            f = after_u;
            distances.push(original.dist(&s)?);
            elapsed.push(start.elapsed());
            if rho <= floor {
                status = Status::FloorReached;
                break;
            }
            if prev.is_some_and(|prev| prev - rho < tol) {
                status = Status::Converged;
                break;
            }
            prev = Some(rho);
        }
        Ok(GearsResult {
            s: assemble(&f),
            iterations: distances.len(),
            factors: f,
            distances,
            elapsed,
            status,
            restart_index: restart,
            first_v_distance: first_v.expect("max_iter >= 1"),
            pre_skewed,
        })
    };

    let restarts = match opts.init {
        InitMode::Warm(_) => 1,
        InitMode::Random => opts.restarts,
    };
    let results = (0..restarts).into_par_iter().map(single).collect::<Result<Vec<_>>>()?;
    let best = results
        .into_iter()
        .reduce(|best, cand| if cand.distance() < best.distance() { cand } else { best })
        .expect("restarts >= 1");
    Ok(best)
}

/// Nearest skew-symmetric polynomial of rank ≤ 2r found by alternating
/// least squares over the factors, best of `opts.restarts` random starts.
pub fn run<T: Real>(p: &MatrixPolynomial<T>, r: usize, opts: &GearsOptions<T>) -> Result<GearsResult<T>> {
    validate_target(p, r)?;
    let work = if opts.pre_skew { p.skew_part()? } else { p.clone() };
    drive(p, &work, r, opts, opts.pre_skew, &gears_sweep)
}

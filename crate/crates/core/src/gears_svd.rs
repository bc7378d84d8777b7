//! Pencil variant of the alternating least squares with closed-form V-steps.
//!
//! For a pencil the constant factor `U` is a plain `m × r` matrix, and the
//! V-step splits into two independent problems, one per coefficient. Each is
//! solved through the SVD `U = R·S·Tᴴ`: with `E = Rᴴ·C·R̄` and `X = Rᴴ·V·T̄`,
//! the objective becomes `‖E − (S·Xᵀ − X·Sᵀ)‖`, which decouples entrywise.

use crate::error::{Error, Result};
use crate::gears::{drive, validate_target, FactorPair, GearsOptions, GearsResult};
use crate::linalg::{commutation_matrix, kron, lstsq_min_norm, svd_full, ComplexMatrix};
use crate::matpoly::MatrixPolynomial;
use crate::scalar::{czero, Real};

/// Intermediate quantities of one closed-form V-step.
#[derive(Debug, Clone)]
pub struct SvdTransform<T: Real> {
    /// `m × m` unitary left factor of `U`.
    pub r: ComplexMatrix<T>,
    /// Leading `r` singular values of `U`.
    pub s1: Vec<T>,
    /// `r × r` unitary right factor of `U`.
    pub t: ComplexMatrix<T>,
    /// `Rᴴ·C·R̄`.
    pub e: ComplexMatrix<T>,
    /// Skew-symmetric top block of `X`.
    pub x1: ComplexMatrix<T>,
    /// Bottom `(m − r) × r` block of `X`.
    pub x2: ComplexMatrix<T>,
}

impl<T: Real> SvdTransform<T> {
    /// `V = R·[X₁; X₂]·Tᵀ`.
    pub fn v(&self) -> ComplexMatrix<T> {
        let x = ComplexMatrix::vstack(&[&self.x1, &self.x2]).expect("blocks share column count");
        &(&self.r * &x) * &self.t.transpose()
    }

    /// `S·Xᵀ − X·Sᵀ` with the rectangular `S = [S₁; 0]`.
    pub fn transformed_fit(&self) -> ComplexMatrix<T> {
        let m = self.r.rows();
        let x = ComplexMatrix::vstack(&[&self.x1, &self.x2]).expect("blocks share column count");
        let mut sx = ComplexMatrix::zeros(m, m);
        for (i, &s) in self.s1.iter().enumerate() {
            for j in 0..m {
                sx[(i, j)] = x[(j, i)] * s;
            }
        }
        &sx - &sx.transpose()
    }
}

fn skew_error<T: Real>(c: &ComplexMatrix<T>) -> T {
    (c + &c.transpose()).frob()
}

/// Minimizes `‖C − (U·Vᵀ − V·Uᵀ)‖_F` over `V` for skew `C`, returning `V`,
/// the attained residual and the transform it was computed from.
pub fn solve_v_single_with_transform<T: Real>(
    c: &ComplexMatrix<T>,
    u: &ComplexMatrix<T>,
) -> Result<(ComplexMatrix<T>, T, SvdTransform<T>)> {
    let (m, r) = u.shape();
    if c.shape() != (m, m) {
        return Err(Error::Size(format!("target is {}x{}, factor has {m} rows", c.rows(), c.cols())));
    }
    if r > m {
        return Err(Error::Size(format!("factor has more columns ({r}) than rows ({m})")));
    }
    if !c.is_finite() || !u.is_finite() {
        return Err(Error::Input("non-finite entries in the V-step data".into()));
    }
    if skew_error(c) > T::lit(1e-10) * c.frob() {
        return Err(Error::Input("closed-form V-step needs a skew-symmetric target".into()));
    }

    let svd = svd_full(u)?;
    let smax = svd.singular_values.first().copied().unwrap_or_else(T::zero);
    let cutoff = T::from_usize_lossy(m.max(r)) * T::unit_roundoff() * smax;
    let s1: Vec<T> = svd
        .singular_values
        .iter()
        .map(|&s| if s > cutoff { s } else { T::zero() })
        .collect();
    let e = &(&svd.r.adjoint() * c) * &svd.r.conj();

    let mut x1 = ComplexMatrix::zeros(r, r);
    for i in 0..r {
        for j in i + 1..r {
            let denom = s1[i] + s1[j];
            if denom > T::zero() {
                let x = e[(i, j)] / denom;
                x1[(j, i)] = x;
                x1[(i, j)] = -x;
            }
        }
    }
    let x2 = ComplexMatrix::from_fn(m - r, r, |i, j| {
        if s1[j] > T::zero() {
            e[(j, r + i)] / s1[j]
        } else {
            czero()
        }
    });

    let transform = SvdTransform { r: svd.r, s1, t: svd.t, e, x1, x2 };
    let v = transform.v();
    let fit = &(u * &v.transpose()) - &(&v * &u.transpose());
    let residual = (c - &fit).frob();
    Ok((v, residual, transform))
}

/// Closed-form V-step for one skew coefficient.
pub fn solve_v_single<T: Real>(c: &ComplexMatrix<T>, u: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, T)> {
    solve_v_single_with_transform(c, u).map(|(v, res, _)| (v, res))
}

fn check_pencil<T: Real>(p: &MatrixPolynomial<T>) -> Result<()> {
    if p.grade() != 1 {
        return Err(Error::Parameter(format!("pencil routines need grade 1, got grade {}", p.grade())));
    }
    if !p.is_square() {
        return Err(Error::Size(format!("pencil must be square, got {}x{}", p.rows(), p.cols())));
    }
    Ok(())
}

/// V-step for a skew pencil: `(V₀, V₁, residual)` with each `V_i` fitted to `A_i`.
pub fn pencil_v_step<T: Real>(
    p: &MatrixPolynomial<T>,
    u: &ComplexMatrix<T>,
) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>, T)> {
    check_pencil(p)?;
    let (v0, r0) = solve_v_single(p.coeff(0), u)?;
    let (v1, r1) = solve_v_single(p.coeff(1), u)?;
    Ok((v0, v1, (r0 * r0 + r1 * r1).sqrt()))
}

/// U-step for a pencil: minimum-norm solution of the stacked system
/// `[(V₀⊗I) − (I⊗V₀)N; (V₁⊗I) − (I⊗V₁)N]·vec(U) = [vec A₀; vec A₁]`.
pub fn pencil_u_step<T: Real>(
    p: &MatrixPolynomial<T>,
    v0: &ComplexMatrix<T>,
    v1: &ComplexMatrix<T>,
) -> Result<(ComplexMatrix<T>, T)> {
    check_pencil(p)?;
    let m = p.rows();
    if v0.rows() != m || v1.shape() != v0.shape() {
        return Err(Error::Size(format!(
            "V blocks must both be {m}xr, got {}x{} and {}x{}",
            v0.rows(),
            v0.cols(),
            v1.rows(),
            v1.cols()
        )));
    }
    let r = v0.cols();
    let n = commutation_matrix(m, r);
    let eye = ComplexMatrix::identity(m);
    let block = |w: &ComplexMatrix<T>| -> Result<ComplexMatrix<T>> {
        kron(w, &eye)?.try_sub(&kron(&eye, w)?.try_matmul(&n)?)
    };
    let stacked = ComplexMatrix::vstack(&[&block(v0)?, &block(v1)?])?;
    let x = lstsq_min_norm(&stacked, &p.vectorize())?;
    let u = ComplexMatrix::from_col_major(m, r, x)?;
    let fit0 = &(&u * &v0.transpose()) - &(v0 * &u.transpose());
    let fit1 = &(&u * &v1.transpose()) - &(v1 * &u.transpose());
    let residual = ((p.coeff(0) - &fit0).frob_sq() + (p.coeff(1) - &fit1).frob_sq()).sqrt();
    Ok((u, residual))
}

fn pencil_sweep<T: Real>(p: &MatrixPolynomial<T>, f: &FactorPair<T>) -> Result<(FactorPair<T>, FactorPair<T>)> {
    let u = f.u().coeff(0);
    let (v0, v1, _) = pencil_v_step(p, u)?;
    let field = p.field().join(f.u().field());
    let v = MatrixPolynomial::new(vec![v0.clone(), v1.clone()], field)?;
    let after_v = FactorPair::new(f.u().clone(), v.clone())?;
    let (u_new, _) = pencil_u_step(p, &v0, &v1)?;
    let after_u = FactorPair::new(MatrixPolynomial::new(vec![u_new], field)?, v)?;
    Ok((after_v, after_u))
}

/// Pencil counterpart of [`crate::gears::run`]. Non-skew input is replaced by
/// its skew part for the sweeps; distances are reported against the input.
pub fn run_pencil<T: Real>(p: &MatrixPolynomial<T>, r: usize, opts: &GearsOptions<T>) -> Result<GearsResult<T>> {
    check_pencil(p)?;
    validate_target(p, r)?;
    let skew = p.skew_residual()? == T::zero();
    let work = if skew { p.clone() } else { p.skew_part()? };
    drive(p, &work, r, opts, !skew, &pencil_sweep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gears::{assemble, init_factors, rng_for, u_step, v_step, InitMode};
    use crate::scalar::{creal, Field};
    use num_complex::Complex;
    use rand::Rng;

    fn random(m: usize, n: usize, seed: u64) -> ComplexMatrix<f64> {
        let mut rng = rng_for(seed, 1);
        ComplexMatrix::from_fn(m, n, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_skew(m: usize, seed: u64) -> ComplexMatrix<f64> {
        let a = random(m, m, seed);
        &a - &a.transpose()
    }

    fn random_skew_pencil(m: usize, seed: u64) -> MatrixPolynomial<f64> {
        MatrixPolynomial::new(vec![random_skew(m, seed), random_skew(m, seed + 1000)], Field::Complex).unwrap()
    }

    fn skew_fit(u: &ComplexMatrix<f64>, v: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
        &(u * &v.transpose()) - &(v * &u.transpose())
    }

    #[test]
    fn zero_factor_gives_zero_v() {
        let c = random_skew(5, 1);
        let (v, res) = solve_v_single(&c, &ComplexMatrix::zeros(5, 2)).unwrap();
        assert_eq!(v, ComplexMatrix::zeros(5, 2));
        assert!((res - c.frob()).abs() <= 1e-15 * c.frob());
    }

    #[test]
    fn x1_formula_on_diagonal_example() {
        let c = ComplexMatrix::from_real_rows(&[&[0.0, 3.0], &[-3.0, 0.0]]);
        let u = ComplexMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let (_, res, tr) = solve_v_single_with_transform(&c, &u).unwrap();
        assert_eq!(tr.s1, vec![2.0, 1.0]);
        // R and T are unimodular diagonal here, so E equals C up to those phases.
        let expected = ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let unimodular_real = (0..2).all(|i| tr.r[(i, i)] == creal(1.0) && tr.t[(i, i)] == creal(1.0));
        if unimodular_real {
            assert_eq!(tr.x1, expected);
        }
        let s1 = ComplexMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let lhs = &(&s1 * &expected.transpose()) - &(&expected * &s1);
        assert_eq!(lhs, c);
        assert!(res <= 1e-14);
    }

    #[test]
    fn x1_is_exactly_skew() {
        let (_, _, tr) = solve_v_single_with_transform(&random_skew(6, 2), &random(6, 3, 3)).unwrap();
        assert_eq!(tr.x1.transpose(), -&tr.x1);
        assert!(skew_error(&tr.e) <= 1e-12 * tr.e.frob());
    }

    #[test]
    fn feasible_target_is_fitted() {
        for seed in 0..10 {
            let u = random(6, 2, seed);
            let c = skew_fit(&u, &random(6, 2, seed + 50));
            let (_, res) = solve_v_single(&c, &u).unwrap();
            assert!(res <= 1e-10 * c.frob(), "seed {seed}: {res}");
        }
    }

    #[test]
    fn unitary_invariance_of_objective() {
        let c = random_skew(7, 4);
        let u = random(7, 3, 5);
        let (v, res, tr) = solve_v_single_with_transform(&c, &u).unwrap();
        let transformed = (&tr.e - &tr.transformed_fit()).frob();
        assert!((transformed - res).abs() <= 1e-11 * res);
        assert!(((&c - &skew_fit(&u, &v)).frob() - res).abs() <= 1e-12 * c.frob());
    }

    #[test]
    fn matches_general_v_step_minimum() {
        for seed in 0..5 {
            let c = random_skew(6, 10 + seed);
            let u = random(6, 2, 20 + seed);
            let (_, res) = solve_v_single(&c, &u).unwrap();
            let p = MatrixPolynomial::new(vec![c.clone()], Field::Complex).unwrap();
            let up = MatrixPolynomial::new(vec![u.clone()], Field::Complex).unwrap();
            let (_, general) = v_step(&p, &up).unwrap();
            assert!(res <= general + 1e-10 * c.frob());
            assert!(general <= res + 1e-10 * c.frob());
        }
    }

    #[test]
    fn pseudo_inverse_matches_plain_inverse_at_full_rank() {
        let c = random_skew(6, 30);
        let u = random(6, 3, 31);
        let (v, _, tr) = solve_v_single_with_transform(&c, &u).unwrap();
        // Rebuild X with ordinary division by the (all positive) singular values.
        let r = 3;
        let mut x = ComplexMatrix::zeros(6, r);
        for i in 0..r {
            for j in 0..r {
                if i != j {
                    x[(j, i)] = tr.e[(i, j)] / (tr.s1[i] + tr.s1[j]);
                }
            }
        }
        for i in r..6 {
            for j in 0..r {
                x[(i, j)] = tr.e[(j, i)] * (1.0 / tr.s1[j]);
            }
        }
        let v_inv = &(&tr.r * &x) * &tr.t.transpose();
        assert!((&v - &v_inv).frob() <= 1e-12 * v.frob());
    }

    #[test]
    fn rank_deficient_factor_is_handled() {
        let a = random(6, 1, 40);
        let u = ComplexMatrix::from_fn(6, 2, |i, _| a[(i, 0)]);
        let c = random_skew(6, 41);
        let (v, res) = solve_v_single(&c, &u).unwrap();
        assert!(v.is_finite());
        let p = MatrixPolynomial::new(vec![c.clone()], Field::Complex).unwrap();
        let up = MatrixPolynomial::new(vec![u], Field::Complex).unwrap();
        let (_, general) = v_step(&p, &up).unwrap();
        assert!((res - general).abs() <= 1e-10 * c.frob());
    }

    #[test]
    fn rejects_non_skew_target() {
        let c = random(4, 4, 50);
        assert!(matches!(solve_v_single(&c, &random(4, 1, 51)), Err(Error::Input(_))));
    }

    #[test]
    fn zero_pencil_steps() {
        let p = MatrixPolynomial::<f64>::zeros(5, 5, 1, Field::Complex);
        let (v0, v1, res) = pencil_v_step(&p, &random(5, 2, 60)).unwrap();
        assert_eq!((v0.frob(), v1.frob(), res), (0.0, 0.0, 0.0));
        let p = random_skew_pencil(5, 61);
        let z = ComplexMatrix::zeros(5, 2);
        let (u, res) = pencil_u_step(&p, &z, &z).unwrap();
        assert_eq!(u.frob(), 0.0);
        assert!((res - p.norm()).abs() <= 1e-15 * p.norm());
    }

    #[test]
    fn pencil_steps_agree_with_general_steps() {
        for seed in 0..5 {
            let p = random_skew_pencil(6, 70 + seed);
            let u = random(6, 2, 80 + seed);
            let (v0, v1, res) = pencil_v_step(&p, &u).unwrap();
            let up = MatrixPolynomial::new(vec![u], Field::Complex).unwrap();
            let (_, general) = v_step(&p, &up).unwrap();
            assert!((res - general).abs() <= 1e-10 * general);

            let (_, ures) = pencil_u_step(&p, &v0, &v1).unwrap();
            let vp = MatrixPolynomial::new(vec![v0, v1], Field::Complex).unwrap();
            let (_, ugeneral) = u_step(&p, &vp).unwrap();
            assert!((ures - ugeneral).abs() <= 1e-10 * ugeneral);
        }
    }

    #[test]
    fn feasible_pencil_u_step() {
        let f = init_factors::<f64>(6, 2, 1, Field::Complex, 90, &InitMode::Random, 1.0).unwrap();
        let p = assemble(&f);
        let (_, res) = pencil_u_step(&p, f.v().coeff(0), f.v().coeff(1)).unwrap();
        assert!(res <= 1e-10 * p.norm());
    }

    #[test]
    fn grade_two_input_is_rejected() {
        let p = MatrixPolynomial::<f64>::zeros(5, 5, 2, Field::Real);
        assert!(matches!(run_pencil(&p, 1, &GearsOptions::default()), Err(Error::Parameter(_))));
    }

    #[test]
    fn odd_size_pencils_reach_zero() {
        for (m, seed) in [(3, 1), (5, 2)] {
            let p = random_skew_pencil(m, 100 + seed);
            let opts = GearsOptions { tol_rel: Some(1e-12), ..Default::default() };
            let res = run_pencil(&p, (m - 1) / 2, &opts).unwrap();
            assert!(res.distance() <= 1e-8 * p.norm(), "m = {m}: {}", res.distance());
        }
    }

    #[test]
    fn first_v_step_matches_general_run() {
        let p = random_skew_pencil(6, 110);
        let opts = GearsOptions { max_iter: 1, restarts: 1, seed: 3, ..Default::default() };
        let a = run_pencil(&p, 2, &opts).unwrap();
        let b = crate::gears::run(&p, 2, &opts).unwrap();
        assert!((a.first_v_distance - b.first_v_distance).abs() <= 1e-10 * b.first_v_distance);
    }

    #[test]
    fn non_skew_input_reports_orthogonal_split() {
        let mut p = random_skew_pencil(5, 120);
        let sym = random(5, 5, 121);
        let sym = &sym + &sym.transpose();
        p = MatrixPolynomial::new(vec![p.coeff(0) + &sym, p.coeff(1).clone()], Field::Complex).unwrap();
        let opts = GearsOptions { restarts: 1, seed: 4, ..Default::default() };
        let res = run_pencil(&p, 2, &opts).unwrap();
        assert!(res.pre_skewed);
        let skew_only = run_pencil(&p.skew_part().unwrap(), 2, &opts).unwrap();
        let sym_sq = p.sym_part().unwrap().norm().powi(2);
        let lhs = res.distance().powi(2);
        let rhs = skew_only.distance().powi(2) + sym_sq;
        assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn traces_are_monotone() {
        let p = random_skew_pencil(8, 130);
        let opts = GearsOptions { max_iter: 60, restarts: 2, seed: 5, ..Default::default() };
        let res = run_pencil(&p, 3, &opts).unwrap();
        for w in res.distances.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }
}

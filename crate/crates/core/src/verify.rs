//! Post-hoc checks of computed approximants.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gears::GearsResult;
use crate::linalg::{numerical_rank, singular_values};
use crate::matpoly::{sample_points, MatrixPolynomial};
use crate::scalar::Real;

/// Relative slack allowed between consecutive trace entries.
pub const MONOTONE_SLACK: f64 = 1e-12;
/// Relative threshold for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-10;
/// Number of evaluation points used for rank profiles.
pub const RANK_SAMPLES: usize = 10;

/// Rectangular grid of evaluation points `x + i·y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, step: f64) -> Result<Self> {
        let g = Self { x_min, x_max, y_min, y_max, step };
        g.validate()?;
        Ok(g)
    }

    /// `(−100:10:100)²`.
    pub fn desk() -> Self {
        Self { x_min: -100.0, x_max: 100.0, y_min: -100.0, y_max: 100.0, step: 10.0 }
    }

    /// `(−1000:40:1000)²`.
    pub fn wide() -> Self {
        Self { x_min: -1000.0, x_max: 1000.0, y_min: -1000.0, y_max: 1000.0, step: 40.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.x_min, self.x_max, self.y_min, self.y_max, self.step];
        if all.iter().any(|v| !v.is_finite()) || !(self.step > 0.0) {
            return Err(Error::Parameter("grid bounds must be finite and the step positive".into()));
        }
        if self.x_max < self.x_min || self.y_max < self.y_min {
            return Err(Error::Parameter("grid has no points".into()));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|k| lo + k as f64 * step).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_min, self.x_max, self.step)
    }

    pub fn ys(&self) -> Vec<f64> {
        Self::axis(self.y_min, self.y_max, self.step)
    }
}

/// `σ_min(P(x + i·y))` at every grid node, as rows indexed by `y` and columns
/// by `x`, together with the maximum over the grid.
pub fn sigma_min_grid<T: Real>(p: &MatrixPolynomial<T>, grid: &GridSpec) -> Result<(Vec<Vec<T>>, T)> {
    grid.validate()?;
    let (xs, ys) = (grid.xs(), grid.ys());
    let nodes: Vec<(f64, f64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let values = nodes
        .par_iter()
        .map(|&(x, y)| {
            let s = singular_values(&p.evaluate(Complex::new(T::lit(x), T::lit(y))))?;
            Ok(s.last().copied().unwrap_or_else(T::zero))
        })
        .collect::<Result<Vec<T>>>()?;
    let max = values.iter().copied().fold(T::zero(), T::max);
    let rows = values.chunks(xs.len()).map(<[T]>::to_vec).collect();
    Ok((rows, max))
}

/// Maximal numerical rank and maximal `σ_{2r+1}/σ₁` over sample points.
pub fn rank_profile<T: Real>(
    p: &MatrixPolynomial<T>,
    two_r: usize,
    num_samples: usize,
    tol: T,
    seed: u64,
) -> Result<(usize, T)> {
    if two_r < 2 || !two_r.is_multiple_of(2) {
        return Err(Error::Parameter(format!("target rank {two_r} must be even and at least 2")));
    }
    let mut max_rank = 0;
    let mut max_ratio = T::zero();
    for lambda in sample_points(num_samples, seed) {
        let s = singular_values(&p.evaluate(lambda))?;
        max_rank = max_rank.max(numerical_rank(&s, tol));
        if let (Some(&s1), Some(&sk)) = (s.first(), s.get(two_r)) {
            if s1 > T::zero() {
                max_ratio = max_ratio.max(sk / s1);
            }
        }
    }
    Ok((max_rank, max_ratio))
}

/// True when every entry is at most the previous one times `1 + slack`.
pub fn is_monotone<T: Real>(trace: &[T], slack: T) -> bool {
    trace.windows(2).all(|w| w[1] <= w[0] * (T::one() + slack))
}

/// Quality report for one approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport<T: Real> {
    pub max_sigma_min: T,
    pub grid_values: Vec<Vec<T>>,
    pub max_rank: usize,
    pub max_rank_ratio: T,
    pub skew_residual: T,
    pub monotone: bool,
    pub recomputed_distance: T,
    pub reported_distance: T,
    /// Recomputed and reported distances agree to 1e−12 relative.
    pub distance_consistent: bool,
}

/// Options for [`check_result_with`].
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub grid: GridSpec,
    pub num_samples: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { grid: GridSpec::desk(), num_samples: RANK_SAMPLES, seed: 0 }
    }
}

/// Recomputes the distance and audits a solver result on the desk grid.
pub fn check_result<T: Real>(p: &MatrixPolynomial<T>, result: &GearsResult<T>, two_r: usize) -> Result<VerifyReport<T>> {
    check_result_with(p, result, two_r, &CheckOptions::default())
}

pub fn check_result_with<T: Real>(
    p: &MatrixPolynomial<T>,
    result: &GearsResult<T>,
    two_r: usize,
    opts: &CheckOptions,
) -> Result<VerifyReport<T>> {
    check_approximant(p, &result.s, &result.distances, two_r, opts)
}

/// Audits an approximant `s` of `p` with its distance trace. An empty trace
/// counts as monotone and reports the recomputed distance.
pub fn check_approximant<T: Real>(
    p: &MatrixPolynomial<T>,
    s: &MatrixPolynomial<T>,
    distances: &[T],
    two_r: usize,
    opts: &CheckOptions,
) -> Result<VerifyReport<T>> {
    let recomputed_distance = p.dist(s)?;
    let reported_distance = distances.last().copied().unwrap_or(recomputed_distance);
    let scale = recomputed_distance.max(reported_distance).max(T::min_positive_value());
    let distance_consistent = (recomputed_distance - reported_distance).abs() <= T::lit(1e-12) * scale;
    let (grid_values, max_sigma_min) = sigma_min_grid(s, &opts.grid)?;
    let (max_rank, max_rank_ratio) = rank_profile(s, two_r, opts.num_samples, T::lit(RANK_TOL), opts.seed)?;
    Ok(VerifyReport {
        max_sigma_min,
        grid_values,
        max_rank,
        max_rank_ratio,
        skew_residual: s.skew_residual()?,
        monotone: is_monotone(distances, T::lit(MONOTONE_SLACK)),
        recomputed_distance,
        reported_distance,
        distance_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gears::{assemble, init_factors, run, GearsOptions, InitMode};
    use crate::linalg::ComplexMatrix;
    use crate::scalar::Field;
    use crate::structgen::{generic_pencil, plant, random_skew_poly};

    #[test]
    fn grid_axes() {
        let g = GridSpec::desk();
        assert_eq!(g.xs().len(), 21);
        assert_eq!(g.xs()[10], 0.0);
        assert_eq!(GridSpec::wide().ys().len(), 51);
        assert!(GridSpec::new(0.0, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(GridSpec::new(1.0, 0.0, 0.0, 1.0, 1.0).is_err());
        assert_eq!(GridSpec::new(0.0, 0.0, 0.0, 0.0, 1.0).unwrap().xs(), vec![0.0]);
    }

    #[test]
    fn zero_polynomial_grid() {
        let p = MatrixPolynomial::<f64>::zeros(3, 3, 2, Field::Real);
        let (vals, max) = sigma_min_grid(&p, &GridSpec::desk()).unwrap();
        assert_eq!(max, 0.0);
        assert!(vals.iter().flatten().all(|&v| v == 0.0));
        assert_eq!(rank_profile(&p, 2, 5, 1e-10, 0).unwrap(), (0, 0.0));
    }

    #[test]
    fn lambda_identity_vanishes_at_origin() {
        let p = MatrixPolynomial::new(vec![ComplexMatrix::zeros(2, 2), ComplexMatrix::identity(2)], Field::Real).unwrap();
        let (vals, _) = sigma_min_grid(&p, &GridSpec::desk()).unwrap();
        let min = vals.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(min, 0.0);
        assert_eq!(vals[10][10], 0.0);
        assert!((vals[0][0] - 100.0 * 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn grid_is_order_independent() {
        let p: MatrixPolynomial<f64> = random_skew_poly(4, 2, Field::Complex, 2);
        let g = GridSpec::new(-5.0, 5.0, -3.0, 3.0, 1.0).unwrap();
        let (vals, max) = sigma_min_grid(&p, &g).unwrap();
        for (iy, &y) in g.ys().iter().enumerate().rev() {
            for (ix, &x) in g.xs().iter().enumerate().rev() {
                let s = singular_values(&p.evaluate(Complex::new(x, y))).unwrap();
                assert_eq!(vals[iy][ix], *s.last().unwrap());
            }
        }
        assert_eq!(max, vals.iter().flatten().copied().fold(0.0, f64::max));
    }

    #[test]
    fn rank_profile_examples() {
        let (rank, ratio) = rank_profile(&generic_pencil::<f64>(5, 2).unwrap(), 4, 10, 1e-10, 1).unwrap();
        assert_eq!(rank, 4);
        assert!(ratio <= 1e-10);
        let f = init_factors::<f64>(6, 2, 2, Field::Complex, 3, &InitMode::Random, 1.0).unwrap();
        let (rank, ratio) = rank_profile(&assemble(&f), 4, 10, 1e-10, 2).unwrap();
        assert!(rank <= 4 && ratio <= 1e-10, "{rank} {ratio}");
        assert!(rank_profile(&assemble(&f), 3, 10, 1e-10, 2).is_err());
    }

    #[test]
    fn planted_warm_start_report() {
        let pl = plant::<f64>(6, 2, 2, 1e-3, Field::Complex, 4).unwrap();
        let opts = GearsOptions { init: InitMode::Warm(pl.factors.clone()), ..GearsOptions::default() };
        let res = run(&pl.p, 2, &opts).unwrap();
        let report = check_result(&pl.p, &res, 4).unwrap();
        assert!(report.recomputed_distance <= 1e-3 * (1.0 + 1e-10));
        assert!(report.monotone && report.distance_consistent);
        assert!(report.skew_residual <= 1e-13 * res.s.norm());
        assert!(report.max_rank <= 4);
        assert!(report.max_sigma_min <= 1e-6 * pl.p.norm());
    }

    #[test]
    fn tampered_trace_is_not_monotone() {
        let p: MatrixPolynomial<f64> = random_skew_poly(5, 1, Field::Real, 6);
        let opts = GearsOptions { max_iter: 5, restarts: 1, tol_rel: Some(1e-15), ..GearsOptions::default() };
        let mut res = run(&p, 1, &opts).unwrap();
        assert!(check_result(&p, &res, 2).unwrap().monotone);
        assert!(res.distances.len() >= 2);
        res.distances[1] = res.distances[0] * 1.5;
        assert!(!check_result(&p, &res, 2).unwrap().monotone);
    }
}

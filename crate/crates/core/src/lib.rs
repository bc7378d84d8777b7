//! Nearest skew-symmetric matrix polynomials of bounded rank.
//!
//! Given a square matrix polynomial `P(λ) = A₀ + λA₁ + … + λ^d A_d`, the
//! solvers look for a skew-symmetric `S(λ)` of normal rank at most `2r` close
//! to `P` in the coefficient Frobenius norm. `S` is kept in factored form
//! `S = U·Vᵀ − V·Uᵀ` and the factors are fitted by alternating least squares
//! ([`gears::run`]); for pencils a cheaper closed-form V-step is available
//! ([`gears_svd::run_pencil`]).
//!
//! Every numeric type is generic over the real scalar `T` (`f32` or `f64`);
//! entries are always `Complex<T>`. The aliases below fix `T = f64`, with
//! `…32` variants for single precision.
//!
//! ```
//! use skewdist::{gears, structgen, Field, GearsOptions, Polynomial};
//!
//! let p: Polynomial = structgen::random_skew_poly(5, 1, Field::Complex, 7);
//! let opts = GearsOptions { tol_rel: Some(1e-12), ..GearsOptions::default() };
//! let res = gears::run(&p, 2, &opts).unwrap();
//! // Odd-size skew pencils already have rank at most m − 1.
//! assert!(res.distance() <= 1e-6 * p.norm());
//! ```

pub mod bench;
pub mod error;
pub mod gears;
pub mod gears_svd;
pub mod io;
pub mod linalg;
pub mod matpoly;
pub mod scalar;
pub mod structgen;
pub mod verify;

pub use error::{Error, Result};
pub use gears::{FactorPair, GearsOptions, GearsResult, InitMode, Status};
pub use matpoly::MatrixPolynomial;
pub use scalar::{Field, Real};

pub type Matrix = linalg::ComplexMatrix<f64>;
pub type Polynomial = MatrixPolynomial<f64>;
pub type Factors = FactorPair<f64>;
pub type Options = GearsOptions<f64>;
pub type Outcome = GearsResult<f64>;

pub type Matrix32 = linalg::ComplexMatrix<f32>;
pub type Polynomial32 = MatrixPolynomial<f32>;
pub type Factors32 = FactorPair<f32>;
pub type Options32 = GearsOptions<f32>;
pub type Outcome32 = GearsResult<f32>;

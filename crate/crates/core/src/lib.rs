//! Sign changes of Dirichlet coefficients of Selberg-class L-functions.
//!
//! Coefficients are sieved from Euler local factors
//! ([`coefficients`]), inspected for sign changes on short windows
//! ([`statistics`]), compared with the exponents of the sign-change theorem
//! ([`exponents`]), and the analytic lemmas behind it are checked numerically
//! ([`dirichlet_poly`], [`identities`]).
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod dirichlet_poly;
pub mod error;
pub mod exponents;
pub mod identities;
pub mod scalar;
pub mod statistics;

pub use coefficients::{sieve, CoefficientTable, EulerLocalFactor, LFunctionSpec};
pub use dirichlet_poly::DirichletPolynomial;
pub use error::{Error, Result};
pub use exponents::{ExponentInputs, ExponentReport};
pub use scalar::Scalar;
pub use statistics::{SignChangeSummary, WindowReport};

pub type Table = CoefficientTable<f64>;
pub type LocalFactor = EulerLocalFactor<f64>;
pub type Polynomial = DirichletPolynomial<f64>;
pub type Exponents = ExponentReport<f64>;
pub type Window = WindowReport<f64>;

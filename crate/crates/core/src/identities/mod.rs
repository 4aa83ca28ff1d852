//! Exact identities and arithmetic helpers: congruence removal, Möbius
//! detection of coprimality, and μ / ω / radical.

pub mod arith;
mod congruence;
mod coprime;

pub use arith::{gcd, is_prime, is_squarefree, ArithmeticCache};
pub use congruence::{
    congruence_factor, congruence_factor_product_form, congruence_identity_rhs,
    congruence_restricted_series, verify_congruence_identity, verify_congruence_suite,
    CongruenceCheck, SeriesEstimate, TAIL_EXPONENT,
};
pub use coprime::{
    coprime_double_polynomial, multiplicative_split_check, CoprimePolynomial, SplitCheck,
};

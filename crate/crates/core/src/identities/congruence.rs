//! Removing the congruence condition d | m from a Dirichlet series:
//!
//! Σ_{d|m} A(m) m^{−s} = d^{−s} ∏_{p|d} p^s (1 − P_p(p^{−s})) · Σ_m A(m) m^{−s}
//!
//! for squarefree d and ℜ(s) > 1. Both sides are summed to a truncation point
//! and compared against a tail budget derived from |A(m)| ≤ C·m^{0.51}, with C
//! measured on the table.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::arith::factorize;
use crate::coefficients::{CoefficientTable, LFunctionSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponent of the coefficient bound used for tail estimates.
pub const TAIL_EXPONENT: f64 = 0.51;

/// A truncated series value with a bound on the discarded tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesEstimate<T> {
    pub value: Complex<T>,
    pub tail_bound: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CongruenceCheck<T> {
    pub d: u64,
    pub lhs_re: T,
    pub lhs_im: T,
    pub rhs_re: T,
    pub rhs_im: T,
    pub abs_diff: T,
    pub budget: T,
    pub pass: bool,
}

fn validate(table_max: u64, d: u64, sigma: f64, n_trunc: u64) -> Result<Vec<u64>> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let primes: Vec<(u64, u32)> = factorize(d);
    if primes.iter().any(|&(_, k)| k > 1) {
        return Err(Error::NotSquarefree(d));
    }
    if !(sigma > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need Re(s) > 1 for absolute convergence, got {sigma}"
        )));
    }
    if n_trunc < d {
        return Err(Error::InvalidParameter(format!(
            "truncation {n_trunc} below d = {d}"
        )));
    }
    if n_trunc > table_max {
        return Err(Error::OutOfRange {
            index: n_trunc,
            max: table_max,
        });
    }
    Ok(primes.into_iter().map(|(p, _)| p).collect())
}

#[inline]
fn n_pow_neg<T: Scalar>(n: u64, s: Complex<T>) -> Complex<T> {
    (-s * T::from_index(n).ln()).exp()
}

/// sup_m |A(m)| / m^{0.51} over the first `n_trunc` coefficients.
fn coefficient_constant<T: Scalar>(table: &CoefficientTable<T>, n_trunc: u64) -> T {
    let e = T::lit(TAIL_EXPONENT);
    table.as_slice()[..n_trunc as usize]
        .iter()
        .enumerate()
        .map(|(i, a)| a.abs() / T::from_index(i as u64 + 1).powf(e))
        .fold(T::zero(), T::max)
}

/// Σ_{m > N} C m^{0.51 − σ} ≤ C N^{1.51 − σ} / (σ − 1.51); infinite when σ ≤ 1.51.
fn tail<T: Scalar>(constant: T, sigma: T, n_trunc: u64) -> T {
    let a = sigma - T::lit(TAIL_EXPONENT);
    if a <= T::one() {
        return T::infinity();
    }
    constant * T::from_index(n_trunc).powf(T::one() - a) / (a - T::one())
}

fn restricted_sum<T: Scalar>(
    table: &CoefficientTable<T>,
    d: u64,
    s: Complex<T>,
    n_trunc: u64,
) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    // largest m first so that small terms accumulate before the big ones
    let top = n_trunc / d * d;
    let mut m = top;
    while m >= d {
        let a = table.at(m);
        if a != T::zero() {
            acc = acc + n_pow_neg(m, s) * a;
        }
        m -= d;
    }
    acc
}

/// Left side: Σ_{m ≤ N, d | m} A(m) m^{−s}.
pub fn congruence_restricted_series<T: Scalar>(
    table: &CoefficientTable<T>,
    d: u64,
    s: Complex<T>,
    n_trunc: u64,
) -> Result<SeriesEstimate<T>> {
    validate(table.x_max(), d, s.re.as_f64(), n_trunc)?;
    let c = coefficient_constant(table, n_trunc);
    Ok(SeriesEstimate {
        value: restricted_sum(table, d, s, n_trunc),
        tail_bound: tail(c, s.re, n_trunc),
    })
}

/// The factor d^{−s} ∏_{p|d} p^s (1 − P_p(p^{−s})) as displayed in the identity.
pub fn congruence_factor<T: Scalar>(
    spec: &LFunctionSpec,
    d: u64,
    s: Complex<T>,
) -> Result<Complex<T>> {
    let primes = validate(u64::MAX, d, s.re.as_f64(), d)?;
    let mut acc = n_pow_neg(d, s);
    for p in primes {
        let local = spec.provider().local_factor(p)?.cast::<T>();
        let x = n_pow_neg(p, s);
        acc = acc * (Complex::new(T::one(), T::zero()) - local.eval(x)) / x;
    }
    Ok(acc)
}

/// ∏_{p|d} (1 − P_p(p^{−s})), the form the Euler-product comparison produces.
/// Equal to [`congruence_factor`] for squarefree d.
pub fn congruence_factor_product_form<T: Scalar>(
    spec: &LFunctionSpec,
    d: u64,
    s: Complex<T>,
) -> Result<Complex<T>> {
    let primes = validate(u64::MAX, d, s.re.as_f64(), d)?;
    let mut acc = Complex::new(T::one(), T::zero());
    for p in primes {
        let local = spec.provider().local_factor(p)?.cast::<T>();
        acc = acc * (Complex::new(T::one(), T::zero()) - local.eval(n_pow_neg(p, s)));
    }
    Ok(acc)
}

/// Right side: the congruence factor times Σ_{m ≤ N} A(m) m^{−s}.
///
/// `table` must be the sieve of `spec`.
pub fn congruence_identity_rhs<T: Scalar>(
    table: &CoefficientTable<T>,
    spec: &LFunctionSpec,
    d: u64,
    s: Complex<T>,
    n_trunc: u64,
) -> Result<SeriesEstimate<T>> {
    validate(table.x_max(), d, s.re.as_f64(), n_trunc)?;
    let full = congruence_restricted_series(table, 1, s, n_trunc)?;
    let factor = congruence_factor(spec, d, s)?;
    Ok(SeriesEstimate {
        value: factor * full.value,
        tail_bound: factor.norm() * full.tail_bound,
    })
}

fn check_with_full<T: Scalar>(
    table: &CoefficientTable<T>,
    spec: &LFunctionSpec,
    d: u64,
    s: Complex<T>,
    n_trunc: u64,
    full: &SeriesEstimate<T>,
) -> Result<CongruenceCheck<T>> {
    let lhs = congruence_restricted_series(table, d, s, n_trunc)?;
    let factor = congruence_factor(spec, d, s)?;
    let rhs = factor * full.value;
    let budget = lhs.tail_bound + factor.norm() * full.tail_bound;
    let abs_diff = (lhs.value - rhs).norm();
    Ok(CongruenceCheck {
        d,
        lhs_re: lhs.value.re,
        lhs_im: lhs.value.im,
        rhs_re: rhs.re,
        rhs_im: rhs.im,
        abs_diff,
        budget,
        pass: abs_diff <= budget,
    })
}

/// Compares both sides for one squarefree d.
pub fn verify_congruence_identity<T: Scalar>(
    table: &CoefficientTable<T>,
    spec: &LFunctionSpec,
    d: u64,
    s: Complex<T>,
    n_trunc: u64,
) -> Result<CongruenceCheck<T>> {
    let full = congruence_restricted_series(table, 1, s, n_trunc)?;
    check_with_full(table, spec, d, s, n_trunc, &full)
}

/// Runs [`verify_congruence_identity`] for every squarefree d ≤ `d_max`.
pub fn verify_congruence_suite<T: Scalar>(
    table: &CoefficientTable<T>,
    spec: &LFunctionSpec,
    d_max: u64,
    s: Complex<T>,
    n_trunc: u64,
) -> Result<Vec<CongruenceCheck<T>>> {
    let full = congruence_restricted_series(table, 1, s, n_trunc)?;
    (1..=d_max)
        .into_par_iter()
        .filter(|&d| factorize(d).iter().all(|&(_, k)| k == 1))
        .map(|d| check_with_full(table, spec, d, s, n_trunc, &full))
        .collect()
}

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::identities::arith::is_prime;
use crate::scalar::Scalar;

/// Euler factor at a prime p, stored as the inverse polynomial:
/// L_p(s) = 1 / P(p^{−s}) with P(x) = Σ c_j x^j and c_0 = 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EulerLocalFactor<T> {
    p: u64,
    poly: Vec<T>,
}

impl<T: Scalar> EulerLocalFactor<T> {
    /// Trailing zero coefficients are dropped.
    pub fn new(p: u64, mut poly: Vec<T>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let c0 = poly.first().copied().unwrap_or_else(T::zero);
        if c0 != T::one() {
            return Err(Error::ConstantTerm { p, c0: c0.as_f64() });
        }
        if let Some(bad) = poly.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite coefficient {bad} in local factor at p = {p}"
            )));
        }
        while poly.len() > 1 && poly.last() == Some(&T::zero()) {
            poly.pop();
        }
        Ok(Self { p, poly })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Coefficients c_0, …, c_deg.
    pub fn poly(&self) -> &[T] {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    /// P(x) at a complex point.
    pub fn eval(&self, x: Complex<T>) -> Complex<T> {
        self.poly
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * x + c)
    }

    pub fn cast<U: Scalar>(&self) -> EulerLocalFactor<U> {
        EulerLocalFactor {
            p: self.p,
            poly: self.poly.iter().map(|c| U::lit(c.as_f64())).collect(),
        }
    }
}

/// A(p⁰), …, A(p^{k_max}): the power series of 1/P through degree `k_max`.
pub fn local_coefficients<T: Scalar>(factor: &EulerLocalFactor<T>, k_max: usize) -> Vec<T> {
    let c = factor.poly();
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(T::one());
    for k in 1..=k_max {
        let mut acc = T::zero();
        for j in 1..c.len().min(k + 1) {
            acc = acc - c[j] * out[k - j];
        }
        out.push(acc);
    }
    out
}

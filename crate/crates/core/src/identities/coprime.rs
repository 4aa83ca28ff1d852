use rayon::prelude::*;
use serde::Serialize;

use super::arith::{gcd, ArithmeticCache};
use crate::coefficients::CoefficientTable;
use crate::dirichlet_poly::{k_range, DirichletPolynomial};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// D(s) = Σ_{m∼M, k∈K, (m,k)=1} A(m)A(k)(mk)^{−s} collapsed over n = mk.
#[derive(Clone, Debug, PartialEq)]
pub struct CoprimePolynomial<T> {
    pub poly: DirichletPolynomial<T>,
    /// Dyadic block (M, 2M] as an inclusive range.
    pub m_range: (u64, u64),
    /// ⌈X/3M⌉ ..= ⌊3X/M⌋.
    pub k_range: (u64, u64),
}

/// Builds D(s) as Σ_d μ(d)·M_d(s)·K_d(s), with M_d, K_d restricted to
/// multiples of d. Every common divisor of m ≤ 2M and k is ≤ 2M, so d runs
/// over squarefree d ≤ 2M.
pub fn coprime_double_polynomial<T: Scalar>(
    table: &CoefficientTable<T>,
    m: u64,
    x: u64,
) -> Result<CoprimePolynomial<T>> {
    if m == 0 {
        return Err(Error::EmptySupport(
            "M = 0 gives an empty dyadic block".into(),
        ));
    }
    let (m_lo, m_hi) = (m + 1, 2 * m);
    let (k_lo, k_hi) = k_range(x, m)?;
    table.ensure_covers(m_hi.max(k_hi))?;
    let n_lo = m_lo * k_lo;
    let n_hi = m_hi * k_hi;
    let limit = u32::try_from(m_hi)
        .map_err(|_| Error::InvalidParameter(format!("M = {m} is too large")))?;
    let cache = ArithmeticCache::new(limit);
    let divisors = cache.squarefree_upto(m_hi);

    let a = |i: u64| table.at(i);
    let contributions: Vec<Vec<(usize, T)>> = divisors
        .par_iter()
        .map(|&(d, mu)| {
            let sign = if mu > 0 { T::one() } else { -T::one() };
            let mut out = Vec::new();
            let m_start = m_lo.div_ceil(d) * d;
            let k_start = k_lo.div_ceil(d) * d;
            for mm in (m_start..=m_hi).step_by(d as usize) {
                let am = a(mm);
                if am == T::zero() {
                    continue;
                }
                for kk in (k_start..=k_hi).step_by(d as usize) {
                    let ak = a(kk);
                    if ak != T::zero() {
                        out.push(((mm * kk - n_lo) as usize, sign * am * ak));
                    }
                }
            }
            out
        })
        .collect();

    let mut coeffs = vec![T::zero(); (n_hi - n_lo + 1) as usize];
    for part in contributions {
        for (i, v) in part {
            coeffs[i] = coeffs[i] + v;
        }
    }
    Ok(CoprimePolynomial {
        poly: DirichletPolynomial::new(n_lo, coeffs)?,
        m_range: (m_lo, m_hi),
        k_range: (k_lo, k_hi),
    })
}

/// Outcome of testing A(mk) = A(m)A(k).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SplitCheck<T> {
    Holds {
        product: T,
        value: T,
    },
    Fails {
        product: T,
        value: T,
        diff: T,
    },
    /// gcd(m, k) > 1.
    NotApplicable {
        gcd: u64,
    },
}

impl<T> SplitCheck<T> {
    pub fn holds(&self) -> bool {
        matches!(self, SplitCheck::Holds { .. })
    }
}

pub fn multiplicative_split_check<T: Scalar>(
    table: &CoefficientTable<T>,
    m: u64,
    k: u64,
) -> Result<SplitCheck<T>> {
    if m == 0 || k == 0 {
        return Err(Error::OutOfRange {
            index: 0,
            max: table.x_max(),
        });
    }
    let n = m.checked_mul(k).ok_or(Error::OutOfRange {
        index: u64::MAX,
        max: table.x_max(),
    })?;
    table.ensure_covers(n)?;
    let g = gcd(m, k);
    if g > 1 {
        return Ok(SplitCheck::NotApplicable { gcd: g });
    }
    let product = table.at(m) * table.at(k);
    let value = table.at(n);
    let diff = (value - product).abs();
    if diff <= T::lit(1e-9) * (T::one() + product.abs()) {
        Ok(SplitCheck::Holds { product, value })
    } else {
        Ok(SplitCheck::Fails {
            product,
            value,
            diff,
        })
    }
}

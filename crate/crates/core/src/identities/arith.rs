//! Sieved arithmetic functions: smallest prime factor, Möbius, ω and radical.

use serde::Serialize;

use crate::error::{Error, Result};

/// Linear sieve up to `limit`: smallest-prime-factor table (`spf[0] = spf[1] = 0`)
/// and the list of primes.
pub fn linear_sieve(limit: u32) -> (Vec<u32>, Vec<u32>) {
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            if p > si || i * p as usize > n {
                break;
            }
            spf[i * p as usize] = p;
        }
    }
    (spf, primes)
}

/// Trial-division primality test, adequate for the prime sizes the sieves see.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Factorization by trial division as `(p, k)` pairs, increasing `p`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, k)| k == 1)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Precomputed μ, ω and radical up to a limit.
#[derive(Clone, Debug, Serialize)]
pub struct ArithmeticCache {
    limit: u32,
    #[serde(skip)]
    spf: Vec<u32>,
    #[serde(skip)]
    moebius: Vec<i8>,
    #[serde(skip)]
    omega: Vec<u8>,
    #[serde(skip)]
    radical: Vec<u32>,
    #[serde(skip)]
    primes: Vec<u32>,
}

impl ArithmeticCache {
    pub fn new(limit: u32) -> Self {
        let limit = limit.max(1);
        let (spf, primes) = linear_sieve(limit);
        let n = limit as usize;
        let mut moebius = vec![0i8; n + 1];
        let mut omega = vec![0u8; n + 1];
        let mut radical = vec![0u32; n + 1];
        moebius[1] = 1;
        radical[1] = 1;
        for i in 2..=n {
            let p = spf[i];
            let q = i / p as usize;
            if spf[q] == p {
                moebius[i] = 0;
                omega[i] = omega[q];
                radical[i] = radical[q];
            } else {
                moebius[i] = -moebius[q];
                omega[i] = omega[q] + 1;
                radical[i] = radical[q] * p;
            }
        }
        Self {
            limit,
            spf,
            moebius,
            omega,
            radical,
            primes,
        }
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    fn check(&self, n: u64) -> Result<usize> {
        if n == 0 || n > self.limit as u64 {
            return Err(Error::OutOfRange {
                index: n,
                max: self.limit as u64,
            });
        }
        Ok(n as usize)
    }

    pub fn moebius(&self, n: u64) -> Result<i8> {
        self.check(n).map(|i| self.moebius[i])
    }

    pub fn omega(&self, n: u64) -> Result<u32> {
        self.check(n).map(|i| self.omega[i] as u32)
    }

    /// Product of the distinct primes dividing `n`.
    pub fn radical(&self, n: u64) -> Result<u64> {
        self.check(n).map(|i| self.radical[i] as u64)
    }

    pub fn smallest_prime_factor(&self, n: u64) -> Result<u64> {
        self.check(n).map(|i| self.spf[i] as u64)
    }

    /// Distinct prime divisors of `n`, increasing.
    pub fn prime_divisors(&self, n: u64) -> Result<Vec<u64>> {
        let mut i = self.check(n)?;
        let mut out = Vec::new();
        while i > 1 {
            let p = self.spf[i] as usize;
            out.push(p as u64);
            while i % p == 0 {
                i /= p;
            }
        }
        Ok(out)
    }

    /// Squarefree `d ≤ bound` with μ(d) ≠ 0, paired with μ(d).
    pub fn squarefree_upto(&self, bound: u64) -> Vec<(u64, i8)> {
        let top = bound.min(self.limit as u64) as usize;
        (1..=top)
            .filter(|&d| self.moebius[d] != 0)
            .map(|d| (d as u64, self.moebius[d]))
            .collect()
    }
}

//! Exact Ramanujan τ(n) from the q-expansion of Δ = q ∏ (1 − qⁿ)²⁴.
//!
//! The cube of the Euler product is sparse (Jacobi's identity), its square is
//! formed exactly, and the two remaining squarings run as number-theoretic
//! transforms modulo five NTT-friendly primes. Garner's reconstruction then
//! recovers τ(n) exactly: |τ(n)| ≤ d(n) n^{11/2} stays far below half the
//! product of the moduli (~5.9e43) and inside `i128` for n ≤ 10⁶.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest supported `N`.
pub const TAU_MAX: usize = 1_000_000;

const MODULI: [u64; 5] = [
    998_244_353,
    167_772_161,
    469_762_049,
    754_974_721,
    1_004_535_809,
];

/// τ(1), …, τ(N) as exact integers.
pub fn tau_qexpansion(n: usize) -> Result<Vec<i128>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if n > TAU_MAX {
        return Err(Error::InvalidParameter(format!(
            "tau_qexpansion supports N <= {TAU_MAX}, got {n}"
        )));
    }
    // τ(j + 1) is the coefficient of q^j in ∏(1 − qⁿ)²⁴, so N coefficients suffice.
    let e6 = euler_sixth_power(n);
    let residues: Vec<Vec<u64>> = (0..MODULI.len())
        .into_par_iter()
        .map(|i| match i {
            0 => power_24_mod::<998_244_353, 3>(&e6),
            1 => power_24_mod::<167_772_161, 3>(&e6),
            2 => power_24_mod::<469_762_049, 3>(&e6),
            3 => power_24_mod::<754_974_721, 11>(&e6),
            _ => power_24_mod::<1_004_535_809, 3>(&e6),
        })
        .collect();
    let crt = Garner::new();
    Ok((0..n)
        .into_par_iter()
        .map(|j| {
            let r: [u64; 5] = std::array::from_fn(|i| residues[i][j]);
            crt.reconstruct(&r)
        })
        .collect())
}

/// ∏(1 − qⁿ)⁶ through q^{len−1}, exact.
fn euler_sixth_power(len: usize) -> Vec<i64> {
    // ∏(1 − qⁿ)³ = Σ_{k≥0} (−1)^k (2k+1) q^{k(k+1)/2}
    let mut cube = Vec::new();
    let mut k = 0usize;
    loop {
        let e = k * (k + 1) / 2;
        if e >= len {
            break;
        }
        let c = (2 * k + 1) as i64;
        cube.push((e, if k.is_multiple_of(2) { c } else { -c }));
        k += 1;
    }
    let mut out = vec![0i64; len];
    for &(ea, ca) in &cube {
        for &(eb, cb) in &cube {
            if ea + eb >= len {
                break;
            }
            out[ea + eb] += ca * cb;
        }
    }
    out
}

fn power_24_mod<const P: u64, const G: u64>(e6: &[i64]) -> Vec<u64> {
    let len = e6.len();
    let a: Vec<u64> = e6.iter().map(|&c| c.rem_euclid(P as i64) as u64).collect();
    let e12 = square_truncated::<P, G>(&a, len);
    square_truncated::<P, G>(&e12, len)
}

fn square_truncated<const P: u64, const G: u64>(a: &[u64], keep: usize) -> Vec<u64> {
    let size = (2 * a.len() - 1).next_power_of_two();
    let mut buf = vec![0u64; size];
    buf[..a.len()].copy_from_slice(a);
    ntt::<P, G>(&mut buf, false);
    for v in buf.iter_mut() {
        *v = *v * *v % P;
    }
    ntt::<P, G>(&mut buf, true);
    buf.truncate(keep);
    buf
}

fn pow_mod<const P: u64>(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    b %= P;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % P;
        }
        b = b * b % P;
        e >>= 1;
    }
    r
}

/// In-place iterative radix-2 transform; `a.len()` must be a power of two
/// dividing P − 1.
fn ntt<const P: u64, const G: u64>(a: &mut [u64], invert: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two() && (P - 1).is_multiple_of(n as u64));
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut twiddles = Vec::with_capacity(n / 2);
    let mut len = 2;
    while len <= n {
        let mut w = pow_mod::<P>(G, (P - 1) / len as u64);
        if invert {
            w = pow_mod::<P>(w, P - 2);
        }
        let half = len / 2;
        twiddles.clear();
        let mut wn = 1u64;
        for _ in 0..half {
            twiddles.push(wn);
            wn = wn * w % P;
        }
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let x = *u;
                let y = *v * tw % P;
                *u = if x + y >= P { x + y - P } else { x + y };
                *v = if x >= y { x - y } else { x + P - y };
            }
        }
        len <<= 1;
    }
    if invert {
        let inv_n = pow_mod::<P>(n as u64, P - 2);
        for v in a.iter_mut() {
            *v = *v * inv_n % P;
        }
    }
}

/// Mixed-radix CRT over [`MODULI`] into a signed `i128`.
struct Garner {
    // inv[i][j] = m_j^{-1} mod m_i for j < i
    inv: [[u64; 5]; 5],
    radix: [i128; 5],
    radix_f64: [f64; 5],
    half_total: f64,
    total: i128,
}

impl Garner {
    fn new() -> Self {
        let mut inv = [[0u64; 5]; 5];
        for i in 0..5 {
            for j in 0..i {
                inv[i][j] = pow_mod_dyn(MODULI[j] % MODULI[i], MODULI[i] - 2, MODULI[i]);
            }
        }
        let mut radix = [1i128; 5];
        let mut radix_f64 = [1f64; 5];
        for i in 1..5 {
            radix[i] = radix[i - 1].wrapping_mul(MODULI[i - 1] as i128);
            radix_f64[i] = radix_f64[i - 1] * MODULI[i - 1] as f64;
        }
        let total = radix[4].wrapping_mul(MODULI[4] as i128);
        let half_total = radix_f64[4] * MODULI[4] as f64 / 2.0;
        Self {
            inv,
            radix,
            radix_f64,
            half_total,
            total,
        }
    }

    #[allow(clippy::needless_range_loop)]
    fn reconstruct(&self, r: &[u64; 5]) -> i128 {
        let mut digits = [0u64; 5];
        for i in 0..5 {
            let m = MODULI[i];
            let mut t = r[i] % m;
            for j in 0..i {
                t = (t + m - digits[j] % m) % m * self.inv[i][j] % m;
            }
            digits[i] = t;
        }
        // The exact value fits in i128, so wrapping arithmetic is exact once
        // the representative in [0, M) is shifted to the symmetric range.
        let mut value = 0i128;
        let mut approx = 0f64;
        for i in 0..5 {
            value = value.wrapping_add((digits[i] as i128).wrapping_mul(self.radix[i]));
            approx += digits[i] as f64 * self.radix_f64[i];
        }
        if approx > self.half_total {
            value = value.wrapping_sub(self.total);
        }
        value
    }
}

fn pow_mod_dyn(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

//! Local-factor providers for the built-in coefficient families.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::local::EulerLocalFactor;
use super::tau::{tau_qexpansion, TAU_MAX};
use crate::error::{Error, Result};
use crate::identities::arith::{factorize, gcd};

/// Maps each prime to its Euler factor.
pub trait LocalFactorProvider: Send + Sync + Debug {
    fn local_factor(&self, p: u64) -> Result<EulerLocalFactor<f64>>;

    /// Called once before a sieve up to `x_max`; providers backed by a
    /// precomputed list extend it here.
    fn prepare(&self, _x_max: u64) -> Result<()> {
        Ok(())
    }
}

/// Riemann ζ: P_p(x) = 1 − x.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZetaProvider;

impl LocalFactorProvider for ZetaProvider {
    fn local_factor(&self, p: u64) -> Result<EulerLocalFactor<f64>> {
        EulerLocalFactor::new(p, vec![1.0, -1.0])
    }
}

/// Real primitive character n ↦ (D/n) for a fundamental discriminant D.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RealCharacter {
    discriminant: i64,
}

impl RealCharacter {
    pub fn new(discriminant: i64) -> Result<Self> {
        if discriminant == 1 || !is_fundamental_discriminant(discriminant) {
            return Err(Error::InvalidSpec(format!(
                "{discriminant} is not a nontrivial fundamental discriminant"
            )));
        }
        Ok(Self { discriminant })
    }

    /// The real primitive character of conductor `modulus`, when unique.
    pub fn from_modulus(modulus: u64) -> Result<Self> {
        let m = modulus as i64;
        let candidates: Vec<i64> = [-m, m]
            .into_iter()
            .filter(|&d| d != 1 && is_fundamental_discriminant(d))
            .collect();
        match candidates.as_slice() {
            [d] => Ok(Self { discriminant: *d }),
            [] => Err(Error::InvalidSpec(format!(
                "no real primitive character has conductor {modulus}"
            ))),
            _ => Err(Error::InvalidSpec(format!(
                "conductor {modulus} carries two real primitive characters; set `discriminant`"
            ))),
        }
    }

    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    pub fn modulus(&self) -> u64 {
        self.discriminant.unsigned_abs()
    }

    /// Kronecker symbol (D/n).
    pub fn value(&self, n: u64) -> i8 {
        kronecker(self.discriminant, n)
    }
}

impl LocalFactorProvider for RealCharacter {
    fn local_factor(&self, p: u64) -> Result<EulerLocalFactor<f64>> {
        EulerLocalFactor::new(p, vec![1.0, -(self.value(p) as f64)])
    }
}

fn is_fundamental_discriminant(d: i64) -> bool {
    let squarefree = |n: i64| n != 0 && factorize(n.unsigned_abs()).iter().all(|&(_, k)| k == 1);
    match d.rem_euclid(4) {
        1 => squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m)
        }
        _ => false,
    }
}

/// Kronecker symbol (a/n) for n ≥ 0.
pub fn kronecker(a: i64, n: u64) -> i8 {
    if n == 0 {
        return if a.unsigned_abs() == 1 { 1 } else { 0 };
    }
    if gcd(a.unsigned_abs(), n) != 1 {
        return 0;
    }
    let mut n = n;
    let mut result = 1i8;
    while n.is_multiple_of(2) {
        n /= 2;
        if matches!(a.rem_euclid(8), 3 | 5) {
            result = -result;
        }
    }
    // Jacobi symbol (a/n) for odd n
    let mut a = a.rem_euclid(n as i64) as u64;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Ramanujan Δ in analytic normalization: P_p(x) = 1 − τ(p)p^{−11/2} x + x².
///
/// τ(p) comes from the exact q-expansion; the list grows on demand.
#[derive(Debug, Default)]
pub struct DeltaProvider {
    tau: RwLock<Arc<Vec<i128>>>,
}

impl DeltaProvider {
    pub fn new() -> Self {
        Self::default()
    }

    fn tau_upto(&self, n: u64) -> Result<Arc<Vec<i128>>> {
        {
            let cached = self.tau.read().expect("tau cache poisoned");
            if cached.len() as u64 >= n {
                return Ok(Arc::clone(&cached));
            }
        }
        if n > TAU_MAX as u64 {
            return Err(Error::InvalidParameter(format!(
                "Δ coefficients are available up to {TAU_MAX}, requested {n}"
            )));
        }
        let mut cached = self.tau.write().expect("tau cache poisoned");
        if (cached.len() as u64) < n {
            let target = (n as usize).max(2 * cached.len()).clamp(1024, TAU_MAX);
            *cached = Arc::new(tau_qexpansion(target)?);
        }
        Ok(Arc::clone(&cached))
    }

    /// Normalized Hecke eigenvalue τ(p)/p^{11/2}.
    pub fn lambda(&self, p: u64) -> Result<f64> {
        let tau = self.tau_upto(p)?;
        Ok(tau[p as usize - 1] as f64 / (p as f64).powf(5.5))
    }
}

impl LocalFactorProvider for DeltaProvider {
    fn local_factor(&self, p: u64) -> Result<EulerLocalFactor<f64>> {
        let lambda = self.lambda(p)?;
        EulerLocalFactor::new(p, vec![1.0, -lambda, 1.0])
    }

    fn prepare(&self, x_max: u64) -> Result<()> {
        self.tau_upto(x_max).map(|_| ())
    }
}

/// Synthetic degree-2 family with a_p = 2cos ϑ_p, ϑ_p drawn from the
/// semicircle density (2/π) sin²ϑ on [0, π], deterministically from (seed, p).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SatoTateProvider {
    seed: u64,
}

impl SatoTateProvider {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn a_p(&self, p: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ splitmix64(p)));
        // rejection from the uniform density, acceptance probability sin²ϑ
        loop {
            let angle = rng.gen::<f64>() * std::f64::consts::PI;
            if rng.gen::<f64>() < angle.sin().powi(2) {
                return 2.0 * angle.cos();
            }
        }
    }
}

impl LocalFactorProvider for SatoTateProvider {
    fn local_factor(&self, p: u64) -> Result<EulerLocalFactor<f64>> {
        EulerLocalFactor::new(p, vec![1.0, -self.a_p(p), 1.0])
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Explicit polynomials per prime, with an optional fallback.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CustomFactors {
    pub polynomials: BTreeMap<u64, Vec<f64>>,
    pub default: Option<Vec<f64>>,
}

impl LocalFactorProvider for CustomFactors {
    fn local_factor(&self, p: u64) -> Result<EulerLocalFactor<f64>> {
        match self.polynomials.get(&p).or(self.default.as_ref()) {
            Some(poly) => EulerLocalFactor::new(p, poly.clone()),
            None => Err(Error::ProviderUndefined(p)),
        }
    }
}

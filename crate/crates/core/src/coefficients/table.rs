use std::io::{BufRead, Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use super::local::local_coefficients;
use super::spec::{LFunctionSpec, ValidationProfile};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const CACHE_MAGIC: &[u8; 4] = b"SLBC";
const CACHE_VERSION: u32 = 1;
const MAX_RECORDED: usize = 64;

/// Soft checks collected while sieving. Never fatal.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SieveDiagnostics {
    pub eps_check: f64,
    /// Number of m with |A(m)| > m^{1/2 + eps_check}.
    pub magnitude_violations: usize,
    /// The first few offending (m, A(m)).
    pub magnitude_examples: Vec<(u64, f64)>,
    /// Primes with |A(p)| > 36 under the spinor profile.
    pub profile_violations: Vec<u64>,
}

impl SieveDiagnostics {
    pub fn is_clean(&self) -> bool {
        self.magnitude_violations == 0 && self.profile_violations.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SieveOptions {
    pub eps_check: f64,
}

impl Default for SieveOptions {
    fn default() -> Self {
        Self { eps_check: 1e-3 }
    }
}

/// Immutable coefficients A(1), …, A(x_max).
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable<T> {
    spec_name: String,
    // values[0] is a placeholder so that values[m] = A(m)
    values: Vec<T>,
    diagnostics: SieveDiagnostics,
}

impl<T: Scalar> CoefficientTable<T> {
    /// Wraps raw values `A(1), A(2), …` without any structural check. Used
    /// for synthetic sequences in statistics-only work.
    pub fn from_values(spec_name: impl Into<String>, values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty coefficient table".into()));
        }
        let mut v = Vec::with_capacity(values.len() + 1);
        v.push(T::zero());
        v.extend(values);
        Ok(Self {
            spec_name: spec_name.into(),
            values: v,
            diagnostics: SieveDiagnostics::default(),
        })
    }

    pub fn spec_name(&self) -> &str {
        &self.spec_name
    }

    pub fn x_max(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    /// A(m) for 1 ≤ m ≤ x_max.
    pub fn coefficient(&self, m: u64) -> Result<T> {
        if m == 0 || m > self.x_max() {
            return Err(Error::OutOfRange {
                index: m,
                max: self.x_max(),
            });
        }
        Ok(self.values[m as usize])
    }

    /// A(1), …, A(x_max).
    pub fn as_slice(&self) -> &[T] {
        &self.values[1..]
    }

    /// Unchecked access; callers validate ranges up front.
    #[inline]
    pub(crate) fn at(&self, m: u64) -> T {
        self.values[m as usize]
    }

    pub fn diagnostics(&self) -> &SieveDiagnostics {
        &self.diagnostics
    }

    pub(crate) fn ensure_covers(&self, upto: u64) -> Result<()> {
        if upto > self.x_max() {
            return Err(Error::OutOfRange {
                index: upto,
                max: self.x_max(),
            });
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "m,A")?;
        for (i, v) in self.as_slice().iter().enumerate() {
            writeln!(w, "{},{}", i + 1, v.as_f64())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(spec_name: impl Into<String>, r: R) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "m,A" => {}
            _ => return Err(Error::Format("missing `m,A` header".into())),
        }
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (m, a) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("bad row `{line}`")))?;
            let m: u64 = m
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad index `{m}`")))?;
            if m != i as u64 + 1 {
                return Err(Error::Format(format!("expected m = {}, found {m}", i + 1)));
            }
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad value `{a}`")))?;
            values.push(T::lit(a));
        }
        Self::from_values(spec_name, values)
    }

    /// Binary cache: "SLBC", version (u32 LE), x_max (u64 LE), then the
    /// values as little-endian f64.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&self.x_max().to_le_bytes())?;
        for v in self.as_slice() {
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(spec_name: impl Into<String>, mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != CACHE_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let mut long = [0u8; 8];
        r.read_exact(&mut long)?;
        let x_max = u64::from_le_bytes(long);
        let mut values = Vec::with_capacity(x_max.min(1 << 24) as usize);
        for _ in 0..x_max {
            r.read_exact(&mut long)?;
            values.push(T::lit(f64::from_le_bytes(long)));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after values".into()));
        }
        Self::from_values(spec_name, values)
    }
}

/// Multiplicative sieve with default options.
pub fn sieve<T: Scalar>(spec: &LFunctionSpec, x: u64) -> Result<CoefficientTable<T>> {
    sieve_with(spec, x, &SieveOptions::default())
}

/// Builds A(1..=x) from the spec's local factors.
///
/// A smallest-prime-factor pass records, for every m, the full power of its
/// smallest prime; prime powers take their local coefficient and every other
/// m is assembled as A(p^k)·A(m/p^k).
pub fn sieve_with<T: Scalar>(
    spec: &LFunctionSpec,
    x: u64,
    opts: &SieveOptions,
) -> Result<CoefficientTable<T>> {
    if x == 0 {
        return Err(Error::InvalidParameter("X must be at least 1".into()));
    }
    if x > u32::MAX as u64 {
        return Err(Error::InvalidParameter(format!(
            "X = {x} exceeds the sieve range"
        )));
    }
    spec.provider().prepare(x)?;
    let n = x as usize;

    // spf_power[m] = p^k with p = spf(m), p^k ‖ m
    let mut spf = vec![0u32; n + 1];
    let mut spf_power = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            spf_power[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let ip = i * p as usize;
            if p > si || ip > n {
                break;
            }
            spf[ip] = p;
            spf_power[ip] = if p == si { spf_power[i] * p } else { p };
        }
    }
    drop(spf);

    let degree = spec.degree();
    let locals: Vec<(u64, Vec<T>)> = primes
        .par_iter()
        .map(|&p| {
            let p = p as u64;
            let factor = spec.provider().local_factor(p)?;
            if factor.degree() > degree {
                return Err(Error::DegreeTooLarge {
                    p,
                    deg: factor.degree(),
                    degree,
                });
            }
            let mut k_max = 0usize;
            let mut pk = 1u64;
            while pk * p <= x {
                pk *= p;
                k_max += 1;
            }
            Ok((p, local_coefficients(&factor.cast::<T>(), k_max)))
        })
        .collect::<Result<_>>()?;

    let mut values = vec![T::zero(); n + 1];
    values[1] = T::one();
    for (p, coeffs) in &locals {
        let mut pk = *p;
        for c in &coeffs[1..] {
            values[pk as usize] = *c;
            pk *= p;
        }
    }
    for m in 2..=n {
        let q = spf_power[m] as usize;
        if q != m {
            values[m] = values[q] * values[m / q];
        }
    }

    let mut diagnostics = SieveDiagnostics {
        eps_check: opts.eps_check,
        ..Default::default()
    };
    let exponent = 0.5 + opts.eps_check;
    for (m, v) in values.iter().enumerate().skip(1) {
        let a = v.as_f64().abs();
        if !(a <= (m as f64).powf(exponent)) {
            diagnostics.magnitude_violations += 1;
            if diagnostics.magnitude_examples.len() < MAX_RECORDED {
                diagnostics.magnitude_examples.push((m as u64, v.as_f64()));
            }
        }
    }
    if spec.profile() == Some(ValidationProfile::SpinorNonSk) {
        diagnostics.profile_violations = primes
            .iter()
            .filter(|&&p| values[p as usize].as_f64().abs() > 36.0)
            .map(|&p| p as u64)
            .collect();
    }

    Ok(CoefficientTable {
        spec_name: spec.name().to_string(),
        values,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::family::CustomFactors;
    use crate::coefficients::tau::tau_qexpansion;
    use crate::identities::arith::gcd;
    use std::collections::BTreeMap;

    #[test]
    fn zeta_is_all_ones() {
        let t = sieve::<f64>(&LFunctionSpec::zeta(), 10).unwrap();
        assert_eq!(t.as_slice(), &[1.0; 10]);
        assert_eq!(t.coefficient(7).unwrap(), 1.0);
        assert!(t.diagnostics().is_clean());
    }

    #[test]
    fn chi_minus_four() {
        let t = sieve::<f64>(&LFunctionSpec::dirichlet_character(4).unwrap(), 6).unwrap();
        assert_eq!(t.as_slice(), &[1.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
        assert_eq!(t.coefficient(4).unwrap(), 0.0);
    }

    #[test]
    fn delta_first_values() {
        let t = sieve::<f64>(&LFunctionSpec::delta(), 6).unwrap();
        let tau = [1.0, -24.0, 252.0, -1472.0, 4830.0, -6048.0];
        for (m, &tm) in (1..=6u64).zip(&tau) {
            let expected = tm / (m as f64).powf(5.5);
            let got = t.coefficient(m).unwrap();
            assert!((got - expected).abs() <= 1e-14 * expected.abs(), "m = {m}");
        }
        assert_eq!(t.coefficient(2).unwrap(), -24.0 / 2f64.powf(5.5));
    }

    #[test]
    fn coefficient_range() {
        let t = sieve::<f64>(&LFunctionSpec::zeta(), 5).unwrap();
        assert!(t.coefficient(0).is_err());
        assert!(t.coefficient(6).is_err());
        assert!(sieve::<f64>(&LFunctionSpec::zeta(), 0).is_err());
    }

    #[test]
    fn single_entry_table() {
        let t = sieve::<f64>(&LFunctionSpec::delta(), 1).unwrap();
        assert_eq!(t.as_slice(), &[1.0]);
    }

    #[test]
    fn delta_matches_exact_oracle() {
        let x = 10_000u64;
        let t = sieve::<f64>(&LFunctionSpec::delta(), x).unwrap();
        let tau = tau_qexpansion(x as usize).unwrap();
        for m in 1..=x {
            let scaled = t.coefficient(m).unwrap() * (m as f64).powf(5.5);
            let exact = tau[m as usize - 1] as f64;
            assert!(
                (scaled - exact).abs() <= 1e-6 * exact.abs(),
                "m = {m}: {scaled} vs {exact}"
            );
        }
    }

    #[test]
    fn multiplicative_for_every_builtin() {
        let specs = [
            LFunctionSpec::zeta(),
            LFunctionSpec::dirichlet_character(4).unwrap(),
            LFunctionSpec::delta(),
            LFunctionSpec::sato_tate(3),
        ];
        let x = 3000u64;
        for spec in &specs {
            let t = sieve::<f64>(spec, x).unwrap();
            for m in 1..=x {
                for n in 1..=x / m {
                    if gcd(m, n) != 1 {
                        continue;
                    }
                    let lhs = t.coefficient(m * n).unwrap();
                    let rhs = t.coefficient(m).unwrap() * t.coefficient(n).unwrap();
                    assert!(
                        (lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()),
                        "{}",
                        spec.name()
                    );
                }
            }
        }
    }

    #[test]
    fn prime_powers_follow_local_series() {
        let spec = LFunctionSpec::sato_tate(11);
        let x = 5000u64;
        let t = sieve::<f64>(&spec, x).unwrap();
        for p in [2u64, 3, 5, 7, 13, 31, 67] {
            let f = spec.provider().local_factor(p).unwrap();
            let series = local_coefficients(&f, 12);
            let mut pk = 1u64;
            for (k, a) in series.iter().enumerate() {
                if pk > x {
                    break;
                }
                assert!(
                    (t.coefficient(pk).unwrap() - a).abs() < 1e-12,
                    "p^{k} = {pk}"
                );
                pk *= p;
            }
        }
    }

    #[test]
    fn sato_tate_mean_near_zero() {
        let spec = LFunctionSpec::sato_tate(1);
        let x = 100_000u64;
        let t = sieve::<f64>(&spec, x).unwrap();
        let primes: Vec<u64> = (2..=x)
            .filter(|&p| crate::identities::arith::is_prime(p))
            .collect();
        let mean: f64 = primes
            .iter()
            .map(|&p| t.coefficient(p).unwrap())
            .sum::<f64>()
            / primes.len() as f64;
        assert!(mean.abs() < 0.05, "mean a_p = {mean}");
        assert!(primes
            .iter()
            .all(|&p| t.coefficient(p).unwrap().abs() <= 2.0));
    }

    #[test]
    fn degree_is_enforced_and_provider_gaps_fail() {
        let mut polys = BTreeMap::new();
        polys.insert(2u64, vec![1.0, 0.0, 1.0]);
        let spec = LFunctionSpec::new(
            "bad",
            1,
            crate::coefficients::spec::FamilyKind::Custom,
            std::sync::Arc::new(CustomFactors {
                polynomials: polys.clone(),
                default: Some(vec![1.0]),
            }),
        )
        .unwrap();
        assert!(matches!(
            sieve::<f64>(&spec, 10),
            Err(Error::DegreeTooLarge { p: 2, .. })
        ));
        let spec = LFunctionSpec::custom(
            "gappy",
            2,
            CustomFactors {
                polynomials: polys,
                default: None,
            },
        )
        .unwrap();
        assert!(matches!(
            sieve::<f64>(&spec, 10),
            Err(Error::ProviderUndefined(3))
        ));
    }

    #[test]
    fn spinor_profile_flags_large_primes() {
        let mut polys = BTreeMap::new();
        polys.insert(3u64, vec![1.0, -40.0]);
        let spec = LFunctionSpec::custom(
            "spinor",
            4,
            CustomFactors {
                polynomials: polys,
                default: Some(vec![1.0, -1.0, 0.5, -0.25, 0.0625]),
            },
        )
        .unwrap()
        .with_profile(ValidationProfile::SpinorNonSk);
        let t = sieve::<f64>(&spec, 50).unwrap();
        assert_eq!(t.diagnostics().profile_violations, vec![3]);
        assert!(t.diagnostics().magnitude_violations > 0);
    }

    #[test]
    fn f32_tables() {
        let t = sieve::<f32>(&LFunctionSpec::dirichlet_character(4).unwrap(), 9).unwrap();
        assert_eq!(
            t.as_slice(),
            &[1.0f32, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0]
        );
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let t = sieve::<f64>(&LFunctionSpec::delta(), 200).unwrap();
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv.clone()).unwrap();
        assert!(text.starts_with("m,A\n1,1\n"));
        let back = CoefficientTable::<f64>::read_csv("delta", csv.as_slice()).unwrap();
        assert_eq!(back.as_slice(), t.as_slice());

        let mut bin = Vec::new();
        t.write_binary(&mut bin).unwrap();
        assert_eq!(&bin[..4], b"SLBC");
        assert_eq!(u32::from_le_bytes(bin[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bin[8..16].try_into().unwrap()), 200);
        assert_eq!(bin.len(), 16 + 8 * 200);
        let back = CoefficientTable::<f64>::read_binary("delta", bin.as_slice()).unwrap();
        assert_eq!(back.as_slice(), t.as_slice());

        let mut corrupt = bin.clone();
        corrupt[0] = b'X';
        assert!(CoefficientTable::<f64>::read_binary("x", corrupt.as_slice()).is_err());
        assert!(CoefficientTable::<f64>::read_binary("x", &bin[..bin.len() - 3]).is_err());
    }
}

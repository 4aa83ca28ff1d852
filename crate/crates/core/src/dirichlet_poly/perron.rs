use num_complex::Complex;
use serde::Serialize;

use super::{exp_sum_line, simpson};
use crate::coefficients::CoefficientTable;
use crate::error::{Error, Result};
use crate::identities::{coprime_double_polynomial, gcd};
use crate::scalar::Scalar;

/// Window sum Σ A(mk) computed directly and through a truncated Perron integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerronReport<T> {
    pub x: u64,
    pub h: u64,
    pub m: u64,
    pub t_cut: T,
    /// Abscissa of the vertical contour, 1 + 1/log x.
    pub c: T,
    pub contour_value: T,
    pub direct_value: T,
    pub abs_error: T,
    pub step: T,
    pub nodes: usize,
}

/// Compares Σ_{mk∈[x,x+H], m∼M, (m,k)=1} A(mk) with
/// (1/2π)∫_{−T}^{T} D(c+it)(b^{c+it} − a^{c+it})/(c+it) dt.
///
/// The integration limits a = x − 1/2 and b = x + H + 1/2 sit halfway
/// between integers so that no term of D falls on a jump of the Perron kernel.
pub fn perron_window<T: Scalar>(
    table: &CoefficientTable<T>,
    x: u64,
    h: u64,
    m: u64,
    t_cut: T,
    step: Option<T>,
) -> Result<PerronReport<T>> {
    if x < 2 || h == 0 {
        return Err(Error::InvalidParameter(format!(
            "need x >= 2 and H >= 1, got x = {x}, H = {h}"
        )));
    }
    if m == 0 || m >= x {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= M < x, got M = {m}, x = {x}"
        )));
    }
    table.ensure_covers(x + h)?;
    let min_cut = T::from_index(x) / T::from_index(h);
    if !(t_cut >= min_cut) || !t_cut.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "T_cut = {t_cut} is below x/H = {min_cut}"
        )));
    }

    let d = coprime_double_polynomial(table, m, x)?;
    let (k_lo, k_hi) = d.k_range;
    if x.div_ceil(2 * m) < k_lo || (x + h) / (m + 1) > k_hi {
        return Err(Error::InvalidParameter(format!(
            "window [{x}, {}] reaches k outside [{k_lo}, {k_hi}]",
            x + h
        )));
    }

    let mut direct = T::zero();
    for mm in m + 1..=2 * m {
        for kk in x.div_ceil(mm)..=(x + h) / mm {
            if gcd(mm, kk) == 1 {
                direct = direct + table.at(mm * kk);
            }
        }
    }

    let half = T::lit(0.5);
    let c = T::one() + T::one() / T::from_index(x).ln();
    let upper = T::from_index(x + h) + half;
    let lower = T::from_index(x) - half;
    let mut waves = Vec::new();
    for (n, a) in d.poly.terms() {
        let n = T::from_index(n);
        for (y, sign) in [(upper, T::one()), (lower, -T::one())] {
            let f = (y / n).ln();
            waves.push((sign * a * (c * f).exp(), f));
        }
    }
    let f_max = waves.iter().fold(T::zero(), |acc, w| acc.max(w.1.abs()));
    let default_step = if f_max > T::zero() {
        (T::PI() / (T::lit(16.0) * f_max)).min(T::lit(0.1))
    } else {
        T::lit(0.1)
    };
    let step = step.unwrap_or(default_step);
    if !(step > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {step}"
        )));
    }
    let mut intervals = (t_cut / step)
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX)
        .max(2);
    intervals += intervals % 2;
    let dt = t_cut / T::from_index(intervals as u64);
    let sums = exp_sum_line(&waves, T::zero(), dt, intervals + 1);
    let integrand: Vec<T> = sums
        .iter()
        .enumerate()
        .map(|(j, &s)| (s / Complex::new(c, dt * T::from_index(j as u64))).re)
        .collect();
    let contour = simpson(&integrand, dt) / T::PI();

    Ok(PerronReport {
        x,
        h,
        m,
        t_cut,
        c,
        contour_value: contour,
        direct_value: direct,
        abs_error: (contour - direct).abs(),
        step: dt,
        nodes: intervals + 1,
    })
}

/// One sample of |((1+u)^s − 1)/s| against 3·max(u, 1/|Im s|).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelWitness<T> {
    pub s_re: T,
    pub s_im: T,
    pub value: T,
    pub bound: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelCheck<T> {
    pub u: T,
    pub pass: bool,
    pub max_ratio: T,
    /// Samples violating the bound.
    pub witnesses: Vec<KernelWitness<T>>,
}

/// Checks |((1+u)^s − 1)/s| ≤ 3·max(u, 1/|Im s|) at each sample.
///
/// For real s the 1/|Im s| term is dropped; s = 0 takes the limit log(1+u).
pub fn kernel_bound_check<T: Scalar>(u: T, samples: &[Complex<T>]) -> Result<KernelCheck<T>> {
    if !(u > T::zero() && u <= T::one()) {
        return Err(Error::InvalidParameter(format!("need 0 < u <= 1, got {u}")));
    }
    let log1p = u.ln_1p();
    let three = T::lit(3.0);
    let mut max_ratio = T::zero();
    let mut witnesses = Vec::new();
    for &s in samples {
        let zero = s.re == T::zero() && s.im == T::zero();
        if !zero && !(s.re >= T::lit(0.5) && s.re <= T::lit(2.0)) {
            return Err(Error::InvalidParameter(format!(
                "sample {s} lies outside 1/2 <= Re s <= 2"
            )));
        }
        let value = if zero {
            log1p
        } else {
            ((s * log1p).exp() - T::one()).norm() / s.norm()
        };
        let bound = if s.im == T::zero() {
            three * u
        } else {
            three * u.max(T::one() / s.im.abs())
        };
        let ratio = value / bound;
        max_ratio = max_ratio.max(ratio);
        if value > bound {
            witnesses.push(KernelWitness {
                s_re: s.re,
                s_im: s.im,
                value,
                bound,
            });
        }
    }
    Ok(KernelCheck {
        u,
        pass: witnesses.is_empty(),
        max_ratio,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{sieve, LFunctionSpec};

    #[test]
    fn zeta_window() {
        let zeta = sieve::<f64>(&LFunctionSpec::zeta(), 2000).unwrap();
        let r = perron_window(&zeta, 100, 10, 3, 1000.0, None).unwrap();
        // coprime pairs with m ∈ {4,5,6} and mk ∈ [100, 110]
        let mut count = 0;
        for m in 4u64..=6 {
            for k in 1..=110u64 {
                if (100..=110).contains(&(m * k)) && gcd(m, k) == 1 {
                    count += 1;
                }
            }
        }
        assert_eq!(r.direct_value, count as f64);
        assert!(r.abs_error <= 0.5, "{r:?}");
        let finer = perron_window(&zeta, 100, 10, 3, 10_000.0, None).unwrap();
        assert!(finer.abs_error < r.abs_error);
    }

    #[test]
    fn empty_window() {
        // neither 121 nor 122 is a multiple of 4, 5 or 6
        let zeta = sieve::<f64>(&LFunctionSpec::zeta(), 1000).unwrap();
        let r = perron_window(&zeta, 121, 1, 3, 2000.0, None).unwrap();
        assert_eq!(r.direct_value, 0.0);
        assert!(r.contour_value.abs() < 0.5, "{r:?}");
    }

    #[test]
    fn rejects_short_cutoff() {
        let zeta = sieve::<f64>(&LFunctionSpec::zeta(), 1000).unwrap();
        assert!(perron_window(&zeta, 100, 10, 3, 9.0, None).is_err());
        assert!(perron_window(&zeta, 100, 10, 100, 100.0, None).is_err());
        assert!(perron_window(&zeta, 995, 10, 3, 100.0, None).is_err());
    }

    #[test]
    fn kernel_examples() {
        let r = kernel_bound_check(0.01f64, &[Complex::new(2.0, 0.0)]).unwrap();
        assert!(r.pass);
        assert!((r.max_ratio * 0.03 - 0.01005).abs() < 1e-12);

        let s = Complex::new(0.5, 100.0);
        let r = kernel_bound_check(0.01, &[s]).unwrap();
        assert!(r.pass);
        let value = r.max_ratio * 0.03;
        assert!(value <= 2.01 / 100.0);

        let r = kernel_bound_check(0.5, &[Complex::new(0.0, 0.0)]).unwrap();
        assert!((r.max_ratio * 1.5 - 1.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn kernel_sweep() {
        let mut samples = Vec::new();
        for i in 0..=30 {
            for j in -200..=200 {
                samples.push(Complex::new(0.5 + 0.05 * i as f64, 0.37 * j as f64));
            }
        }
        for u in [1e-4, 0.01, 0.3, 1.0] {
            assert!(kernel_bound_check(u, &samples).unwrap().pass, "u = {u}");
        }
        assert!(kernel_bound_check(0.0, &samples).is_err());
        assert!(kernel_bound_check(0.5, &[Complex::new(3.0, 1.0)]).is_err());
    }
}

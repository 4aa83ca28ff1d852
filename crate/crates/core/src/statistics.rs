//! Coefficient statistics: Rankin–Selberg sums, empirical κ, sign-change
//! counts, and S₁/S₂ detection on short windows.

use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::CoefficientTable;
use crate::error::{Error, Result};
use crate::exponents::{delta_of, signchange_exponent, ExponentInputs, ExponentReport};
use crate::identities::arith::factorize;
use crate::identities::gcd;
use crate::scalar::Scalar;

/// Σ_{m≤X} |A(m)|² with its normalizations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RankinSelberg<T> {
    pub x: u64,
    pub sum: T,
    pub ratio_to_x: T,
    pub eps_check: T,
    pub ratio_to_x_eps: T,
}

pub fn rankin_selberg_sum<T: Scalar>(
    table: &CoefficientTable<T>,
    x: u64,
    eps_check: T,
) -> Result<RankinSelberg<T>> {
    table.ensure_covers(x)?;
    let sum: T = table.as_slice()[..x as usize].iter().map(|&a| a * a).sum();
    let xf = T::from_index(x);
    Ok(RankinSelberg {
        x,
        sum,
        ratio_to_x: sum / xf,
        eps_check,
        ratio_to_x_eps: sum / xf.powf(T::one() + eps_check),
    })
}

/// log(Σ_{X<m≤2X} |A(m)|) / log X.
pub fn kappa_empirical<T: Scalar>(table: &CoefficientTable<T>, x: u64) -> Result<T> {
    if x < 2 {
        return Err(Error::InvalidParameter(format!("need X >= 2, got {x}")));
    }
    table.ensure_covers(2 * x)?;
    let block: T = table.as_slice()[x as usize..2 * x as usize]
        .iter()
        .map(|a| a.abs())
        .sum();
    if block == T::zero() {
        return Err(Error::ZeroBlock(x, 2 * x));
    }
    Ok(block.ln() / T::from_index(x).ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    /// Zeros neither count nor break a run.
    SkipZeros,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignChangeSummary {
    pub x_max: u64,
    pub change_count: u64,
    /// Pairs (m, m′) of consecutive nonzero coefficients of opposite sign.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub change_positions: Option<Vec<(u64, u64)>>,
    pub zero_policy: ZeroPolicy,
}

pub fn count_sign_changes<T: Scalar>(
    table: &CoefficientTable<T>,
    x: u64,
    record_positions: bool,
) -> Result<SignChangeSummary> {
    table.ensure_covers(x)?;
    let mut count = 0;
    let mut positions = record_positions.then(Vec::new);
    let mut last: Option<(u64, bool)> = None;
    for (i, &a) in table.as_slice()[..x as usize].iter().enumerate() {
        if a == T::zero() || a.is_nan() {
            continue;
        }
        let m = i as u64 + 1;
        let positive = a > T::zero();
        if let Some((prev, prev_positive)) = last {
            if prev_positive != positive {
                count += 1;
                if let Some(p) = positions.as_mut() {
                    p.push((prev, m));
                }
            }
        }
        last = Some((m, positive));
    }
    Ok(SignChangeSummary {
        x_max: x,
        change_count: count,
        change_positions: positions,
        zero_policy: ZeroPolicy::SkipZeros,
    })
}

/// S₁ = |Σ A(mk)| and S₂ = Σ |A(mk)| over coprime pairs with M < m ≤ 2M,
/// mk ∈ [x, x+H].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowReport<T> {
    pub x: u64,
    #[serde(rename = "H")]
    pub h: u64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "S1")]
    pub s1: T,
    #[serde(rename = "S2")]
    pub s2: T,
    pub detected: bool,
    pub pairs: u64,
}

/// Relative tolerance of the detection test S₁ < S₂ − tol·S₂.
pub const DETECTION_TOLERANCE: f64 = 1e-9;

pub fn window_sums<T: Scalar>(
    table: &CoefficientTable<T>,
    x: u64,
    h: u64,
    m: u64,
) -> Result<WindowReport<T>> {
    if m == 0 || m >= x {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= M < x, got M = {m}, x = {x}"
        )));
    }
    table.ensure_covers(x + h)?;
    Ok(window_unchecked(table, x, h, m))
}

fn window_unchecked<T: Scalar>(
    table: &CoefficientTable<T>,
    x: u64,
    h: u64,
    m: u64,
) -> WindowReport<T> {
    let mut sum = T::zero();
    let mut s2 = T::zero();
    let mut pairs = 0;
    for mm in m + 1..=2 * m {
        for k in x.div_ceil(mm)..=(x + h) / mm {
            if gcd(mm, k) == 1 {
                let a = table.at(mm * k);
                sum = sum + a;
                s2 = s2 + a.abs();
                pairs += 1;
            }
        }
    }
    let s1 = sum.abs();
    WindowReport {
        x,
        h,
        m,
        s1,
        s2,
        detected: s1 < s2 - T::lit(DETECTION_TOLERANCE) * s2,
        pairs,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    /// Stride H; used for counting.
    Disjoint,
    /// Arbitrary stride; diagnostics only.
    Overlapping { stride: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowSweep<T> {
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "H")]
    pub h: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub mode: WindowMode,
    pub windows: u64,
    pub detected: u64,
    pub fraction: T,
    /// One sign change per detected disjoint window.
    pub implied_sign_changes: u64,
    #[serde(skip)]
    pub reports: Vec<WindowReport<T>>,
}

/// Window starts x ∈ {X, X+stride, …} ∩ [X, 2X].
pub fn sign_change_windows<T: Scalar>(
    table: &CoefficientTable<T>,
    x: u64,
    h: u64,
    m: u64,
    mode: WindowMode,
) -> Result<WindowSweep<T>> {
    if h == 0 || h >= x {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= H < X, got H = {h}, X = {x}"
        )));
    }
    if m == 0 || m >= x {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= M < X, got M = {m}, X = {x}"
        )));
    }
    table.ensure_covers(2 * x + h)?;
    let stride = match mode {
        WindowMode::Disjoint => h,
        WindowMode::Overlapping { stride } if stride > 0 => stride,
        WindowMode::Overlapping { .. } => {
            return Err(Error::InvalidParameter("stride must be positive".into()))
        }
    };
    let starts: Vec<u64> = (x..=2 * x).step_by(stride as usize).collect();
    let reports: Vec<WindowReport<T>> = starts
        .par_iter()
        .map(|&start| window_unchecked(table, start, h, m))
        .collect();
    let detected = reports.iter().filter(|r| r.detected).count() as u64;
    let windows = reports.len() as u64;
    Ok(WindowSweep {
        x,
        h,
        m,
        mode,
        windows,
        detected,
        fraction: T::from_index(detected) / T::from_index(windows),
        implied_sign_changes: if mode == WindowMode::Disjoint {
            detected
        } else {
            0
        },
        reports,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// (θ, κ) outside the theorem's hypotheses.
    Vacuous,
}

/// Windows satisfying each link of S₁ < H·X^{−δ²/2} < H·X^{κ−1} < S₂.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChainCounts {
    pub windows: u64,
    pub s1_below: u64,
    pub s2_above: u64,
    pub chain_holds: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport<T> {
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "H")]
    pub h: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub exponents: ExponentReport<T>,
    pub exponent: T,
    /// X^e with implicit constant 1.
    pub predicted: T,
    pub observed: u64,
    pub window_detections: u64,
    pub window_fraction: T,
    /// ln(observed) − e·ln X.
    pub log_ratio: T,
    pub bound_met: bool,
    pub verdict: Verdict,
    pub chain: ChainCounts,
    pub caveat: &'static str,
}

const CONSISTENCY_CAVEAT: &str = "implicit constant in the lower bound taken as 1";

/// Compares observed sign changes up to X with X^e for the given exponents.
pub fn theorem_consistency<T: Scalar>(
    table: &CoefficientTable<T>,
    inputs: ExponentInputs<T>,
    x: u64,
    h: u64,
    m: u64,
) -> Result<ConsistencyReport<T>> {
    let exponents = ExponentReport::compute(inputs)?;
    let e = signchange_exponent(inputs.theta, inputs.kappa, inputs.epsilon)?;
    let observed = count_sign_changes(table, x, false)?.change_count;
    let sweep = sign_change_windows(table, x, h, m, WindowMode::Disjoint)?;

    let xf = T::from_index(x);
    let predicted = xf.powf(e);
    let log_ratio = T::from_index(observed).ln() - e * xf.ln();
    let bound_met = T::from_index(observed) >= predicted;
    let verdict = if !exponents.admissible {
        Verdict::Vacuous
    } else if bound_met {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    let delta = delta_of(inputs.kappa, inputs.epsilon)?;
    let hf = T::from_index(h);
    let s1_cap = hf * xf.powf(-delta * delta / T::lit(2.0));
    let s2_floor = hf * xf.powf(inputs.kappa - T::one());
    let mut chain = ChainCounts {
        windows: sweep.windows,
        s1_below: 0,
        s2_above: 0,
        chain_holds: 0,
    };
    for r in &sweep.reports {
        let below = r.s1 < s1_cap;
        let above = r.s2 > s2_floor;
        chain.s1_below += below as u64;
        chain.s2_above += above as u64;
        chain.chain_holds += (below && above && s1_cap < s2_floor) as u64;
    }

    Ok(ConsistencyReport {
        x,
        h,
        m,
        exponents,
        exponent: e,
        predicted,
        observed,
        window_detections: sweep.detected,
        window_fraction: sweep.fraction,
        log_ratio,
        bound_met,
        verdict,
        chain,
        caveat: CONSISTENCY_CAVEAT,
    })
}

/// Fraction of x ∈ (X, 2X] whose window has S₂ > ρ·H·X^{κ−1−2ε}, against
/// the required proportion X^{2κ−1−3ε}/X.
///
/// ρ = Σ_{M<m≤2M} φ(m)/m² is the density of coprime pairs (m, k) per unit
/// length of the window, so ρ·H is the expected number of summands. The
/// fraction with ρ replaced by 1 is reported alongside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShortIntervalReport<T> {
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "H")]
    pub h: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub kappa: T,
    pub epsilon: T,
    pub pair_density: T,
    pub s2_threshold: T,
    pub fraction: T,
    pub fraction_unit_constant: T,
    pub required_fraction: T,
    pub pass: bool,
}

/// Σ_{M<m≤2M} φ(m)/m².
pub fn coprime_pair_density<T: Scalar>(m: u64) -> T {
    (m + 1..=2 * m)
        .map(|n| {
            let phi = factorize(n)
                .iter()
                .fold(n, |acc, &(p, _)| acc / p * (p - 1));
            T::from_index(phi) / (T::from_index(n) * T::from_index(n))
        })
        .fold(T::zero(), |a, b| a + b)
}

pub fn short_interval_lower_bound<T: Scalar>(
    table: &CoefficientTable<T>,
    x: u64,
    h: u64,
    m: u64,
    kappa: T,
    epsilon: T,
) -> Result<ShortIntervalReport<T>> {
    if h == 0 || h >= x || m == 0 || m >= x {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= H < X and 1 <= M < X, got X = {x}, H = {h}, M = {m}"
        )));
    }
    table.ensure_covers(2 * x + h)?;
    let xf = T::from_index(x);
    let two = T::lit(2.0);
    let unit = T::from_index(h) * xf.powf(kappa - T::one() - two * epsilon);
    let density = coprime_pair_density::<T>(m);
    let threshold = density * unit;
    let s2: Vec<T> = (x + 1..=2 * x)
        .into_par_iter()
        .map(|start| window_unchecked(table, start, h, m).s2)
        .collect();
    let count = |t: T| T::from_index(s2.iter().filter(|&&v| v > t).count() as u64);
    let fraction = count(threshold) / xf;
    let required = xf.powf(two * kappa - T::one() - T::lit(3.0) * epsilon) / xf;
    Ok(ShortIntervalReport {
        x,
        h,
        m,
        kappa,
        epsilon,
        pair_density: density,
        s2_threshold: threshold,
        fraction,
        fraction_unit_constant: count(unit) / xf,
        required_fraction: required,
        pass: fraction >= required,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{sieve, tau_qexpansion, LFunctionSpec};

    fn zeta(x: u64) -> CoefficientTable<f64> {
        sieve(&LFunctionSpec::zeta(), x).unwrap()
    }

    fn chi4(x: u64) -> CoefficientTable<f64> {
        sieve(&LFunctionSpec::dirichlet_character(4).unwrap(), x).unwrap()
    }

    #[test]
    fn rankin_selberg_small() {
        assert_eq!(
            rankin_selberg_sum(&zeta(200), 100, 1e-3).unwrap().sum,
            100.0
        );
        assert_eq!(rankin_selberg_sum(&chi4(20), 10, 1e-3).unwrap().sum, 5.0);
        assert!(rankin_selberg_sum(&chi4(20), 21, 1e-3).is_err());
    }

    #[test]
    fn kappa_small() {
        assert!((kappa_empirical(&zeta(2000), 1000).unwrap() - 1.0).abs() < 1e-15);
        // 500 odd m in (1000, 2000]
        let expected = 500f64.ln() / 1000f64.ln();
        assert!((kappa_empirical(&chi4(2000), 1000).unwrap() - expected).abs() < 1e-15);
        let t = CoefficientTable::from_values("gap", vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            kappa_empirical(&t, 3),
            Err(Error::ZeroBlock(3, 6))
        ));
        assert!(kappa_empirical(&t, 1).is_err());
    }

    #[test]
    fn sign_changes() {
        assert_eq!(
            count_sign_changes(&zeta(500), 500, false)
                .unwrap()
                .change_count,
            0
        );
        let delta = sieve::<f64>(&LFunctionSpec::delta(), 10).unwrap();
        let s = count_sign_changes(&delta, 10, true).unwrap();
        assert_eq!(s.change_count, 7);
        assert_eq!(
            s.change_positions.unwrap(),
            vec![(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (7, 8), (8, 9)]
        );
        let t = CoefficientTable::from_values("t", vec![1.0, 0.0, -1.0]).unwrap();
        assert_eq!(count_sign_changes(&t, 3, false).unwrap().change_count, 1);
    }

    #[test]
    fn sign_changes_scale_invariance() {
        let delta = sieve::<f64>(&LFunctionSpec::delta(), 5000).unwrap();
        let base = count_sign_changes(&delta, 5000, false)
            .unwrap()
            .change_count;
        for factor in [3.5, -1.0, -0.25] {
            let scaled: Vec<f64> = delta.as_slice().iter().map(|a| a * factor).collect();
            let t = CoefficientTable::from_values("scaled", scaled).unwrap();
            assert_eq!(
                count_sign_changes(&t, 5000, false).unwrap().change_count,
                base
            );
        }
    }

    #[test]
    fn delta_sign_changes_match_integer_scan() {
        let tau = tau_qexpansion(20_000).unwrap();
        let delta = sieve::<f64>(&LFunctionSpec::delta(), 20_000).unwrap();
        let signs: Vec<i128> = tau.iter().map(|t| t.signum()).filter(|&s| s != 0).collect();
        let expected = signs.windows(2).filter(|w| w[0] != w[1]).count() as u64;
        assert_eq!(
            count_sign_changes(&delta, 20_000, false)
                .unwrap()
                .change_count,
            expected
        );
    }

    #[test]
    fn zeta_window_is_one_signed() {
        let r = window_sums(&zeta(200), 100, 10, 3).unwrap();
        let mut pairs = 0;
        for m in 4u64..=6 {
            for k in 1..=110 {
                if (100..=110).contains(&(m * k)) && gcd(m, k) == 1 {
                    pairs += 1;
                }
            }
        }
        assert_eq!(r.s1, pairs as f64);
        assert_eq!(r.s2, r.s1);
        assert_eq!(r.pairs, pairs);
        assert!(!r.detected);
    }

    #[test]
    fn chi4_window_detects() {
        let r = window_sums(&chi4(100), 20, 20, 2).unwrap();
        assert!(r.s1 < r.s2);
        assert!(r.detected);
    }

    #[test]
    fn empty_window() {
        // m ∈ {4,5,6}: no mk equals 101
        let r = window_sums(&zeta(200), 101, 0, 3).unwrap();
        assert_eq!((r.s1, r.s2, r.detected, r.pairs), (0.0, 0.0, false, 0));
        assert!(window_sums(&zeta(200), 10, 5, 10).is_err());
    }

    #[test]
    fn sweeps() {
        let z = sign_change_windows(&zeta(3000), 1000, 10, 2, WindowMode::Disjoint).unwrap();
        assert_eq!(z.fraction, 0.0);
        assert_eq!(z.windows, 101);
        let chi = chi4(3000);
        let c = sign_change_windows(&chi, 1000, 10, 2, WindowMode::Disjoint).unwrap();
        // a window detects iff it holds nonzero terms of both signs
        let mut mixed = 0;
        for x in (1000u64..=2000).step_by(10) {
            let (mut pos, mut neg) = (false, false);
            for m in 3u64..=4 {
                for k in x.div_ceil(m)..=(x + 10) / m {
                    if gcd(m, k) == 1 {
                        let a = chi.coefficient(m * k).unwrap();
                        pos |= a > 0.0;
                        neg |= a < 0.0;
                    }
                }
            }
            mixed += (pos && neg) as u64;
        }
        assert_eq!(c.detected, mixed);
        assert!(c.fraction > 0.2 && c.fraction < 0.25, "{}", c.fraction);
        assert_eq!(c.implied_sign_changes, c.detected);
        let o = sign_change_windows(
            &chi4(3000),
            1000,
            10,
            2,
            WindowMode::Overlapping { stride: 1 },
        )
        .unwrap();
        assert_eq!(o.windows, 1001);
        assert_eq!(o.implied_sign_changes, 0);
        assert!(sign_change_windows(&zeta(3000), 100, 100, 2, WindowMode::Disjoint).is_err());
        assert!(sign_change_windows(&zeta(3000), 1000, 1001, 2, WindowMode::Disjoint).is_err());
        assert!(sign_change_windows(&zeta(2000), 1000, 10, 2, WindowMode::Disjoint).is_err());
    }

    #[test]
    fn delta_sweep_detects_most_windows() {
        let delta = sieve::<f64>(&LFunctionSpec::delta(), 20_100).unwrap();
        let s = sign_change_windows(&delta, 10_000, 100, 10, WindowMode::Disjoint).unwrap();
        assert!(s.fraction >= 0.5, "{}", s.fraction);
    }

    #[test]
    fn consistency_on_positive_and_alternating_tables() {
        let inputs = ExponentInputs::new(1.0 / 6.0, 0.99, 1e-3).unwrap();
        let z = theorem_consistency(&zeta(3000), inputs, 1000, 31, 10).unwrap();
        assert_eq!(z.observed, 0);
        assert_eq!(z.verdict, Verdict::Fail);

        let alternating: Vec<f64> = (1..=3000)
            .map(|m| if m % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let t = CoefficientTable::from_values("alternating", alternating).unwrap();
        let r = theorem_consistency(
            &t,
            ExponentInputs::new(0.3, 1.0, 1e-3).unwrap(),
            1000,
            31,
            10,
        )
        .unwrap();
        assert_eq!(r.observed, 999);
        assert!(r.exponent < 1.0);
        assert_eq!(r.verdict, Verdict::Pass);

        let vacuous = ExponentInputs::new(1.0, 0.9, 1e-3).unwrap();
        assert_eq!(
            theorem_consistency(&t, vacuous, 1000, 31, 10)
                .unwrap()
                .verdict,
            Verdict::Vacuous
        );
    }

    #[test]
    fn short_interval_shape_on_delta() {
        let x = 10_000u64;
        let delta = sieve::<f64>(&LFunctionSpec::delta(), 2 * x + 100).unwrap();
        let kappa = kappa_empirical(&delta, x).unwrap();
        let h = (x as f64).powf(0.3).round() as u64;
        let m = ((x as f64).powf(0.05).round() as u64).max(1);
        let r = short_interval_lower_bound(&delta, x, h, m, kappa, 1e-3).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.fraction_unit_constant <= r.fraction);
    }

    #[test]
    fn pair_density() {
        // φ(3)/9 + φ(4)/16
        let rho: f64 = coprime_pair_density(2);
        assert!((rho - (2.0 / 9.0 + 2.0 / 16.0)).abs() < 1e-15);
        let big: f64 = coprime_pair_density(10_000);
        let limit = 6.0 / std::f64::consts::PI.powi(2) * std::f64::consts::LN_2;
        assert!((big - limit).abs() < 1e-3);
    }
}

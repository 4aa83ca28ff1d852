//! Admissibility conditions and exponent formulas of the sign-change theorem.
//!
//! For θ ≥ 1/2 the theorem needs κ ≥ 1 − 1/(2(7θ+3+√((7θ+3)²+2))²) and
//! yields X^{2κ−2+1/(2θ)−δ−(6δ+2δ²)/(2θ)} sign changes; for θ ≤ 1/2 it
//! needs κ ≥ −17/2 + 3√10 and yields X^{2κ−1−6δ}. Here δ = √(2−2κ+ε).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which half of the theorem applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    HighTheta,
    LowTheta,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::HighTheta => "high_theta",
            Branch::LowTheta => "low_theta",
        })
    }
}

fn half<T: Scalar>() -> T {
    T::lit(0.5)
}

/// 7θ + 3 + √((7θ+3)² + 2).
fn high_root<T: Scalar>(theta: T) -> T {
    let a = T::lit(7.0) * theta + T::lit(3.0);
    a + (a * a + T::lit(2.0)).sqrt()
}

/// 1 − 1/(2(7θ+3+√((7θ+3)²+2))²).
pub fn kappa_threshold_high<T: Scalar>(theta: T) -> T {
    let r = high_root(theta);
    T::one() - T::one() / (T::lit(2.0) * r * r)
}

/// −17/2 + 3√10.
pub fn kappa_threshold_low<T: Scalar>() -> T {
    T::lit(3.0) * T::lit(10.0).sqrt() - T::lit(8.5)
}

/// Smallest admissible κ. At θ = 1/2 both hypotheses are available and the
/// high-θ value is returned; see [`ExponentReport::boundary`] for both.
pub fn kappa_threshold<T: Scalar>(theta: T) -> T {
    if theta >= half() {
        kappa_threshold_high(theta)
    } else {
        kappa_threshold_low()
    }
}

/// δ = √(2 − 2κ + ε).
pub fn delta_of<T: Scalar>(kappa: T, epsilon: T) -> Result<T> {
    let radicand = T::lit(2.0) - T::lit(2.0) * kappa + epsilon;
    if radicand < T::zero() {
        return Err(Error::NegativeRadicand(radicand.as_f64()));
    }
    Ok(radicand.sqrt())
}

/// Largest δ allowed in the high-θ branch; `None` below θ = 1/2.
pub fn delta_max<T: Scalar>(theta: T) -> Option<T> {
    (theta >= half()).then(|| T::one() / high_root(theta))
}

/// Exponent of the window length H = X^e and the constraint 6δ ≤ e ≤ 1 − 6δ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HExponent<T> {
    pub value: T,
    pub lower: T,
    pub upper: T,
    pub within_constraint: bool,
    pub branch: Branch,
}

const CONSTRAINT_SLACK: f64 = 1e-12;

/// 1 + δ − 1/(2θ) + (6δ+2δ²)/(2θ) for θ ≥ 1/2, and 6δ below.
pub fn h_exponent<T: Scalar>(theta: T, delta: T) -> Result<HExponent<T>> {
    if !(theta >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "theta must be >= 0, got {theta}"
        )));
    }
    if !(delta >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "delta must be >= 0, got {delta}"
        )));
    }
    let six_delta = T::lit(6.0) * delta;
    let (value, branch) = if theta >= half() {
        let two_theta = T::lit(2.0) * theta;
        let v = T::one() + delta - T::one() / two_theta
            + (six_delta + T::lit(2.0) * delta * delta) / two_theta;
        (v, Branch::HighTheta)
    } else {
        (six_delta, Branch::LowTheta)
    };
    let lower = six_delta;
    let upper = T::one() - six_delta;
    let slack = T::lit(CONSTRAINT_SLACK);
    Ok(HExponent {
        value,
        lower,
        upper,
        within_constraint: value >= lower - slack && value <= upper + slack,
        branch,
    })
}

/// 2κ − 2 + 1/(2θ) − δ − (6δ+2δ²)/(2θ).
pub fn signchange_exponent_high<T: Scalar>(theta: T, kappa: T, epsilon: T) -> Result<T> {
    let delta = delta_of(kappa, epsilon)?;
    let two_theta = T::lit(2.0) * theta;
    Ok(T::lit(2.0) * kappa - T::lit(2.0) + T::one() / two_theta
        - delta
        - (T::lit(6.0) * delta + T::lit(2.0) * delta * delta) / two_theta)
}

/// 2κ − 1 − 6δ.
pub fn signchange_exponent_low<T: Scalar>(kappa: T, epsilon: T) -> Result<T> {
    let delta = delta_of(kappa, epsilon)?;
    Ok(T::lit(2.0) * kappa - T::one() - T::lit(6.0) * delta)
}

/// Exponent e of the lower bound X^e on the number of sign changes. At
/// θ = 1/2 the larger of the two branch values is returned.
pub fn signchange_exponent<T: Scalar>(theta: T, kappa: T, epsilon: T) -> Result<T> {
    validate_inputs(theta, kappa, epsilon)?;
    Ok(select(theta, kappa, epsilon)?.0)
}

fn select<T: Scalar>(theta: T, kappa: T, epsilon: T) -> Result<(T, Branch)> {
    if theta > half() {
        Ok((
            signchange_exponent_high(theta, kappa, epsilon)?,
            Branch::HighTheta,
        ))
    } else if theta < half() {
        Ok((signchange_exponent_low(kappa, epsilon)?, Branch::LowTheta))
    } else {
        let high = signchange_exponent_high(theta, kappa, epsilon)?;
        let low = signchange_exponent_low(kappa, epsilon)?;
        Ok(if high >= low {
            (high, Branch::HighTheta)
        } else {
            (low, Branch::LowTheta)
        })
    }
}

fn validate_inputs<T: Scalar>(theta: T, kappa: T, epsilon: T) -> Result<()> {
    if !(theta >= T::zero()) || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "theta must be finite and >= 0, got {theta}"
        )));
    }
    if !(kappa > T::zero() && kappa <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "kappa must lie in (0, 1], got {kappa}"
        )));
    }
    if !(epsilon >= T::zero()) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and >= 0, got {epsilon}"
        )));
    }
    Ok(())
}

/// Convexity exponent d/4.
pub fn convexity_theta<T: Scalar>(d: u32) -> Result<T> {
    if d == 0 {
        return Err(Error::InvalidParameter("degree must be >= 1".into()));
    }
    Ok(T::from_index(d as u64) / T::lit(4.0))
}

/// Sign-change exponent for κ = 1 in the limit ε → 0, i.e. 1/(2θ) for θ ≥ 1/2.
pub fn gsp4_corollary<T: Scalar>(theta: T) -> Result<T> {
    if !(theta >= half()) {
        return Err(Error::InvalidParameter(format!(
            "the corollary assumes theta >= 1/2, got {theta}"
        )));
    }
    signchange_exponent(theta, T::one(), T::zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentInputs<T> {
    pub theta: T,
    pub kappa: T,
    pub epsilon: T,
    pub degree: Option<u32>,
}

impl<T: Scalar> ExponentInputs<T> {
    pub fn new(theta: T, kappa: T, epsilon: T) -> Result<Self> {
        validate_inputs(theta, kappa, epsilon)?;
        delta_of(kappa, epsilon)?;
        Ok(Self {
            theta,
            kappa,
            epsilon,
            degree: None,
        })
    }

    /// θ defaults to the convexity value d/4.
    pub fn from_degree(d: u32, kappa: T, epsilon: T) -> Result<Self> {
        let mut inputs = Self::new(convexity_theta(d)?, kappa, epsilon)?;
        inputs.degree = Some(d);
        Ok(inputs)
    }
}

/// Both branch values at θ = 1/2, where the two hypotheses overlap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryBranches<T> {
    pub kappa_threshold_high: T,
    pub kappa_threshold_low: T,
    pub signchange_high: T,
    pub signchange_low: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentReport<T> {
    pub inputs: ExponentInputs<T>,
    pub admissible: bool,
    pub kappa_threshold: T,
    pub delta: T,
    /// `None` for θ < 1/2.
    pub delta_max: Option<T>,
    pub h_exponent: HExponent<T>,
    pub signchange_exponent: T,
    pub branch: Branch,
    /// Present only at θ = 1/2.
    pub boundary: Option<BoundaryBranches<T>>,
}

impl<T: Scalar> ExponentReport<T> {
    pub fn compute(inputs: ExponentInputs<T>) -> Result<Self> {
        let ExponentInputs {
            theta,
            kappa,
            epsilon,
            ..
        } = inputs;
        validate_inputs(theta, kappa, epsilon)?;
        let threshold = kappa_threshold(theta);
        let delta = delta_of(kappa, epsilon)?;
        let (exponent, branch) = select(theta, kappa, epsilon)?;
        let boundary = if theta == half() {
            Some(BoundaryBranches {
                kappa_threshold_high: kappa_threshold_high(theta),
                kappa_threshold_low: kappa_threshold_low(),
                signchange_high: signchange_exponent_high(theta, kappa, epsilon)?,
                signchange_low: signchange_exponent_low(kappa, epsilon)?,
            })
        } else {
            None
        };
        Ok(Self {
            inputs,
            admissible: kappa >= threshold,
            kappa_threshold: threshold,
            delta,
            delta_max: delta_max(theta),
            h_exponent: h_exponent(theta, delta)?,
            signchange_exponent: exponent,
            branch,
            boundary,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert!((kappa_threshold(0.5f64) - 0.9971).abs() < 1e-4);
        assert!((kappa_threshold(0.5f64) - 0.997109).abs() < 1e-6);
        assert!((kappa_threshold(0.3f64) - 0.986833).abs() < 1e-6);
        let t10 = kappa_threshold(10.0f64);
        assert!(t10 < 1.0 && t10 > kappa_threshold(0.5));
        let mut last = kappa_threshold(0.5f64);
        for i in 1..=1000 {
            let v = kappa_threshold(0.5 + 0.01 * i as f64);
            assert!(v >= last);
            last = v;
        }
        let far = kappa_threshold(1e6f64);
        assert!(far < 1.0 && far > 1.0 - 1e-12);
    }

    #[test]
    fn deltas() {
        assert_eq!(delta_of(1.0f64, 0.0).unwrap(), 0.0);
        assert!((delta_of(1.0f64, 0.04).unwrap() - 0.2).abs() < 1e-15);
        assert!((delta_of(0.9971f64, 0.0).unwrap() - 0.0058f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            delta_of(1.0f64, -0.1),
            Err(Error::NegativeRadicand(_))
        ));
        assert!((delta_max(0.5f64).unwrap() - 1.0 / (6.5 + 44.25f64.sqrt())).abs() < 1e-15);
        assert!((delta_max(0.5f64).unwrap() - 0.076034).abs() < 1e-6);
        assert!((delta_max(1.0f64).unwrap() - 1.0 / (10.0 + 102f64.sqrt())).abs() < 1e-15);
        assert!((delta_max(1.0f64).unwrap() - 0.049751).abs() < 5e-6);
        assert!(delta_max(1e6f64).unwrap() < 1e-7);
        assert_eq!(delta_max(0.3f64), None);
    }

    #[test]
    fn h_exponents() {
        let low = h_exponent(0.3f64, 0.05).unwrap();
        assert!((low.value - 0.3).abs() < 1e-15);
        assert_eq!(low.branch, Branch::LowTheta);
        let mid = h_exponent(0.5f64, 0.05).unwrap();
        assert!((mid.value - 0.355).abs() < 1e-12);
        let one = h_exponent(1.0f64, 0.0497).unwrap();
        let expected = 1.0 + 0.0497 - 0.5 + (6.0 * 0.0497 + 2.0 * 0.0497 * 0.0497) / 2.0;
        assert!((one.value - expected).abs() < 1e-15);
        assert!((one.value - 0.7013).abs() < 1e-4);
        // past delta_max the window no longer fits below 1 − 6δ
        let over = h_exponent(1.0f64, 0.06).unwrap();
        assert!(!over.within_constraint);
        assert!(h_exponent(1.0f64, -0.1).is_err());
    }

    #[test]
    fn delta_max_saturates_constraint() {
        for i in 0..100 {
            let theta = 0.5 + 4.5 * i as f64 / 99.0;
            let d = delta_max(theta).unwrap();
            let h = h_exponent(theta, d).unwrap();
            assert!((h.value - (1.0 - 6.0 * d)).abs() < 1e-12, "theta = {theta}");
        }
    }

    #[test]
    fn signchange_values() {
        for theta in [0.5f64, 0.75, 1.0, 2.0] {
            assert_eq!(
                signchange_exponent(theta, 1.0, 0.0).unwrap(),
                1.0 / (2.0 * theta)
            );
        }
        assert_eq!(signchange_exponent(0.3f64, 1.0, 0.0).unwrap(), 1.0);
        let v = signchange_exponent(0.3f64, 0.99, 0.0001).unwrap();
        assert!((v - (0.98 - 6.0 * 0.0201f64.sqrt())).abs() < 1e-15);
        assert!((v - 0.1293).abs() < 1e-4);
        assert!(signchange_exponent(0.3f64, 1.2, 0.0).is_err());
    }

    #[test]
    fn signchange_nonincreasing_in_theta() {
        let mut last = signchange_exponent(0.5f64, 1.0, 0.0).unwrap();
        for i in 1..500 {
            let v = signchange_exponent(0.5 + 0.02 * i as f64, 1.0, 0.0).unwrap();
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn admissible_h_exponent_in_range() {
        for i in 0..=450 {
            let theta = 0.5 + 0.01 * i as f64;
            let kappa = kappa_threshold(theta);
            let delta = delta_of(kappa, 0.0).unwrap();
            let h = h_exponent(theta, delta).unwrap();
            assert!(h.within_constraint, "theta = {theta}");
        }
    }

    #[test]
    fn convexity_and_corollary() {
        assert_eq!(convexity_theta::<f64>(2).unwrap(), 0.5);
        assert_eq!(convexity_theta::<f64>(3).unwrap(), 0.75);
        assert_eq!(convexity_theta::<f64>(4).unwrap(), 1.0);
        assert!(convexity_theta::<f64>(0).is_err());
        assert_eq!(gsp4_corollary(1.0f64).unwrap(), 0.5);
        assert_eq!(gsp4_corollary(0.5f64).unwrap(), 1.0);
        assert_eq!(gsp4_corollary(2.0f64).unwrap(), 0.25);
        assert!(gsp4_corollary(0.3f64).is_err());
    }

    #[test]
    fn report_at_boundary() {
        let r = ExponentReport::compute(ExponentInputs::new(0.5f64, 0.998, 0.0).unwrap()).unwrap();
        assert!(r.admissible);
        let b = r.boundary.unwrap();
        assert!(b.kappa_threshold_low < b.kappa_threshold_high);
        assert_eq!(
            r.signchange_exponent,
            b.signchange_high.max(b.signchange_low)
        );
        assert!(r.h_exponent.within_constraint);

        let r =
            ExponentReport::compute(ExponentInputs::from_degree(4, 0.9, 1e-3).unwrap()).unwrap();
        assert!(!r.admissible);
        assert_eq!(r.inputs.theta, 1.0);
        assert_eq!(r.boundary, None);
    }

    #[test]
    fn f32_exponents() {
        assert!((kappa_threshold(0.3f32) - 0.986833).abs() < 1e-5);
        assert_eq!(signchange_exponent(1.0f32, 1.0, 0.0).unwrap(), 0.5);
    }
}

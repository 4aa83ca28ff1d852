use serde::Serialize;

use super::{simpson, DirichletPolynomial};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// ∫_{−T}^{T} |F(1/2+it)|² dt with its step-halving error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentEstimate<T> {
    /// Simpson value at half the nominal step.
    pub value: T,
    /// Simpson value at the nominal step.
    pub coarse: T,
    /// |value − coarse|.
    pub halving_delta: T,
    /// Nominal step.
    pub step: T,
    pub t_max: T,
}

impl<T: Scalar> MomentEstimate<T> {
    pub fn relative_halving_delta(&self) -> T {
        if self.value == T::zero() {
            self.halving_delta
        } else {
            self.halving_delta / self.value.abs()
        }
    }
}

/// Lemma 3 sanity ratio: moment / ((N + T)·Σ|a_n|²/n) with N = n_lo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MvtReport<T> {
    pub moment: MomentEstimate<T>,
    pub length: u64,
    pub norm: T,
    pub ratio: T,
}

/// Default quadrature step π/(8 log n_hi); the coarsest accepted is twice that.
fn step_bounds<T: Scalar>(poly: &DirichletPolynomial<T>) -> (T, T) {
    let freq = poly.max_frequency();
    if freq == T::zero() {
        (T::infinity(), T::infinity())
    } else {
        (
            T::PI() / (T::lit(8.0) * freq),
            T::PI() / (T::lit(4.0) * freq),
        )
    }
}

/// Composite Simpson over [0, T], doubled by conjugate symmetry of |F|².
pub fn second_moment<T: Scalar>(
    poly: &DirichletPolynomial<T>,
    t_max: T,
    step: Option<T>,
) -> Result<MomentEstimate<T>> {
    if !(t_max >= T::zero()) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "T must be finite and >= 0, got {t_max}"
        )));
    }
    let (default_step, coarsest) = step_bounds(poly);
    let step = step.unwrap_or(default_step);
    if !(step > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {step}"
        )));
    }
    if step > coarsest {
        return Err(Error::StepTooCoarse {
            step: step.as_f64(),
            required: coarsest.as_f64(),
        });
    }
    if t_max == T::zero() {
        return Ok(MomentEstimate {
            value: T::zero(),
            coarse: T::zero(),
            halving_delta: T::zero(),
            step,
            t_max,
        });
    }

    let mut intervals = (t_max / step)
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX)
        .max(2);
    intervals += intervals % 2;
    let h = t_max / T::from_index(intervals as u64);
    let fine: Vec<T> = poly
        .evaluate_line(T::lit(0.5), T::zero(), h / T::lit(2.0), 2 * intervals + 1)
        .into_iter()
        .map(|z| z.norm_sqr())
        .collect();
    let coarse: Vec<T> = fine.iter().step_by(2).copied().collect();
    let two = T::lit(2.0);
    let coarse = two * simpson(&coarse, h);
    let value = two * simpson(&fine, h / two);
    Ok(MomentEstimate {
        value,
        coarse,
        halving_delta: (value - coarse).abs(),
        step: h,
        t_max,
    })
}

pub fn mvt_ratio<T: Scalar>(
    poly: &DirichletPolynomial<T>,
    t_max: T,
    step: Option<T>,
) -> Result<MvtReport<T>> {
    let moment = second_moment(poly, t_max, step)?;
    let norm = poly.weighted_square_norm();
    let denominator = (T::from_index(poly.n_lo()) + t_max) * norm;
    if denominator == T::zero() {
        return Err(Error::InvalidParameter(
            "mean-value denominator vanishes (zero polynomial)".into(),
        ));
    }
    Ok(MvtReport {
        moment,
        length: poly.n_lo(),
        norm,
        ratio: moment.value / denominator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_term_is_exact() {
        let p = DirichletPolynomial::monomial(7, 1.0f64).unwrap();
        let m = second_moment(&p, 25.0, None).unwrap();
        assert!((m.value - 50.0 / 7.0).abs() < 1e-12);
        let r = mvt_ratio(&p, 25.0, None).unwrap();
        assert!((r.ratio - 50.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn two_terms_closed_form() {
        // |1 + 2^{−1/2−it}|² = 3/2 + √2 cos(t log 2)
        let p = DirichletPolynomial::new(1, vec![1.0, 1.0]).unwrap();
        let t: f64 = 10.0;
        let ln2 = std::f64::consts::LN_2;
        let exact = 3.0 * t + 2.0 * 2f64.sqrt() * (t * ln2).sin() / ln2;
        let m = second_moment(&p, t, None).unwrap();
        assert!(
            (m.value - exact).abs() < 1e-6 * exact,
            "{} vs {exact}",
            m.value
        );
        assert!((m.value - exact).abs() <= m.halving_delta);
    }

    #[test]
    fn zero_length_and_bad_steps() {
        let p = DirichletPolynomial::new(1, vec![1.0, -0.5, 0.25]).unwrap();
        assert_eq!(second_moment(&p, 0.0, None).unwrap().value, 0.0);
        let coarse = std::f64::consts::PI / (4.0 * 3f64.ln());
        assert!(second_moment(&p, 10.0, Some(coarse)).is_ok());
        assert!(matches!(
            second_moment(&p, 10.0, Some(coarse * 1.01)),
            Err(Error::StepTooCoarse { .. })
        ));
        assert!(second_moment(&p, -1.0, None).is_err());
        let zero = DirichletPolynomial::new(3, vec![0.0]).unwrap();
        assert!(mvt_ratio(&zero, 5.0, None).is_err());
    }

    #[test]
    fn monotone_in_t() {
        let p = DirichletPolynomial::new(2, vec![1.0, -1.0, 0.5, 2.0, -0.3]).unwrap();
        let mut last = 0.0;
        for t in [0.5, 1.0, 3.0, 10.0, 40.0] {
            let v = second_moment(&p, t, None).unwrap().value;
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn parseval_limit() {
        let p = DirichletPolynomial::new(5, vec![1.0, -2.0, 0.5, 0.0, 1.5, -1.0]).unwrap();
        let t = 100.0 * p.n_hi() as f64;
        let m = second_moment(&p, t, None).unwrap();
        let norm = p.weighted_square_norm();
        let rel = (m.value / (2.0 * t) - norm).abs() / norm;
        assert!(rel < 0.1, "{rel}");
    }

    #[test]
    fn random_signs_respect_mean_value_shape() {
        let mut worst: f64 = 0.0;
        for seed in 0..4u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coeffs: Vec<f64> = (0..1000)
                .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let p = DirichletPolynomial::new(1001, coeffs).unwrap();
            worst = worst.max(mvt_ratio(&p, 1000.0, None).unwrap().ratio);
        }
        assert!(worst <= 8.0, "{worst}");
    }

    #[test]
    fn f32_moment() {
        let p = DirichletPolynomial::monomial(4u64, 1.0f32).unwrap();
        let m = second_moment(&p, 8.0f32, None).unwrap();
        assert!((m.value - 4.0).abs() < 1e-4);
    }
}

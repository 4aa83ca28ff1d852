use num_complex::Complex;
use serde::Serialize;

use super::build_k;
use crate::coefficients::CoefficientTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileOptions<T> {
    pub eps_check: T,
    /// Grid step; defaults to π/(8 log n_hi).
    pub step: Option<T>,
    /// Number of grid maxima refined by golden-section search.
    pub refine_peaks: usize,
    pub keep_samples: bool,
}

impl<T: Scalar> Default for ProfileOptions<T> {
    fn default() -> Self {
        Self {
            eps_check: T::lit(1e-3),
            step: None,
            refine_peaks: 8,
            keep_samples: false,
        }
    }
}

/// sup_{|t| ≤ T} |K(1/2+it)| against T^{θ+ε} + (X/(MT))^{1/2+ε}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileReport<T> {
    pub x: u64,
    pub m: u64,
    pub k_lo: u64,
    pub k_hi: u64,
    pub t_max: T,
    pub theta: T,
    pub eps_check: T,
    pub step: T,
    pub grid_points: usize,
    pub sup: T,
    pub t_at_sup: T,
    pub envelope: T,
    pub ratio: T,
    /// (t, |K(1/2+it)|) on the grid, t ≥ 0.
    #[serde(skip)]
    pub samples: Option<Vec<(T, T)>>,
}

pub fn k_subconvexity_profile<T: Scalar>(
    table: &CoefficientTable<T>,
    x: u64,
    m: u64,
    t_max: T,
    theta: T,
    options: &ProfileOptions<T>,
) -> Result<ProfileReport<T>> {
    if !(t_max >= T::lit(2.0)) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "T must be finite and >= 2, got {t_max}"
        )));
    }
    if !(theta >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "theta must be >= 0, got {theta}"
        )));
    }
    let k = build_k(table, x, m)?;
    let freq = k.max_frequency();
    let coarsest = if freq == T::zero() {
        T::infinity()
    } else {
        T::PI() / (T::lit(4.0) * freq)
    };
    let step = match options.step {
        Some(s) if !(s > T::zero()) => {
            return Err(Error::InvalidParameter(format!(
                "step must be positive, got {s}"
            )))
        }
        Some(s) if s > coarsest => {
            return Err(Error::StepTooCoarse {
                step: s.as_f64(),
                required: coarsest.as_f64(),
            })
        }
        Some(s) => s,
        None => coarsest / T::lit(2.0),
    };
    let intervals = (t_max / step)
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX)
        .max(1);
    let h = t_max / T::from_index(intervals as u64);
    let half = T::lit(0.5);
    let grid: Vec<T> = k
        .evaluate_line(half, T::zero(), h, intervals + 1)
        .into_iter()
        .map(|z| z.norm())
        .collect();
    let t_at = |i: usize| h * T::from_index(i as u64);

    let (mut best_i, mut sup) = (0, grid[0]);
    for (i, &v) in grid.iter().enumerate() {
        if v > sup {
            best_i = i;
            sup = v;
        }
    }
    let mut t_at_sup = t_at(best_i);

    let mut peaks: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let left = i == 0 || grid[i - 1] <= grid[i];
            let right = i + 1 == grid.len() || grid[i + 1] <= grid[i];
            left && right
        })
        .collect();
    peaks.sort_by(|&a, &b| {
        grid[b]
            .partial_cmp(&grid[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    peaks.truncate(options.refine_peaks);
    let modulus = |t: T| k.evaluate(Complex::new(half, t)).norm();
    for i in peaks {
        let lo = if i == 0 { T::zero() } else { t_at(i - 1) };
        let hi = if i + 1 == grid.len() {
            t_max
        } else {
            t_at(i + 1)
        };
        let (t, v) = golden_max(modulus, lo, hi, 60);
        if v > sup {
            sup = v;
            t_at_sup = t;
        }
    }

    let eps = options.eps_check;
    let ratio_xmt = T::from_index(x) / (T::from_index(m) * t_max);
    let envelope = t_max.powf(theta + eps) + ratio_xmt.powf(half + eps);
    let samples = options.keep_samples.then(|| {
        grid.iter()
            .enumerate()
            .map(|(i, &v)| (t_at(i), v))
            .collect()
    });
    Ok(ProfileReport {
        x,
        m,
        k_lo: k.n_lo(),
        k_hi: k.n_hi(),
        t_max,
        theta,
        eps_check: eps,
        step: h,
        grid_points: grid.len(),
        sup,
        t_at_sup,
        envelope,
        ratio: sup / envelope,
        samples,
    })
}

/// Golden-section search for a maximum of `f` on [lo, hi].
fn golden_max<T: Scalar>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, iterations: usize) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..iterations {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    if fa >= fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{sieve, LFunctionSpec};

    #[test]
    fn golden_section_finds_cosine_peak() {
        let (t, v) = golden_max(|t: f64| (t - 1.3).cos(), 0.0, 3.0, 80);
        assert!((t - 1.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_term_k() {
        let zeta = sieve::<f64>(&LFunctionSpec::zeta(), 10).unwrap();
        let r = k_subconvexity_profile(&zeta, 1, 3, 5.0, 1.0 / 6.0, &ProfileOptions::default())
            .unwrap();
        assert_eq!((r.k_lo, r.k_hi), (1, 1));
        assert!((r.sup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zeta_profile_is_finite_and_beats_grid() {
        let zeta = sieve::<f64>(&LFunctionSpec::zeta(), 3000).unwrap();
        let opts = ProfileOptions {
            keep_samples: true,
            ..ProfileOptions::default()
        };
        let r = k_subconvexity_profile(&zeta, 10_000 / 10, 10, 100.0, 1.0 / 6.0, &opts).unwrap();
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        let grid_max = r
            .samples
            .as_ref()
            .unwrap()
            .iter()
            .map(|s| s.1)
            .fold(0.0, f64::max);
        assert!(r.sup >= grid_max);
        assert!(r.sup <= grid_max * 1.05);
        assert_eq!(r.samples.unwrap().len(), r.grid_points);
    }

    #[test]
    fn rejects_small_t_and_coarse_steps() {
        let zeta = sieve::<f64>(&LFunctionSpec::zeta(), 300).unwrap();
        let opts = ProfileOptions::default();
        assert!(k_subconvexity_profile(&zeta, 100, 1, 1.0, 0.5, &opts).is_err());
        let coarse = ProfileOptions {
            step: Some(1.0),
            ..opts
        };
        assert!(matches!(
            k_subconvexity_profile(&zeta, 100, 1, 10.0, 0.5, &coarse),
            Err(Error::StepTooCoarse { .. })
        ));
    }
}

//! Dirichlet polynomials on vertical lines: evaluation, second moments, the
//! partial-sum profile of K(s), and Perron windows.

mod moments;
mod perron;
mod profile;

use num_complex::Complex;
use rayon::prelude::*;

use crate::coefficients::CoefficientTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use moments::{mvt_ratio, second_moment, MomentEstimate, MvtReport};
pub use perron::{kernel_bound_check, perron_window, KernelCheck, KernelWitness, PerronReport};
pub use profile::{k_subconvexity_profile, ProfileOptions, ProfileReport};

/// Σ_{n_lo ≤ n ≤ n_hi} a_n n^{−s} with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletPolynomial<T> {
    n_lo: u64,
    coeffs: Vec<T>,
}

/// |F(σ + it)| samples on an increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VerticalLineProfile<T> {
    pub sigma: T,
    pub t_grid: Vec<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Scalar> DirichletPolynomial<T> {
    /// `coeffs[i]` is a_{n_lo + i}.
    pub fn new(n_lo: u64, coeffs: Vec<T>) -> Result<Self> {
        if n_lo == 0 {
            return Err(Error::InvalidParameter(
                "support must start at n >= 1".into(),
            ));
        }
        if coeffs.is_empty() {
            return Err(Error::EmptySupport(format!(
                "no coefficients from n = {n_lo}"
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self { n_lo, coeffs })
    }

    /// Single term a·N^{−s}.
    pub fn monomial(n: u64, a: T) -> Result<Self> {
        Self::new(n, vec![a])
    }

    pub fn n_lo(&self) -> u64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> u64 {
        self.n_lo + self.coeffs.len() as u64 - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// a_n, zero outside the support.
    pub fn coeff(&self, n: u64) -> T {
        if n < self.n_lo || n > self.n_hi() {
            T::zero()
        } else {
            self.coeffs[(n - self.n_lo) as usize]
        }
    }

    /// Nonzero terms as (n, a_n).
    pub fn terms(&self) -> impl Iterator<Item = (u64, T)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != T::zero())
            .map(move |(i, &a)| (self.n_lo + i as u64, a))
    }

    /// Σ |a_n|² / n.
    pub fn weighted_square_norm(&self) -> T {
        self.terms()
            .map(|(n, a)| a * a / T::from_index(n))
            .fold(T::zero(), |x, y| x + y)
    }

    /// Direct summation of Σ a_n n^{−s}.
    pub fn evaluate(&self, s: Complex<T>) -> Complex<T> {
        self.terms()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (n, a)| {
                let ln = T::from_index(n).ln();
                let magnitude = a * (-s.re * ln).exp();
                let phase = -s.im * ln;
                acc + Complex::new(magnitude * phase.cos(), magnitude * phase.sin())
            })
    }

    /// Values at σ + i(t0 + j·step), j = 0..count.
    pub fn evaluate_line(&self, sigma: T, t0: T, step: T, count: usize) -> Vec<Complex<T>> {
        let waves: Vec<(T, T)> = self
            .terms()
            .map(|(n, a)| {
                let ln = T::from_index(n).ln();
                (a * (-sigma * ln).exp(), -ln)
            })
            .collect();
        exp_sum_line(&waves, t0, step, count)
    }

    pub fn profile(&self, sigma: T, t0: T, step: T, count: usize) -> VerticalLineProfile<T> {
        let t_grid = (0..count)
            .map(|j| t0 + step * T::from_index(j as u64))
            .collect();
        VerticalLineProfile {
            sigma,
            t_grid,
            values: self.evaluate_line(sigma, t0, step, count),
        }
    }

    /// Largest |log n| over the support: the fastest oscillation on a vertical line.
    pub fn max_frequency(&self) -> T {
        T::from_index(self.n_hi()).ln()
    }
}

/// M(s) = Σ_{M < m ≤ 2M} A(m) m^{−s}.
pub fn build_m<T: Scalar>(table: &CoefficientTable<T>, m: u64) -> Result<DirichletPolynomial<T>> {
    if m == 0 {
        return Err(Error::EmptySupport(
            "M = 0 gives an empty dyadic block".into(),
        ));
    }
    table.ensure_covers(2 * m)?;
    DirichletPolynomial::new(m + 1, table.as_slice()[m as usize..2 * m as usize].to_vec())
}

/// K(s) = Σ_{X/3M ≤ k ≤ 3X/M} A(k) k^{−s}.
pub fn build_k<T: Scalar>(
    table: &CoefficientTable<T>,
    x: u64,
    m: u64,
) -> Result<DirichletPolynomial<T>> {
    let (lo, hi) = k_range(x, m)?;
    table.ensure_covers(hi)?;
    DirichletPolynomial::new(lo, table.as_slice()[lo as usize - 1..hi as usize].to_vec())
}

/// Integer range ⌈X/3M⌉ ..= ⌊3X/M⌋, clamped below at 1.
pub fn k_range(x: u64, m: u64) -> Result<(u64, u64)> {
    if m == 0 || x == 0 {
        return Err(Error::EmptySupport(format!("X = {x}, M = {m}")));
    }
    let lo = x.div_ceil(3 * m).max(1);
    let hi = 3 * x / m;
    if hi < lo {
        return Err(Error::EmptySupport(format!(
            "k range [{lo}, {hi}] for X = {x}, M = {m}"
        )));
    }
    Ok((lo, hi))
}

const ROTATION_CHUNK: usize = 64;

/// Σ_k w_k e^{i t f_k} at t = t0 + j·step for j = 0..count.
///
/// Phases are advanced by complex rotation inside chunks of 64 nodes and
/// re-seeded exactly at each chunk start.
pub(crate) fn exp_sum_line<T: Scalar>(
    waves: &[(T, T)],
    t0: T,
    step: T,
    count: usize,
) -> Vec<Complex<T>> {
    let rotations: Vec<Complex<T>> = waves
        .iter()
        .map(|&(_, f)| Complex::new((f * step).cos(), (f * step).sin()))
        .collect();
    let mut out = vec![Complex::new(T::zero(), T::zero()); count];
    out.par_chunks_mut(ROTATION_CHUNK)
        .enumerate()
        .for_each(|(c, chunk)| {
            let start = t0 + step * T::from_index((c * ROTATION_CHUNK) as u64);
            for (&(w, f), &rot) in waves.iter().zip(&rotations) {
                let phase = f * start;
                let mut z = Complex::new(w * phase.cos(), w * phase.sin());
                for slot in chunk.iter_mut() {
                    *slot = *slot + z;
                    z = z * rot;
                }
            }
        });
    out
}

/// Composite Simpson over equally spaced samples (odd count ≥ 3).
pub(crate) fn simpson<T: Scalar>(samples: &[T], h: T) -> T {
    let n = samples.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let mut odd = T::zero();
    let mut even = T::zero();
    for (i, &v) in samples.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd = odd + v;
        } else {
            even = even + v;
        }
    }
    h / T::lit(3.0) * (samples[0] + samples[n - 1] + T::lit(4.0) * odd + T::lit(2.0) * even)
}

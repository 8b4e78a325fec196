//! Periodic envelope profiles on a uniform grid.
//!
//! A [`Profile`] is the trigonometric polynomial
//!
//! ```text
//! Phi(u) = sum_{l=-M/2}^{M/2-1} Phi_l exp(i lambda_l u),    lambda_l = 2 pi l / P
//! ```
//!
//! stored both as samples at `u_m = m P / M` and as coefficients `Phi_l`.
//! Coefficients are kept in FFT order: slot `k` holds mode `l = k` for
//! `k < M/2` and `l = k - M` otherwise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 8;

fn check_len(m: usize) -> Result<()> {
    if m < MIN_SAMPLES || !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    Ok(())
}

/// Discrete Fourier transform normalised so that constant samples `A` give `Phi_0 = A`.
pub fn to_coefficients(samples: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(samples.len())?;
    let m = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    Ok(buf)
}

/// Inverse of [`to_coefficients`].
pub fn to_samples(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(coeffs.len())?;
    let mut buf = coeffs.to_vec();
    FftPlanner::new().plan_fft_inverse(coeffs.len()).process(&mut buf);
    Ok(buf)
}

/// Signed mode number of FFT slot `k` on an `m`-point grid.
pub fn mode_of_slot(k: usize, m: usize) -> i64 {
    if k < m / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

/// FFT slot of mode `l`, if it is represented on an `m`-point grid.
pub fn slot_of_mode(l: i64, m: usize) -> Option<usize> {
    let half = (m / 2) as i64;
    if l < -half || l >= half {
        None
    } else if l >= 0 {
        Some(l as usize)
    } else {
        Some((l + m as i64) as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    period: f64,
    samples: Vec<Complex64>,
    coeffs: Vec<Complex64>,
}

impl Profile {
    pub fn from_samples(period: f64, samples: Vec<Complex64>) -> Result<Self> {
        check_period(period)?;
        let coeffs = to_coefficients(&samples)?;
        Ok(Self {
            period,
            samples,
            coeffs,
        })
    }

    pub fn from_coeffs(period: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        check_period(period)?;
        let samples = to_samples(&coeffs)?;
        Ok(Self {
            period,
            samples,
            coeffs,
        })
    }

    /// Samples `f` on the grid.
    pub fn from_fn(period: f64, m: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        check_len(m)?;
        let samples = (0..m).map(|i| f(i as f64 * period / m as f64)).collect();
        Self::from_samples(period, samples)
    }

    pub fn zeros(period: f64, m: usize) -> Result<Self> {
        Self::constant(period, m, Complex64::new(0.0, 0.0))
    }

    pub fn constant(period: f64, m: usize, value: Complex64) -> Result<Self> {
        check_len(m)?;
        check_period(period)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
        coeffs[0] = value;
        Ok(Self {
            period,
            samples: vec![value; m],
            coeffs,
        })
    }

    /// Builds a profile from `(l, Phi_l)` pairs; unlisted modes are zero.
    pub fn from_modes(period: f64, m: usize, modes: &[(i64, Complex64)]) -> Result<Self> {
        check_len(m)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
        for &(l, c) in modes {
            let slot = slot_of_mode(l, m).ok_or_else(|| {
                Error::InvalidParameter(format!("mode {l} not representable on {m} points"))
            })?;
            coeffs[slot] += c;
        }
        Self::from_coeffs(period, coeffs)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Grid size `M`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, l: i64) -> Complex64 {
        slot_of_mode(l, self.len())
            .map(|k| self.coeffs[k])
            .unwrap_or_default()
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.period / self.len() as f64;
        (0..self.len()).map(move |i| i as f64 * h)
    }

    /// `lambda_l = 2 pi l / P`.
    pub fn wavenumber(&self, l: i64) -> f64 {
        2.0 * PI * l as f64 / self.period
    }

    /// `(l, lambda_l)` for every FFT slot, in slot order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let m = self.len();
        (0..m).map(move |k| {
            let l = mode_of_slot(k, m);
            (l, self.wavenumber(l))
        })
    }

    /// Multiplies every coefficient by `symbol(l, lambda_l)`.
    pub fn map_modes(&self, symbol: impl Fn(i64, f64) -> Complex64) -> Self {
        let coeffs = self
            .modes()
            .zip(&self.coeffs)
            .map(|((l, lam), c)| symbol(l, lam) * c)
            .collect();
        Self::from_coeffs(self.period, coeffs).expect("grid size already validated")
    }

    /// Applies `f` pointwise to the samples.
    pub fn map_samples(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let samples = self.samples.iter().map(|&z| f(z)).collect();
        Self::from_samples(self.period, samples).expect("grid size already validated")
    }

    /// Spectral derivative `d/du`.
    pub fn derivative(&self) -> Self {
        self.map_modes(|_, lam| Complex64::new(0.0, lam))
    }

    /// Evaluates the trigonometric interpolant at an arbitrary `u`.
    pub fn eval(&self, u: f64) -> Complex64 {
        self.modes()
            .zip(&self.coeffs)
            .map(|((_, lam), c)| c * Complex64::from_polar(1.0, lam * u))
            .sum()
    }

    /// Sup over grid points; NaN if any sample is NaN.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, |m, x| {
            if m.is_nan() || x.is_nan() {
                f64::NAN
            } else {
                m.max(x)
            }
        })
    }

    /// Grid mean of `conj(other) * self`.
    pub fn inner(&self, other: &Profile) -> Complex64 {
        let sum: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b.conj())
            .sum();
        sum / self.len() as f64
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            period: self.period,
            samples: self.samples.iter().map(|z| z * factor).collect(),
            coeffs: self.coeffs.iter().map(|z| z * factor).collect(),
        }
    }

    /// `alpha * self + beta * other`; both profiles must share grid and period.
    pub fn combine(&self, alpha: Complex64, other: &Profile, beta: Complex64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        let mix = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(y).map(|(a, b)| alpha * a + beta * b).collect()
        };
        Self {
            period: self.period,
            samples: mix(&self.samples, &other.samples),
            coeffs: mix(&self.coeffs, &other.coeffs),
        }
    }

    /// Same trigonometric polynomial on a grid `factor` times finer.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let m = self.len();
        let big = m * factor;
        check_len(big)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); big];
        for (k, c) in self.coeffs.iter().enumerate() {
            let l = mode_of_slot(k, m);
            coeffs[slot_of_mode(l, big).expect("finer grid holds all modes")] = *c;
        }
        Self::from_coeffs(self.period, coeffs)
    }

    /// Keeps the modes representable on an `m`-point grid and drops the rest.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        check_len(m)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
        for (k, c) in self.coeffs.iter().enumerate() {
            if let Some(slot) = slot_of_mode(mode_of_slot(k, self.len()), m) {
                coeffs[slot] = *c;
            }
        }
        Self::from_coeffs(self.period, coeffs)
    }
}

fn check_period(period: f64) -> Result<()> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "profile period must be positive, got {period}"
        )));
    }
    Ok(())
}

/// Grid realisations of the `C^0` and `C^1` norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileNorms {
    /// `max_m |Phi(u_m)|`
    pub c0: f64,
    /// `c0 + max_m |Phi'(u_m)|`
    pub c1: f64,
}

impl ProfileNorms {
    pub fn derivative_sup(&self) -> f64 {
        self.c1 - self.c0
    }
}

pub fn profile_norms(p: &Profile) -> ProfileNorms {
    let c0 = p.sup_norm();
    ProfileNorms {
        c0,
        c1: c0 + p.derivative().sup_norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TWO_PI: f64 = 2.0 * PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_grid_sizes() {
        assert!(matches!(
            to_coefficients(&[c(1.0, 0.0); 12]),
            Err(Error::NotPowerOfTwo(12))
        ));
        assert!(matches!(
            to_samples(&[c(1.0, 0.0); 4]),
            Err(Error::NotPowerOfTwo(4))
        ));
        assert!(Profile::zeros(TWO_PI, 100).is_err());
        assert!(Profile::zeros(-1.0, 16).is_err());
    }

    #[test]
    fn constant_samples() {
        let p = Profile::from_samples(TWO_PI, vec![c(2.0, 0.0); 16]).unwrap();
        assert!((p.coeff(0) - c(2.0, 0.0)).norm() < 1e-15);
        assert!(p.coeffs()[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn pure_mode_samples() {
        let period = 7.5;
        let p = Profile::from_fn(period, 32, |u| Complex64::from_polar(1.0, TWO_PI * u / period)).unwrap();
        for (k, z) in p.coeffs().iter().enumerate() {
            let want = if k == 1 { 1.0 } else { 0.0 };
            assert!((z - c(want, 0.0)).norm() < 1e-14);
        }
        let q = Profile::from_modes(TWO_PI, 16, &[(1, c(1.0, 0.0))]).unwrap();
        for (u, z) in q.grid().zip(q.samples()) {
            assert!((z - Complex64::from_polar(1.0, u)).norm() < 1e-14);
        }
    }

    #[test]
    fn slots_and_modes_agree() {
        for m in [8usize, 16, 64] {
            for k in 0..m {
                assert_eq!(slot_of_mode(mode_of_slot(k, m), m), Some(k));
            }
            assert_eq!(slot_of_mode(m as i64 / 2, m), None);
        }
    }

    #[test]
    fn norms_of_simple_profiles() {
        let a = Profile::constant(TWO_PI, 32, c(0.0, -3.0)).unwrap();
        let n = profile_norms(&a);
        assert!((n.c0 - 3.0).abs() < 1e-15 && (n.c1 - 3.0).abs() < 1e-15);
        let e = Profile::from_modes(TWO_PI, 32, &[(1, c(1.0, 0.0))]).unwrap();
        let n = profile_norms(&e);
        assert!((n.c0 - 1.0).abs() < 1e-14 && (n.c1 - 2.0).abs() < 1e-13);
    }

    #[test]
    fn refine_and_truncate_preserve_polynomial() {
        let p =
            Profile::from_modes(3.0, 16, &[(0, c(1.0, 0.5)), (-3, c(0.2, 0.0)), (5, c(0.0, 0.1))]).unwrap();
        let fine = p.refined(2).unwrap();
        for u in [0.1, 1.3, 2.9] {
            assert!((fine.eval(u) - p.eval(u)).norm() < 1e-13);
        }
        let back = fine.truncated(16).unwrap();
        for (a, b) in back.samples().iter().zip(p.samples()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    fn direct_dft(samples: &[Complex64]) -> Vec<Complex64> {
        let m = samples.len();
        (0..m)
            .map(|k| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(j, z)| z * Complex64::from_polar(1.0, -TWO_PI * (k * j) as f64 / m as f64))
                    .sum::<Complex64>()
                    / m as f64
            })
            .collect()
    }

    fn complex_vec(m: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), m)
            .prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(samples in complex_vec(64)) {
            let coeffs = to_coefficients(&samples).unwrap();
            let oracle = direct_dft(&samples);
            for (a, b) in coeffs.iter().zip(&oracle) {
                prop_assert!((a - b).norm() <= 1e-13);
            }
            let back = to_samples(&coeffs).unwrap();
            let err = back.iter().zip(&samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-12);
            let lhs: f64 = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0;
            let rhs: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1e-300));
        }

        #[test]
        fn interpolant_hits_samples(coeffs in complex_vec(16)) {
            let p = Profile::from_coeffs(4.0, coeffs).unwrap();
            for (u, z) in p.grid().zip(p.samples()) {
                prop_assert!((p.eval(u) - z).norm() <= 1e-12);
            }
            let n = profile_norms(&p);
            prop_assert!(n.c1 >= n.c0);
        }
    }
}

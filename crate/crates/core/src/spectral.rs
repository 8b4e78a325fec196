//! The linear part of the envelope equation
//!
//! ```text
//! L Phi = -i omega Phi' + omega q Phi - sum_j kappa_j D_j Phi,
//! D_j Phi(u) = Phi(u + j) e^{i q j} - 2 Phi(u) + Phi(u - j) e^{-i q j},
//! ```
//!
//! which is diagonal on Fourier modes with multipliers
//! `nu_l = omega (q + lambda_l) + 4 sum_j kappa_j sin^2((q + lambda_l) j / 2)`,
//! and the phonon band function `g(x) = (2/x) sum_j kappa_j sin^2(j x)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;
use crate::profile::Profile;
use crate::theorem::q_tilde;

/// Floor on `|nu_l|` below which the linear operator is treated as singular.
pub const RESONANCE_TOL: f64 = 1e-10;

/// Modes with `|q + lambda_l|` below this are exact zero modes of the
/// operator on commensurate grids (see [`LinearOperator::apply_projected_inverse`]).
pub const KERNEL_TOL: f64 = 1e-12;

/// Grid step of the coarse search in [`band_range`].
pub const BAND_GRID_STEP: f64 = 1e-3;
const BAND_REFINE_TOL: f64 = 1e-10;
const BAND_MAX_STEPS: usize = 20_000_000;

/// Travelling-wave coordinates: Bloch phase `q` and frequency `omega`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WaveParameters {
    pub q: f64,
    pub omega: f64,
    /// `(r, s)` when `q` came from the rational wavenumber data `q = r/s`.
    pub rational: Option<(u64, u64)>,
}

impl WaveParameters {
    pub fn new(q: f64, omega: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("q = {q} outside (0, 1)")));
        }
        if !omega.is_finite() || omega == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega = {omega} must be finite and nonzero"
            )));
        }
        Ok(Self {
            q,
            omega,
            rational: None,
        })
    }

    /// `q = r/s` with coprime `0 < r < s`.
    pub fn from_rational(r: u64, s: u64, omega: f64) -> Result<Self> {
        check_rational(r, s)?;
        let mut params = Self::new(r as f64 / s as f64, omega)?;
        params.rational = Some((r, s));
        Ok(params)
    }

    pub fn with_omega(self, omega: f64) -> Result<Self> {
        let mut out = Self::new(self.q, omega)?;
        out.rational = self.rational;
        Ok(out)
    }
}

pub(crate) fn check_rational(r: u64, s: u64) -> Result<()> {
    if r == 0 || r >= s {
        return Err(Error::InvalidParameter(format!(
            "need 0 < r < s, got r={r}, s={s}"
        )));
    }
    if gcd(r, s) != 1 {
        return Err(Error::InvalidParameter(format!(
            "r={r} and s={s} are not coprime"
        )));
    }
    Ok(())
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `-4 sum_j kappa_j sin^2(theta j / 2)`: symbol of `sum_j kappa_j D_j` at total phase `theta`.
fn coupling_symbol(theta: f64, config: &LatticeConfig) -> f64 {
    -4.0 * config
        .couplings()
        .map(|(j, k)| k * (0.5 * theta * j as f64).sin().powi(2))
        .sum::<f64>()
}

/// Shifted second difference `D_j`, applied mode by mode.
pub fn shifted_difference(p: &Profile, params: &WaveParameters, j: usize) -> Profile {
    let j = j as f64;
    p.map_modes(|_, lam| {
        let s = (0.5 * (params.q + lam) * j).sin();
        Complex64::new(-4.0 * s * s, 0.0)
    })
}

/// Multiplier `nu_l` of mode `l` on a profile of period `period`.
pub fn multiplier(l: i64, params: &WaveParameters, config: &LatticeConfig, period: f64) -> f64 {
    let theta = params.q + 2.0 * PI * l as f64 / period;
    params.omega * theta - coupling_symbol(theta, config)
}

/// `0, 1, -1, 2, -2, ..., l_max, -l_max`; ties in scans resolve to the smaller `|l|`.
pub fn modes_by_magnitude(l_max: u64) -> impl Iterator<Item = i64> {
    std::iter::once(0).chain((1..=l_max as i64).flat_map(|l| [l, -l]))
}

/// The linear operator together with its parameters.
#[derive(Clone, Copy, Debug)]
pub struct LinearOperator<'a> {
    pub params: &'a WaveParameters,
    pub config: &'a LatticeConfig,
}

impl<'a> LinearOperator<'a> {
    pub fn new(params: &'a WaveParameters, config: &'a LatticeConfig) -> Self {
        Self { params, config }
    }

    fn nu(&self, lam: f64) -> f64 {
        let theta = self.params.q + lam;
        self.params.omega * theta - coupling_symbol(theta, self.config)
    }

    pub fn apply(&self, p: &Profile) -> Profile {
        p.map_modes(|_, lam| Complex64::new(self.nu(lam), 0.0))
    }

    /// Divides every mode by `nu_l`; fails on the first `|nu_l| < RESONANCE_TOL`.
    pub fn apply_inverse(&self, p: &Profile) -> Result<Profile> {
        self.invert(p, false)
    }

    /// Like [`apply_inverse`](Self::apply_inverse) but zero modes, where
    /// `q + lambda_l` vanishes identically, are projected out instead of
    /// reported. These only occur when the profile period makes `q` a
    /// multiple of `2 pi / P`.
    pub fn apply_projected_inverse(&self, p: &Profile) -> Result<Profile> {
        self.invert(p, true)
    }

    fn invert(&self, p: &Profile, project_kernel: bool) -> Result<Profile> {
        let mut coeffs = Vec::with_capacity(p.len());
        for ((l, lam), c) in p.modes().zip(p.coeffs()) {
            if project_kernel && (self.params.q + lam).abs() < KERNEL_TOL {
                coeffs.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let nu = self.nu(lam);
            if nu.abs() < RESONANCE_TOL {
                return Err(Error::Resonance { l, nu });
            }
            coeffs.push(c / nu);
        }
        Profile::from_coeffs(p.period(), coeffs)
    }

    /// Modes that [`apply_projected_inverse`](Self::apply_projected_inverse) removes.
    pub fn kernel_modes(&self, p: &Profile) -> Vec<i64> {
        p.modes()
            .filter(|(_, lam)| (self.params.q + lam).abs() < KERNEL_TOL)
            .map(|(l, _)| l)
            .collect()
    }
}

/// Band function `g(x) = (2/x) sum_j kappa_j sin^2(j x)`.
pub fn g_eval(x: f64, config: &LatticeConfig) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "g is defined for finite x != 0, got {x}"
        )));
    }
    Ok(g_unchecked(x, config))
}

fn g_unchecked(x: f64, config: &LatticeConfig) -> f64 {
    2.0 / x
        * config
            .couplings()
            .map(|(j, k)| k * (j as f64 * x).sin().powi(2))
            .sum::<f64>()
}

/// Phonon band `[-radius, radius]`, the range of `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandInfo {
    pub radius: f64,
    /// Positive maximiser of `|g|`; absent when every coupling vanishes.
    pub x_star: Option<f64>,
}

impl BandInfo {
    pub fn contains(&self, value: f64) -> bool {
        value.abs() <= self.radius
    }
}

/// `sup_{x != 0} |g(x)|`.
///
/// `g` is odd, so only `x > 0` is searched: a uniform grid of step
/// [`BAND_GRID_STEP`] runs until the tail bound `|g(x)| <= 2 sum|kappa_j| / x`
/// drops below the running maximum, then the best grid point is polished by
/// golden-section search.
pub fn band_range(config: &LatticeConfig) -> BandInfo {
    let abs_sum = config.kappa_abs_sum();
    if abs_sum == 0.0 {
        return BandInfo {
            radius: 0.0,
            x_star: None,
        };
    }
    let h = BAND_GRID_STEP;
    let (mut best_x, mut best) = (h, 0.0f64);
    for i in 1..=BAND_MAX_STEPS {
        let x = i as f64 * h;
        let v = g_unchecked(x, config).abs();
        if v > best {
            best = v;
            best_x = x;
        }
        if best > 0.0 && 2.0 * abs_sum < best * x {
            break;
        }
    }

    let lo = (best_x - h).max(0.5 * h);
    let hi = best_x + h;
    let x_ref = golden_max(|x| g_unchecked(x, config).abs(), lo, hi, BAND_REFINE_TOL);
    let refined = g_unchecked(x_ref, config).abs();
    let (radius, x_star) = if refined >= best {
        (refined, x_ref)
    } else {
        (best, best_x)
    };
    BandInfo {
        radius,
        x_star: Some(x_star),
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Truncated operator-norm estimate of the inverse next to its analytic bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InverseNormEstimate {
    /// `max_{|l| <= l_max} (1 + |l|) / |nu_l|`
    pub computed: f64,
    /// Mode attaining `computed`.
    pub argmax: i64,
    /// `(q_tilde + 1/(1-q)) / (|omega| - radius)`
    pub bound: f64,
}

pub fn inverse_norm_estimate(
    params: &WaveParameters,
    config: &LatticeConfig,
    l_max: u64,
    period: f64,
) -> Result<InverseNormEstimate> {
    let radius = band_range(config).radius;
    let gap = params.omega.abs() - radius;
    if gap <= 0.0 {
        return Err(Error::BandViolation {
            omega: params.omega,
            radius,
        });
    }
    let bound = (q_tilde(params.q)? + 1.0 / (1.0 - params.q)) / gap;
    let (mut computed, mut argmax) = (0.0, 0);
    for l in modes_by_magnitude(l_max) {
        let ratio = (1.0 + l.unsigned_abs() as f64) / multiplier(l, params, config, period).abs();
        if ratio > computed {
            computed = ratio;
            argmax = l;
        }
    }
    Ok(InverseNormEstimate {
        computed,
        argmax,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PI: f64 = 2.0 * PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn nn(kappa: f64) -> LatticeConfig {
        LatticeConfig::new(12, vec![kappa]).unwrap()
    }

    #[test]
    fn wave_parameter_validation() {
        assert!(WaveParameters::new(0.0, 1.0).is_err());
        assert!(WaveParameters::new(1.0, 1.0).is_err());
        assert!(WaveParameters::new(0.5, 0.0).is_err());
        assert!(WaveParameters::from_rational(2, 4, 1.0).is_err());
        assert!(WaveParameters::from_rational(3, 2, 1.0).is_err());
        let p = WaveParameters::from_rational(2, 5, -1.0).unwrap();
        assert_eq!(p.q, 0.4);
        assert_eq!(p.rational, Some((2, 5)));
    }

    #[test]
    fn shifted_difference_on_constant() {
        let params = WaveParameters::new(0.5, 2.0).unwrap();
        let p = Profile::constant(TWO_PI, 16, c(3.0, 0.0)).unwrap();
        let d = shifted_difference(&p, &params, 1);
        let want = -4.0 * 0.25f64.sin().powi(2) * 3.0;
        assert!((want / 3.0 + 0.244_832).abs() < 1e-5);
        assert!(d.samples().iter().all(|z| (z - c(want, 0.0)).norm() < 1e-14));
        let z = shifted_difference(&Profile::zeros(TWO_PI, 16).unwrap(), &params, 2);
        assert_eq!(z.sup_norm(), 0.0);
    }

    #[test]
    fn shifted_difference_matches_direct_shifts() {
        let params = WaveParameters::new(0.3, 1.0).unwrap();
        let p = Profile::from_modes(
            TWO_PI,
            32,
            &[(0, c(1.0, 0.0)), (2, c(0.3, -0.2)), (-5, c(0.1, 0.4))],
        )
        .unwrap();
        let j = 2usize;
        let d = shifted_difference(&p, &params, j);
        let jf = j as f64;
        for u in p.grid() {
            let direct = p.eval(u + jf) * Complex64::from_polar(1.0, params.q * jf) - 2.0 * p.eval(u)
                + p.eval(u - jf) * Complex64::from_polar(1.0, -params.q * jf);
            assert!((d.eval(u) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn multiplier_examples() {
        let params = WaveParameters::new(0.5, 2.0).unwrap();
        let cfg = nn(1.0);
        let nu0 = multiplier(0, &params, &cfg, TWO_PI);
        assert!((nu0 - (1.0 + 4.0 * 0.25f64.sin().powi(2))).abs() < 1e-15);
        assert!((nu0 - 1.2448).abs() < 1e-4);
        let num1 = multiplier(-1, &params, &cfg, TWO_PI);
        assert!((num1 + 0.7552).abs() < 1e-4);
        let free = WaveParameters::new(0.37, -1.3).unwrap();
        assert!((multiplier(0, &free, &nn(0.0), TWO_PI) - 0.37 * -1.3).abs() < 1e-15);
    }

    #[test]
    fn multiplier_factorises_through_g() {
        let cfg = LatticeConfig::new(11, vec![0.8, -0.4, 0.3]).unwrap();
        let params = WaveParameters::new(0.71, 1.9).unwrap();
        for l in -20..=20 {
            let x = params.q + l as f64;
            let via_g = x * (params.omega + g_eval(x / 2.0, &cfg).unwrap());
            assert!((multiplier(l, &params, &cfg, TWO_PI) - via_g).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_on_pure_modes() {
        let params = WaveParameters::new(0.5, 2.0).unwrap();
        let cfg = nn(1.0);
        let op = LinearOperator::new(&params, &cfg);
        for l in [-3i64, 0, 4] {
            let p = Profile::from_modes(TWO_PI, 16, &[(l, c(1.0, 0.0))]).unwrap();
            let nu = multiplier(l, &params, &cfg, TWO_PI);
            let mp = op.apply(&p);
            let ip = op.apply_inverse(&p).unwrap();
            for (k, (a, b)) in mp.coeffs().iter().zip(ip.coeffs()).enumerate() {
                let hit = crate::profile::mode_of_slot(k, 16) == l;
                let (wa, wb) = if hit { (nu, 1.0 / nu) } else { (0.0, 0.0) };
                assert!((a - c(wa, 0.0)).norm() < 1e-14 && (b - c(wb, 0.0)).norm() < 1e-14);
            }
        }
        assert_eq!(op.apply(&Profile::zeros(TWO_PI, 16).unwrap()).sup_norm(), 0.0);
    }

    #[test]
    fn resonant_frequency_is_reported() {
        let omega = -4.0 * 0.25f64.sin().powi(2) / 0.5;
        assert!((omega + 0.489_664).abs() < 1e-5);
        let params = WaveParameters::new(0.5, omega).unwrap();
        let cfg = nn(1.0);
        let p = Profile::constant(TWO_PI, 16, c(1.0, 0.0)).unwrap();
        match LinearOperator::new(&params, &cfg).apply_inverse(&p) {
            Err(Error::Resonance { l, nu }) => {
                assert_eq!(l, 0);
                assert!(nu.abs() < RESONANCE_TOL);
            }
            other => panic!("expected resonance, got {other:?}"),
        }
    }

    #[test]
    fn kernel_modes_on_commensurate_grid() {
        // q = 2 pi / 12 on a period-12 profile: mode -1 carries q + lambda = 0.
        let params = WaveParameters::new(2.0 * PI / 12.0, 3.0).unwrap();
        let cfg = nn(1.0);
        let op = LinearOperator::new(&params, &cfg);
        let p = Profile::from_modes(12.0, 16, &[(0, c(1.0, 0.0)), (-1, c(0.5, 0.0))]).unwrap();
        assert_eq!(op.kernel_modes(&p), vec![-1]);
        assert!(matches!(
            op.apply_inverse(&p),
            Err(Error::Resonance { l: -1, .. })
        ));
        let inv = op.apply_projected_inverse(&p).unwrap();
        assert_eq!(inv.coeff(-1), c(0.0, 0.0));
        let nu0 = multiplier(0, &params, &cfg, 12.0);
        assert!((inv.coeff(0) - c(1.0 / nu0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn g_examples() {
        let cfg = nn(1.0);
        assert!(g_eval(PI, &cfg).unwrap().abs() < 1e-15);
        assert!((g_eval(1.0, &cfg).unwrap() - 2.0 * 1f64.sin().powi(2)).abs() < 1e-15);
        assert!((g_eval(1.0, &cfg).unwrap() - 1.4161).abs() < 1e-4);
        for x in [0.3, 1.7, 12.0] {
            assert_eq!(g_eval(-x, &cfg).unwrap(), -g_eval(x, &cfg).unwrap());
        }
        assert!(g_eval(0.0, &cfg).is_err());
    }

    #[test]
    fn band_of_nearest_neighbour_ring() {
        // Oracle: the maximiser of 2 sin^2(x)/x solves tan x = 2x.
        let (mut lo, mut hi) = (1.0f64, 1.5f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.tan() - 2.0 * mid > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let x_root = 0.5 * (lo + hi);
        let r_root = 2.0 * x_root.sin().powi(2) / x_root;
        let band = band_range(&nn(1.0));
        assert!((band.radius - r_root).abs() < 1e-12);
        assert!((band.x_star.unwrap() - x_root).abs() < 1e-6);
        assert!((band.radius - 1.4497).abs() < 1e-3);
    }

    #[test]
    fn band_scaling_and_zero_coupling() {
        let zero = band_range(&nn(0.0));
        assert_eq!(zero.radius, 0.0);
        assert_eq!(zero.x_star, None);
        let cfg = LatticeConfig::new(9, vec![0.6, -0.2, 0.35]).unwrap();
        let base = band_range(&cfg);
        let scaled = band_range(&cfg.scaled(2.5).unwrap());
        assert!((scaled.radius - 2.5 * base.radius).abs() <= 1e-12 * scaled.radius);
        assert!((scaled.x_star.unwrap() - base.x_star.unwrap()).abs() < 1e-8);
    }

    #[test]
    fn band_agrees_with_finer_grid() {
        let cfg = LatticeConfig::new(11, vec![0.3, 0.9, -0.5, 0.2]).unwrap();
        let band = band_range(&cfg);
        let mut fine = 0.0f64;
        let h = BAND_GRID_STEP / 10.0;
        let mut x = h;
        while x < 2.0 * cfg.kappa_abs_sum() / band.radius + 1.0 {
            fine = fine.max(g_eval(x, &cfg).unwrap().abs());
            x += h;
        }
        assert!(band.radius >= fine - 1e-12);
        assert!((band.radius - fine).abs() < 1e-6);
    }

    #[test]
    fn inverse_norm_worked_case() {
        let params = WaveParameters::new(0.5, 2.0).unwrap();
        let est = inverse_norm_estimate(&params, &nn(1.0), 64, TWO_PI).unwrap();
        assert_eq!(est.argmax, -3);
        assert!((est.computed - 2.862).abs() < 1e-3);
        assert!((est.bound - 7.27).abs() < 1e-2);
        assert!(est.computed <= est.bound);
    }

    #[test]
    fn inverse_norm_coupling_free_equality() {
        let params = WaveParameters::new(0.5, 1.0).unwrap();
        let est = inverse_norm_estimate(&params, &nn(0.0), 64, TWO_PI).unwrap();
        assert!((est.computed - 4.0).abs() < 1e-14);
        assert!((est.bound - 4.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_norm_decreases_with_frequency() {
        let cfg = nn(1.0);
        let slow = inverse_norm_estimate(&WaveParameters::new(0.3, 3.0).unwrap(), &cfg, 100, TWO_PI).unwrap();
        let fast =
            inverse_norm_estimate(&WaveParameters::new(0.3, 30.0).unwrap(), &cfg, 100, TWO_PI).unwrap();
        assert!(fast.computed < slow.computed);
        assert!((slow.computed / fast.computed - 10.0).abs() < 3.0);
    }

    #[test]
    fn inverse_norm_rejects_in_band_frequency() {
        let params = WaveParameters::new(0.5, 1.0).unwrap();
        assert!(matches!(
            inverse_norm_estimate(&params, &nn(1.0), 10, TWO_PI),
            Err(Error::BandViolation { .. })
        ));
    }

    #[test]
    fn inverse_norm_stabilises_in_l_max() {
        let params = WaveParameters::new(0.2, 2.5).unwrap();
        let cfg = LatticeConfig::new(9, vec![1.0, 0.3]).unwrap();
        let a = inverse_norm_estimate(&params, &cfg, 50, TWO_PI).unwrap();
        let b = inverse_norm_estimate(&params, &cfg, 500, TWO_PI).unwrap();
        assert_eq!(a.computed, b.computed);
    }
}

//! Placing a solved envelope on a ring.
//!
//! With travelling coordinate `u = n - omega t` the lattice field is
//! `psi_n(t) = exp(i q u) Phi(u)`. It closes on `N` sites when `q N` is a
//! multiple of `2 pi` and the envelope period `P` divides `N`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::SimulationResult;
use crate::lattice::LatticeState;
use crate::profile::Profile;
use crate::spectral::{check_rational, gcd, WaveParameters};

/// Closure defect allowed for a plan to count as ring-exact.
pub const CLOSURE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingPlan {
    pub n_sites: usize,
    /// Phase winding `m` with `q = 2 pi m / N`; `None` for a free phase.
    pub winding: Option<u64>,
    /// Number of envelope periods around the ring.
    pub wraps: usize,
    pub q: f64,
    /// Envelope period `P = N / wraps`.
    pub period: f64,
    /// Wavenumber `k = pi q` in the `|k| = pi r / s` convention.
    pub wavenumber: f64,
    pub minimal_period: Option<MinimalPeriod>,
    /// `|exp(i q N) - 1|`
    pub closure_defect: f64,
    pub exact: bool,
}

/// Ring with `q = 2 pi m / N` and envelope period `N / wraps`.
pub fn plan_commensurate(winding: u64, wraps: usize, n_sites: usize) -> Result<EmbeddingPlan> {
    if n_sites < 3 {
        return Err(Error::InvalidParameter(format!(
            "ring needs at least 3 sites, got {n_sites}"
        )));
    }
    if winding == 0 {
        return Err(Error::InvalidParameter("winding must be >= 1".into()));
    }
    check_wraps(wraps, n_sites)?;
    let q = 2.0 * PI * winding as f64 / n_sites as f64;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q = 2 pi {winding} / {n_sites} = {q} outside (0, 1)"
        )));
    }
    Ok(EmbeddingPlan {
        n_sites,
        winding: Some(winding),
        wraps,
        q,
        period: (n_sites / wraps) as f64,
        wavenumber: PI * q,
        minimal_period: None,
        // q N = 2 pi m by construction
        closure_defect: 0.0,
        exact: true,
    })
}

/// Ring with an arbitrary phase; closure is measured rather than imposed.
pub fn plan_with_phase(q: f64, wraps: usize, n_sites: usize) -> Result<EmbeddingPlan> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("q = {q} outside (0, 1)")));
    }
    check_wraps(wraps, n_sites)?;
    let defect = (Complex64::from_polar(1.0, q * n_sites as f64) - 1.0).norm();
    Ok(EmbeddingPlan {
        n_sites,
        winding: None,
        wraps,
        q,
        period: (n_sites / wraps) as f64,
        wavenumber: PI * q,
        minimal_period: None,
        closure_defect: defect,
        exact: defect <= CLOSURE_TOL,
    })
}

fn check_wraps(wraps: usize, n_sites: usize) -> Result<()> {
    if wraps == 0 || !n_sites.is_multiple_of(wraps) {
        return Err(Error::InvalidParameter(format!(
            "wrap count {wraps} does not divide N = {n_sites}"
        )));
    }
    Ok(())
}

/// Spatial period data for wavenumber `k = pi r / s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalPeriod {
    /// `s / r` as `(numerator, denominator)`.
    pub ratio: (u64, u64),
    /// Smallest `N` with `k N` a multiple of `2 pi`: `2 s / gcd(2, r)`.
    pub n_min: u64,
}

pub fn minimal_period_report(r: u64, s: u64) -> Result<MinimalPeriod> {
    check_rational(r, s)?;
    Ok(MinimalPeriod {
        ratio: (s, r),
        n_min: 2 * s / gcd(2, r),
    })
}

fn check_plan(profile: &Profile, params: &WaveParameters, plan: &EmbeddingPlan) -> Result<()> {
    if (profile.period() - plan.period).abs() > 1e-12 * plan.period {
        return Err(Error::PeriodMismatch {
            profile: profile.period(),
            plan: plan.period,
        });
    }
    if !plan.exact {
        return Err(Error::NonExactPlan(plan.closure_defect));
    }
    if (params.q - plan.q).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "wave q = {} differs from plan q = {}",
            params.q, plan.q
        )));
    }
    Ok(())
}

/// `exp(i q u) Phi(u)` at `u = n - omega t`, for any integer site `n`.
pub fn ansatz(profile: &Profile, params: &WaveParameters, site: i64, t: f64) -> Complex64 {
    let u = site as f64 - params.omega * t;
    Complex64::from_polar(1.0, params.q * u) * profile.eval(u)
}

/// Analytic `d psi_n / dt` of the ansatz: `-omega exp(i q u) (i q Phi + Phi')`.
pub fn ansatz_time_derivative(
    profile: &Profile,
    derivative: &Profile,
    params: &WaveParameters,
    site: i64,
    t: f64,
) -> Complex64 {
    let u = site as f64 - params.omega * t;
    let inner = Complex64::new(0.0, params.q) * profile.eval(u) + derivative.eval(u);
    -params.omega * Complex64::from_polar(1.0, params.q * u) * inner
}

pub fn embed(
    profile: &Profile,
    params: &WaveParameters,
    plan: &EmbeddingPlan,
    t: f64,
) -> Result<LatticeState> {
    check_plan(profile, params, plan)?;
    let psi = (0..plan.n_sites as i64)
        .map(|n| ansatz(profile, params, n, t))
        .collect();
    Ok(LatticeState::new(psi, t))
}

/// `max_n |psi_{n+N} - psi_n|` of the ansatz at time `t`.
pub fn ring_periodicity_defect(
    profile: &Profile,
    params: &WaveParameters,
    plan: &EmbeddingPlan,
    t: f64,
) -> Result<f64> {
    check_plan(profile, params, plan)?;
    let n = plan.n_sites as i64;
    Ok((0..n)
        .map(|site| (ansatz(profile, params, site + n, t) - ansatz(profile, params, site, t)).norm())
        .fold(0.0, f64::max))
}

/// Largest deviation of a trajectory from the travelling-wave ansatz.
pub fn translation_error(
    traj: &SimulationResult,
    profile: &Profile,
    params: &WaveParameters,
    plan: &EmbeddingPlan,
) -> Result<f64> {
    check_plan(profile, params, plan)?;
    let mut worst = 0.0f64;
    for state in &traj.states {
        worst = worst.max(state_translation_error(state, profile, params)?);
    }
    Ok(worst)
}

/// Deviation of one stored state from the ansatz at its own time.
pub fn state_translation_error(
    state: &LatticeState,
    profile: &Profile,
    params: &WaveParameters,
) -> Result<f64> {
    Ok(state
        .psi
        .iter()
        .enumerate()
        .map(|(n, z)| (z - ansatz(profile, params, n as i64, state.t)).norm())
        .fold(0.0, f64::max))
}

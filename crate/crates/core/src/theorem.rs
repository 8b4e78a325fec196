//! Constants of the existence theorem and checks of its hypothesis and a priori bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;
use crate::nonlinearity::Nonlinearity;
use crate::profile::{profile_norms, Profile};
use crate::spectral::{band_range, modes_by_magnitude, multiplier, WaveParameters};

/// Default scan half-width for [`resonance_scan`].
pub const DEFAULT_SCAN_MODES: u64 = 10_000;

/// `1/q` on `(0, 1/2)`, `1/(1-q)` on `[1/2, 1)`.
pub fn q_tilde(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("q = {q} outside (0, 1)")));
    }
    Ok(if q < 0.5 { 1.0 / q } else { 1.0 / (1.0 - q) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub kappa_bar: f64,
    pub q_tilde: f64,
    pub p: f64,
    pub band_radius: f64,
    pub power_budget: f64,
    /// `a (1 + P^b)`
    pub growth: f64,
    /// Minimal `|omega|`; infinite when the denominator of the threshold is not positive.
    pub threshold: f64,
    pub satisfied: bool,
    pub margin: f64,
}

/// Evaluates
/// `threshold = R (1 + p A / (R (1 + q) + 4 kappa_bar + A))`, `A = a (1 + P^b)`,
/// and compares it with `|omega|`.
pub fn hypothesis_check(
    params: &WaveParameters,
    config: &LatticeConfig,
    nl: &Nonlinearity,
    power_budget: f64,
) -> Result<HypothesisReport> {
    if !(power_budget.is_finite() && power_budget >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "power budget must be finite and >= 0, got {power_budget}"
        )));
    }
    let qt = q_tilde(params.q)?;
    let p = qt + 1.0 / (1.0 - params.q);
    let radius = band_range(config).radius;
    let kappa_bar = config.kappa_bar();
    let growth = nl.growth_bound(power_budget);
    let denom = radius * (1.0 + params.q) + 4.0 * kappa_bar + growth;
    // Negative kappa_bar can push the denominator through zero, where the
    // formula no longer keeps |omega| outside the band.
    let threshold = if denom > 0.0 {
        radius * (1.0 + p * growth / denom)
    } else {
        f64::INFINITY
    };
    let margin = params.omega.abs() - threshold;
    Ok(HypothesisReport {
        kappa_bar,
        q_tilde: qt,
        p,
        band_radius: radius,
        power_budget,
        growth,
        threshold,
        satisfied: margin >= 0.0,
        margin,
    })
}

/// `(q + (4 kappa_bar + A)/R) sqrt(P)`, the a priori bound on `max |Phi'|`.
pub fn derivative_bound(
    params: &WaveParameters,
    config: &LatticeConfig,
    nl: &Nonlinearity,
    power_budget: f64,
) -> Result<f64> {
    let radius = band_range(config).radius;
    if radius <= 0.0 {
        return Err(Error::InvalidParameter(
            "a priori derivative bound needs a nonzero band radius".into(),
        ));
    }
    let growth = nl.growth_bound(power_budget);
    Ok((params.q + (4.0 * config.kappa_bar() + growth) / radius) * power_budget.sqrt())
}

/// `(1 + q + (4 kappa_bar + A)/R) sqrt(P)`: radius of the `C^1` ball that the
/// fixed-point map sends the `C^0` ball of radius `sqrt(P)` into.
pub fn containment_radius(
    params: &WaveParameters,
    config: &LatticeConfig,
    nl: &Nonlinearity,
    power_budget: f64,
) -> Result<f64> {
    Ok(derivative_bound(params, config, nl, power_budget)? + power_budget.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AprioriCheck {
    pub c0_ok: bool,
    pub c1_ok: bool,
    /// `sqrt(P) - max |Phi|`
    pub c0_slack: f64,
    /// derivative bound minus `max |Phi'|`
    pub c1_slack: f64,
}

pub fn apriori_bounds_check(
    profile: &Profile,
    params: &WaveParameters,
    config: &LatticeConfig,
    nl: &Nonlinearity,
    power_budget: f64,
) -> Result<AprioriCheck> {
    if !(power_budget.is_finite() && power_budget >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "power budget must be finite and >= 0, got {power_budget}"
        )));
    }
    let d_bound = derivative_bound(params, config, nl, power_budget)?;
    let norms = profile_norms(profile);
    let c0_slack = power_budget.sqrt() - norms.c0;
    let c1_slack = d_bound - norms.derivative_sup();
    Ok(AprioriCheck {
        c0_ok: c0_slack >= 0.0,
        c1_ok: c1_slack >= 0.0,
        c0_slack,
        c1_slack,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResonanceScan {
    pub min_abs_nu: f64,
    pub argmin: i64,
    /// Every `|l| >= tail_index` has `|nu_l| >= |omega| |q + lambda_l| - 4 sum|kappa_j| > min_abs_nu`.
    pub tail_index: u64,
    /// The scan covered everything below `tail_index`.
    pub certified: bool,
}

/// Smallest `|nu_l|` over `|l| <= l_max`, with a certificate that no mode
/// outside the scanned window does better.
pub fn resonance_scan(
    params: &WaveParameters,
    config: &LatticeConfig,
    l_max: u64,
    period: f64,
) -> ResonanceScan {
    let (mut min_abs_nu, mut argmin) = (f64::INFINITY, 0i64);
    for l in modes_by_magnitude(l_max) {
        let v = multiplier(l, params, config, period).abs();
        if v < min_abs_nu {
            min_abs_nu = v;
            argmin = l;
        }
    }
    // |q + lambda_l| >= 2 pi |l| / P - q, so the tail estimate exceeds the
    // minimum once 2 pi |l| / P > q + (min + 4 sum|kappa|) / |omega|.
    let need = params.q + (min_abs_nu + 4.0 * config.kappa_abs_sum()) / params.omega.abs();
    let threshold = need * period / (2.0 * std::f64::consts::PI);
    let tail_index = (threshold.floor() + 1.0).max(0.0);
    let tail_index = if tail_index.is_finite() && tail_index < u64::MAX as f64 {
        tail_index as u64
    } else {
        u64::MAX
    };
    ResonanceScan {
        min_abs_nu,
        argmin,
        tail_index,
        certified: tail_index <= l_max.saturating_add(1),
    }
}

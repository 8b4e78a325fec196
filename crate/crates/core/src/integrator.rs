//! Fixed-step classical Runge-Kutta integration of the ring with power and
//! energy recorded along the way.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{energy, eval_rhs, power, LatticeConfig, LatticeState};
use crate::nonlinearity::Nonlinearity;

/// Amplitude above which a trajectory is declared to have blown up.
pub const BLOW_UP_AMPLITUDE: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
}

#[derive(Clone, Debug)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    pub states: Vec<LatticeState>,
    pub power_series: Vec<f64>,
    pub energy_series: Vec<f64>,
    pub dt: f64,
    pub method: Method,
}

impl SimulationResult {
    pub fn final_state(&self) -> &LatticeState {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }

    /// `|P(T) - P(0)| / max(P(0), 1e-30)`
    pub fn relative_power_drift(&self) -> f64 {
        let p0 = self.power_series[0];
        (self.power_series.last().unwrap() - p0).abs() / p0.max(1e-30)
    }

    /// `|H(T) - H(0)| / max(|H(0)|, 1)`
    pub fn relative_energy_drift(&self) -> f64 {
        let h0 = self.energy_series[0];
        (self.energy_series.last().unwrap() - h0).abs() / h0.abs().max(1.0)
    }
}

fn axpy(base: &[Complex64], k: &[Complex64], h: f64) -> Vec<Complex64> {
    base.iter().zip(k).map(|(y, d)| y + h * d).collect()
}

/// One classical fourth-order step. A negative `dt` integrates backwards.
pub fn rk4_step(
    state: &LatticeState,
    dt: f64,
    config: &LatticeConfig,
    nl: &Nonlinearity,
) -> Result<LatticeState> {
    let t = state.t;
    let y = &state.psi;
    let k1 = eval_rhs(state, config, nl)?;
    let k2 = eval_rhs(
        &LatticeState::new(axpy(y, &k1, 0.5 * dt), t + 0.5 * dt),
        config,
        nl,
    )?;
    let k3 = eval_rhs(
        &LatticeState::new(axpy(y, &k2, 0.5 * dt), t + 0.5 * dt),
        config,
        nl,
    )?;
    let k4 = eval_rhs(&LatticeState::new(axpy(y, &k3, dt), t + dt), config, nl)?;
    let psi = (0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    Ok(LatticeState::new(psi, t + dt))
}

/// Integrates to `t_final` (relative to the initial time), storing every
/// `sample_every`-th step plus the endpoints. The last step is shortened to
/// land on `t_final` exactly.
pub fn integrate(
    initial: &LatticeState,
    t_final: f64,
    dt: f64,
    sample_every: usize,
    config: &LatticeConfig,
    nl: &Nonlinearity,
) -> Result<SimulationResult> {
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be >= 1".into()));
    }
    let t0 = initial.t;
    let mut out = SimulationResult {
        times: Vec::new(),
        states: Vec::new(),
        power_series: Vec::new(),
        energy_series: Vec::new(),
        dt,
        method: Method::Rk4,
    };
    let record = |out: &mut SimulationResult, s: &LatticeState| -> Result<()> {
        out.times.push(s.t);
        out.power_series.push(power(s));
        out.energy_series.push(energy(s, config, nl)?);
        out.states.push(s.clone());
        Ok(())
    };
    record(&mut out, initial)?;

    let full_steps = (t_final / dt).floor() as usize;
    let remainder = t_final - full_steps as f64 * dt;
    // a sliver below rounding is dropped rather than taken as an extra step
    let tail = remainder > 1e-12 * dt;
    let total = full_steps + usize::from(tail);

    let mut state = initial.clone();
    for step in 1..=total {
        let h = if step > full_steps { remainder } else { dt };
        state = rk4_step(&state, h, config, nl)?;
        if step == total {
            state.t = t0 + t_final;
        } else {
            state.t = t0 + step as f64 * dt;
        }
        if state
            .psi
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite() || z.norm() > BLOW_UP_AMPLITUDE)
        {
            return Err(Error::BlowUp { time: state.t });
        }
        if step % sample_every == 0 || step == total {
            record(&mut out, &state)?;
        }
    }
    Ok(out)
}

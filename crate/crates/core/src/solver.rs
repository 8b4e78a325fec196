//! Fixed-point iteration for the envelope equation `L Phi = F(|Phi|^2) Phi`,
//! written as `Phi = T(Phi)` with `T = L^{-1} o N`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;
use crate::nonlinearity::Nonlinearity;
use crate::profile::{profile_norms, Profile};
use crate::spectral::{multiplier, shifted_difference, LinearOperator, WaveParameters};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Relaxation `theta` in `Phi <- (1 - theta) Phi + theta S(Phi)`.
    pub damping: f64,
    /// Rescale each iterate by a power of the quotient `<L Phi, Phi> / <N Phi, Phi>`.
    pub petviashvili: bool,
    /// Exponent of that quotient; `None` picks the nonlinearity's default.
    pub gamma: Option<f64>,
    pub max_iter: usize,
    pub tol_step: f64,
    pub tol_residual: f64,
    pub trivial_floor: f64,
    /// Zero out modes with `q + lambda_l = 0` instead of reporting a resonance.
    pub project_kernel: bool,
    /// Evaluate the nonlinearity on a twice finer grid.
    pub dealias: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            petviashvili: true,
            gamma: None,
            max_iter: 10_000,
            tol_step: 1e-12,
            tol_residual: 1e-10,
            trivial_floor: 1e-8,
            project_kernel: true,
            dealias: false,
        }
    }
}

impl SolverOptions {
    pub fn picard() -> Self {
        Self {
            petviashvili: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping {} outside (0, 1]",
                self.damping
            )));
        }
        for (name, v) in [
            ("tol_step", self.tol_step),
            ("tol_residual", self.tol_residual),
            ("trivial_floor", self.trivial_floor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if let Some(g) = self.gamma {
            if !g.is_finite() {
                return Err(Error::InvalidParameter(format!("gamma must be finite, got {g}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub step: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub profile: Profile,
    pub iterations: usize,
    pub residual_sup: f64,
    pub step_last: f64,
    pub converged: bool,
    pub trivial: bool,
    pub history: Vec<IterationRecord>,
}

/// Pointwise `F(|Phi|^2) Phi`.
pub fn apply_nonlinearity(p: &Profile, nl: &Nonlinearity) -> Profile {
    p.map_samples(|z| nl.f(z.norm_sqr()) * z)
}

fn apply_nonlinearity_dealiased(p: &Profile, nl: &Nonlinearity) -> Result<Profile> {
    apply_nonlinearity(&p.refined(2)?, nl).truncated(p.len())
}

/// `T(Phi) = L^{-1} (F(|Phi|^2) Phi)`.
pub fn fixed_point_map(
    p: &Profile,
    params: &WaveParameters,
    config: &LatticeConfig,
    nl: &Nonlinearity,
) -> Result<Profile> {
    LinearOperator::new(params, config).apply_inverse(&apply_nonlinearity(p, nl))
}

/// `L Phi` assembled term by term from the spectral derivative and the
/// shifted differences.
pub fn linear_part(p: &Profile, params: &WaveParameters, config: &LatticeConfig) -> Profile {
    let omega = Complex64::new(params.omega, 0.0);
    let mut acc = p
        .derivative()
        .combine(-Complex64::i() * omega, p, omega * params.q);
    for (j, kappa) in config.couplings() {
        let d = shifted_difference(p, params, j);
        acc = acc.combine(Complex64::new(1.0, 0.0), &d, Complex64::new(-kappa, 0.0));
    }
    acc
}

/// Grid sup of `|L Phi - F(|Phi|^2) Phi|`.
pub fn residual(p: &Profile, params: &WaveParameters, config: &LatticeConfig, nl: &Nonlinearity) -> f64 {
    let lhs = linear_part(p, params, config);
    lhs.samples()
        .iter()
        .zip(p.samples())
        .map(|(l, z)| (l - nl.f(z.norm_sqr()) * z).norm())
        .fold(0.0, f64::max)
}

/// Positive root `A` of `F(A^2) = nu_0`, the amplitude of the constant
/// (plane-wave) solution branch.
pub fn amplitude_from_dispersion(
    params: &WaveParameters,
    config: &LatticeConfig,
    nl: &Nonlinearity,
) -> Option<f64> {
    // nu_0 does not depend on the profile period.
    let target = multiplier(0, params, config, 1.0);
    if target == 0.0 {
        return Some(0.0);
    }
    let defect = |x: f64| nl.f(x) - target;
    let below = defect(0.0) < 0.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while (defect(hi) < 0.0) == below {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (defect(mid) < 0.0) == below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = if defect(lo).abs() <= defect(hi).abs() {
        lo
    } else {
        hi
    };
    Some(x.sqrt())
}

/// `A (1 + eps cos(2 pi mode u / P))`.
pub fn cosine_seed(period: f64, m: usize, amplitude: f64, eps: f64, mode: u32) -> Result<Profile> {
    let k = 2.0 * std::f64::consts::PI * mode as f64 / period;
    Profile::from_fn(period, m, |u| {
        Complex64::new(amplitude * (1.0 + eps * (k * u).cos()), 0.0)
    })
}

/// Damped (optionally Petviashvili-stabilised) iteration of `T` from `seed`.
pub fn solve(
    seed: &Profile,
    params: &WaveParameters,
    config: &LatticeConfig,
    nl: &Nonlinearity,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    let op = LinearOperator::new(params, config);
    let exponent = opts.gamma.unwrap_or_else(|| nl.petviashvili_exponent());
    let theta = Complex64::new(opts.damping, 0.0);
    let keep = Complex64::new(1.0 - opts.damping, 0.0);

    let mut phi = seed.clone();
    let mut history = Vec::new();
    let mut step = f64::INFINITY;

    for iter in 1..=opts.max_iter {
        let nphi = if opts.dealias {
            apply_nonlinearity_dealiased(&phi, nl)?
        } else {
            apply_nonlinearity(&phi, nl)
        };
        let mut next = if opts.project_kernel {
            op.apply_projected_inverse(&nphi)?
        } else {
            op.apply_inverse(&nphi)?
        };
        if opts.petviashvili {
            let num = op.apply(&phi).inner(&phi).re;
            let den = nphi.inner(&phi).re;
            let quotient = num / den;
            // Off the positive quotient the rescaling is undefined; fall back to plain T.
            if quotient.is_finite() && quotient > 0.0 {
                next = next.scale(Complex64::new(quotient.powf(exponent), 0.0));
            }
        }
        let updated = phi.combine(keep, &next, theta);
        step = updated
            .samples()
            .iter()
            .zip(phi.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        // f64::max drops NaN, so the step alone cannot be trusted here
        if !step.is_finite()
            || updated
                .samples()
                .iter()
                .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::Diverged { iterations: iter });
        }
        phi = updated;
        let res = residual(&phi, params, config, nl);
        history.push(IterationRecord { step, residual: res });

        if step < opts.tol_step {
            let trivial = profile_norms(&phi).c0 < opts.trivial_floor;
            return Ok(SolveResult {
                profile: phi,
                iterations: iter,
                residual_sup: res,
                step_last: step,
                converged: res <= opts.tol_residual,
                trivial,
                history,
            });
        }
    }
    Err(Error::MaxIterExceeded {
        iterations: opts.max_iter,
        step,
        residual: history.last().map_or(f64::NAN, |r| r.residual),
    })
}

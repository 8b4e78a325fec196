use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state has {state} sites but the lattice has {config}")]
    SizeMismatch { state: usize, config: usize },

    #[error("sample count {0} is not a power of two >= 8")]
    NotPowerOfTwo(usize),

    /// A Fourier multiplier is (numerically) zero, so the linear operator
    /// cannot be inverted on the represented modes.
    #[error("resonant multiplier: nu_{l} = {nu:e}")]
    Resonance { l: i64, nu: f64 },

    #[error("|omega| = {omega} does not exceed the band radius {radius}")]
    BandViolation { omega: f64, radius: f64 },

    #[error("no convergence after {iterations} iterations (step {step:e}, residual {residual:e})")]
    MaxIterExceeded {
        iterations: usize,
        step: f64,
        residual: f64,
    },

    #[error("fixed-point iterate became non-finite at iteration {iterations}")]
    Diverged { iterations: usize },

    #[error("trajectory blew up at t = {time}")]
    BlowUp { time: f64 },

    #[error("profile period {profile} does not match plan period {plan}")]
    PeriodMismatch { profile: f64, plan: f64 },

    #[error("embedding plan is not ring-exact (closure defect {0:e})")]
    NonExactPlan(f64),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

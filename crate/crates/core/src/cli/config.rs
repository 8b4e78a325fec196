//! Run configuration documents (TOML, or JSON as embedded in artifacts).

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::{plan_commensurate, EmbeddingPlan};
use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;
use crate::nonlinearity::Nonlinearity;
use crate::solver::SolverOptions;
use crate::spectral::WaveParameters;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeSection,
    #[serde(default)]
    pub nonlinearity: NonlinearitySection,
    pub wave: WaveSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub band: BandSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub n: usize,
    /// Optional; must equal `kappa.len()` when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_c: Option<usize>,
    pub kappa: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearityKindName {
    Cubic,
    Saturable,
    Power,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySection {
    pub kind: NonlinearityKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl Default for NonlinearitySection {
    fn default() -> Self {
        Self {
            kind: NonlinearityKindName::Cubic,
            sigma: None,
            a: None,
            b: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u64>,
    /// Phase winding: `q = 2 pi m / N` on the configured ring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    pub omega: f64,
    #[serde(default = "one")]
    pub wraps: usize,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_budget")]
    pub power_budget: f64,
}

fn one() -> usize {
    1
}
fn default_modes() -> usize {
    128
}
fn default_budget() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedKind {
    Zero,
    Dispersion,
    Cosine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    pub kind: SeedKind,
    /// Base amplitude; defaults to the constant-branch amplitude (or 1 when none exists).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    #[serde(default = "default_seed_mode")]
    pub mode: u32,
}

fn default_eps() -> f64 {
    0.2
}
fn default_seed_mode() -> u32 {
    1
}

impl Default for SeedSection {
    fn default() -> Self {
        Self {
            kind: SeedKind::Cosine,
            amplitude: None,
            epsilon: default_eps(),
            mode: default_seed_mode(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub damping: f64,
    pub petviashvili: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub max_iter: usize,
    pub tol_step: f64,
    pub tol_residual: f64,
    pub trivial_floor: f64,
    pub project_kernel: bool,
    pub dealias: bool,
    pub seed: SeedSection,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            damping: d.damping,
            petviashvili: d.petviashvili,
            gamma: d.gamma,
            max_iter: d.max_iter,
            tol_step: d.tol_step,
            tol_residual: d.tol_residual,
            trivial_floor: d.trivial_floor,
            project_kernel: d.project_kernel,
            dealias: d.dealias,
            seed: SeedSection::default(),
        }
    }
}

impl SolverSection {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            damping: self.damping,
            petviashvili: self.petviashvili,
            gamma: self.gamma,
            max_iter: self.max_iter,
            tol_step: self.tol_step,
            tol_residual: self.tol_residual,
            trivial_floor: self.trivial_floor,
            project_kernel: self.project_kernel,
            dealias: self.dealias,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub t_final: f64,
    pub dt: f64,
    pub sample_every: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            t_final: 10.0,
            dt: 1e-3,
            sample_every: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandSection {
    pub x_max: f64,
    pub samples: usize,
}

impl Default for BandSection {
    fn default() -> Self {
        Self {
            x_max: 4.0 * PI,
            samples: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub q: GridAxis,
    pub omega: GridAxis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: None,
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

/// Which of the three ways of giving `q` was used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QSource {
    Explicit,
    Winding,
    Rational,
}

/// Everything a command needs, validated.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub lattice: LatticeConfig,
    pub nonlinearity: Nonlinearity,
    pub params: WaveParameters,
    pub q_source: QSource,
    pub period: f64,
    pub plan: Option<EmbeddingPlan>,
    pub options: SolverOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
        }
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        let sec = &self.nonlinearity;
        let base = match sec.kind {
            NonlinearityKindName::Cubic => Nonlinearity::cubic(),
            NonlinearityKindName::Saturable => Nonlinearity::saturable(),
            NonlinearityKindName::Power => Nonlinearity::power(
                sec.sigma
                    .ok_or_else(|| Error::Config("power nonlinearity needs sigma".into()))?,
            )?,
        };
        if sec.kind != NonlinearityKindName::Power && sec.sigma.is_some() {
            return Err(Error::Config(
                "sigma only applies to the power nonlinearity".into(),
            ));
        }
        match (sec.a, sec.b) {
            (None, None) => Ok(base),
            (a, b) => {
                let (a0, b0) = (base.a(), base.b());
                base.with_growth(a.unwrap_or(a0), b.unwrap_or(b0))
            }
        }
    }

    /// Validates every section and resolves `q` with precedence
    /// explicit `q` > winding `m` > rational `(r, s)`.
    pub fn resolve(&self) -> Result<Resolved> {
        let lat = &self.lattice;
        if let Some(nc) = lat.n_c {
            if nc != lat.kappa.len() {
                return Err(Error::Config(format!(
                    "n_c = {nc} but {} couplings given",
                    lat.kappa.len()
                )));
            }
        }
        let lattice = LatticeConfig::new(lat.n, lat.kappa.clone())?;
        let nonlinearity = self.nonlinearity()?;
        let w = &self.wave;
        if !(w.power_budget.is_finite() && w.power_budget >= 0.0) {
            return Err(Error::Config(format!(
                "power_budget = {} must be >= 0",
                w.power_budget
            )));
        }
        let (params, q_source, period, plan) = if let Some(q) = w.q {
            (
                WaveParameters::new(q, w.omega)?,
                QSource::Explicit,
                2.0 * PI,
                None,
            )
        } else if let Some(m) = w.m {
            let plan = plan_commensurate(m, w.wraps, lat.n)?;
            (
                WaveParameters::new(plan.q, w.omega)?,
                QSource::Winding,
                plan.period,
                Some(plan),
            )
        } else if let (Some(r), Some(s)) = (w.r, w.s) {
            (
                WaveParameters::from_rational(r, s, w.omega)?,
                QSource::Rational,
                2.0 * PI,
                None,
            )
        } else {
            return Err(Error::Config("wave needs q, m, or both r and s".into()));
        };
        let options = self.solver.options();
        options.validate()?;
        crate::profile::Profile::zeros(period, w.modes)?;
        let sim = &self.simulate;
        if !(sim.t_final > 0.0 && sim.dt > 0.0 && sim.sample_every > 0) {
            return Err(Error::Config(
                "simulate needs t_final > 0, dt > 0, sample_every >= 1".into(),
            ));
        }
        if !(self.band.x_max > 0.0 && self.band.samples > 0) {
            return Err(Error::Config("band needs x_max > 0 and samples >= 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.q.count == 0 || sweep.omega.count == 0 {
                return Err(Error::Config("sweep axes need count >= 1".into()));
            }
        }
        if self.output.formats.is_empty() {
            return Err(Error::Config("output.formats is empty".into()));
        }
        Ok(Resolved {
            lattice,
            nonlinearity,
            params,
            q_source,
            period,
            plan,
            options,
        })
    }
}

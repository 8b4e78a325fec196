//! Command-line front end: `band`, `check`, `solve`, `simulate`, `sweep`.
//!
//! Exit codes: 0 success, 1 bad input, 2 no convergence, 3 resonance, 4 blow-up.

pub mod artifacts;
pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::embedding::{embed, minimal_period_report, ring_periodicity_defect, state_translation_error};
use crate::error::{Error, Result};
use crate::integrator::integrate;
use crate::lattice::power;
use crate::profile::{profile_norms, Profile};
use crate::solver::{amplitude_from_dispersion, cosine_seed, solve, SolveResult};
use crate::spectral::{
    band_range, g_eval, inverse_norm_estimate, modes_by_magnitude, multiplier, WaveParameters, KERNEL_TOL,
    RESONANCE_TOL,
};
use crate::theorem::{hypothesis_check, resonance_scan, DEFAULT_SCAN_MODES};
use artifacts::{config_hash, fmt_f64, write_all, Artifact, Csv};
use config::{Resolved, RunConfig, SeedKind};

/// Default output directory when neither `--out` nor `output.directory` is set.
pub const OUTPUT_ENV: &str = "DNLS_TW_OUT";

/// Cap on the resonant modes listed by `check`.
const MAX_LISTED_RESONANCES: usize = 16;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_RESONANCE: i32 = 3;
pub const EXIT_BLOW_UP: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "dnls-tw", version, about = "Periodic travelling waves on DNLS rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Band function g(x) and its supremum.
    Band(Common),
    /// Frequency hypothesis, resonance scan and inverse-norm estimate.
    Check(Common),
    /// Solve the envelope equation.
    Solve(Common),
    /// Solve, embed on the ring and integrate the lattice.
    Simulate(Common),
    /// Solve over a (q, omega) grid.
    Sweep(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration (TOML, or JSON).
    config: PathBuf,
    /// Override `wave.omega`.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<f64>,
    /// Override the wave phase; takes precedence over `m` and `r/s`.
    #[arg(long)]
    q: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::MaxIterExceeded { .. } | Error::Diverged { .. } => EXIT_NO_CONVERGENCE,
        Error::Resonance { .. } | Error::BandViolation { .. } => EXIT_RESONANCE,
        Error::BlowUp { .. } => EXIT_BLOW_UP,
        _ => EXIT_INPUT,
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

struct Run {
    config: RunConfig,
    resolved: Resolved,
    hash: String,
    out_dir: PathBuf,
}

impl Run {
    fn prepare(common: &Common) -> Result<Self> {
        let mut config = RunConfig::load(&common.config)?;
        if let Some(omega) = common.omega {
            config.wave.omega = omega;
        }
        if let Some(q) = common.q {
            config.wave.q = Some(q);
        }
        let out_dir = common
            .out
            .clone()
            .or_else(|| config.output.directory.as_ref().map(PathBuf::from))
            .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        config.output.directory = Some(out_dir.to_string_lossy().into_owned());
        let resolved = config.resolve()?;
        let hash = config_hash(&config);
        Ok(Self {
            config,
            resolved,
            hash,
            out_dir,
        })
    }

    fn header(&self, command: &str) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("command".into(), json!(command));
        m.insert("config_hash".into(), json!(self.hash));
        m.insert("q_source".into(), json!(self.resolved.q_source));
        // where the files went does not affect them, and would break byte-identical reruns
        let mut embedded = self.config.clone();
        embedded.output.directory = None;
        m.insert(
            "config".into(),
            serde_json::to_value(&embedded).expect("config serialises"),
        );
        m
    }

    fn emit(&self, artifacts: Vec<Artifact>) -> Result<()> {
        for path in write_all(&self.out_dir, &self.config.output.formats, artifacts)? {
            println!("{}", path.display());
        }
        Ok(())
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Band(c) => cmd_band(&Run::prepare(&c)?),
        Command::Check(c) => cmd_check(&Run::prepare(&c)?),
        Command::Solve(c) => cmd_solve(&Run::prepare(&c)?),
        Command::Simulate(c) => cmd_simulate(&Run::prepare(&c)?),
        Command::Sweep(c) => cmd_sweep(&Run::prepare(&c)?),
    }
}

fn cmd_band(run: &Run) -> Result<i32> {
    let lattice = &run.resolved.lattice;
    let band = band_range(lattice);
    let sec = &run.config.band;
    let mut csv = Csv::new(&["x", "g"]);
    for i in 1..=sec.samples {
        let x = sec.x_max * i as f64 / sec.samples as f64;
        csv.row(&[fmt_f64(x), fmt_f64(g_eval(x, lattice)?)]);
    }
    let mut doc = run.header("band");
    doc.insert("band".into(), json!(band));
    run.emit(vec![
        Artifact::csv("g", &run.hash, csv),
        Artifact::json("band", &run.hash, &Value::Object(doc)),
    ])?;
    Ok(EXIT_OK)
}

fn cmd_check(run: &Run) -> Result<i32> {
    let r = &run.resolved;
    let hyp = hypothesis_check(
        &r.params,
        &r.lattice,
        &r.nonlinearity,
        run.config.wave.power_budget,
    )?;
    let scan = resonance_scan(&r.params, &r.lattice, DEFAULT_SCAN_MODES, r.period);
    let inverse = match inverse_norm_estimate(&r.params, &r.lattice, DEFAULT_SCAN_MODES, r.period) {
        Ok(est) => json!(est),
        Err(Error::BandViolation { .. }) => Value::Null,
        Err(e) => return Err(e),
    };
    let mut doc = run.header("check");
    doc.insert("wave".into(), json!(r.params));
    doc.insert("period".into(), json!(r.period));
    doc.insert("band".into(), json!(band_range(&r.lattice)));
    doc.insert("hypothesis".into(), json!(hyp));
    doc.insert("resonance_scan".into(), json!(scan));
    doc.insert("inverse_norm".into(), inverse);
    if let Some((rn, s)) = r.params.rational {
        doc.insert("minimal_period".into(), json!(minimal_period_report(rn, s)?));
    }
    if let Some(plan) = &r.plan {
        doc.insert("plan".into(), json!(plan));
    }
    // modes with q + lambda_l = 0 are projected out by the solver when enabled
    let resonant: Vec<(i64, f64, bool)> = modes_by_magnitude(DEFAULT_SCAN_MODES)
        .filter_map(|l| {
            let nu = multiplier(l, &r.params, &r.lattice, r.period);
            let lam = 2.0 * std::f64::consts::PI * l as f64 / r.period;
            (nu.abs() <= RESONANCE_TOL).then_some((l, nu, (r.params.q + lam).abs() < KERNEL_TOL))
        })
        .take(MAX_LISTED_RESONANCES)
        .collect();
    doc.insert(
        "resonant_modes".into(),
        Value::Array(
            resonant
                .iter()
                .map(|(l, nu, kernel)| json!({ "l": l, "nu": nu, "kernel": kernel }))
                .collect(),
        ),
    );
    run.emit(vec![Artifact::json("check", &run.hash, &Value::Object(doc))])?;
    let blocking: Vec<i64> = resonant
        .iter()
        .filter(|(_, _, kernel)| !(*kernel && r.options.project_kernel))
        .map(|(l, _, _)| *l)
        .collect();
    if !blocking.is_empty() {
        eprintln!("resonant modes {blocking:?}");
        return Ok(EXIT_RESONANCE);
    }
    Ok(EXIT_OK)
}

fn build_seed(config: &RunConfig, r: &Resolved, params: &WaveParameters) -> Result<Profile> {
    let seed = &config.solver.seed;
    let m = config.wave.modes;
    let amplitude = seed
        .amplitude
        .or_else(|| amplitude_from_dispersion(params, &r.lattice, &r.nonlinearity))
        .filter(|a| *a > 0.0)
        .unwrap_or(1.0);
    match seed.kind {
        SeedKind::Zero => Profile::zeros(r.period, m),
        SeedKind::Dispersion => Profile::constant(r.period, m, amplitude.into()),
        SeedKind::Cosine => cosine_seed(r.period, m, amplitude, seed.epsilon, seed.mode),
    }
}

fn solve_at(config: &RunConfig, r: &Resolved, params: &WaveParameters) -> Result<SolveResult> {
    let seed = build_seed(config, r, params)?;
    solve(&seed, params, &r.lattice, &r.nonlinearity, &r.options)
}

fn solve_summary(res: &SolveResult) -> Value {
    let norms = profile_norms(&res.profile);
    json!({
        "converged": res.converged,
        "trivial": res.trivial,
        "iterations": res.iterations,
        "residual_sup": res.residual_sup,
        "step_last": res.step_last,
        "c0": norms.c0,
        "c1": norms.c1,
        "mean_power": res.profile.inner(&res.profile).re,
    })
}

fn profile_csv(p: &Profile) -> Csv {
    let mut csv = Csv::new(&["u", "re_phi", "im_phi"]);
    for (u, z) in p.grid().zip(p.samples()) {
        csv.row(&[fmt_f64(u), fmt_f64(z.re), fmt_f64(z.im)]);
    }
    csv
}

fn cmd_solve(run: &Run) -> Result<i32> {
    let r = &run.resolved;
    let res = solve_at(&run.config, r, &r.params)?;
    let hyp = hypothesis_check(
        &r.params,
        &r.lattice,
        &r.nonlinearity,
        run.config.wave.power_budget,
    )?;
    let mut doc = run.header("solve");
    doc.insert("wave".into(), json!(r.params));
    doc.insert("period".into(), json!(r.period));
    doc.insert("hypothesis".into(), json!(hyp));
    doc.insert("result".into(), solve_summary(&res));
    doc.insert("history".into(), json!(res.history));
    run.emit(vec![
        Artifact::json("solve", &run.hash, &Value::Object(doc)),
        Artifact::csv("profile", &run.hash, profile_csv(&res.profile)),
    ])?;
    if !res.converged {
        eprintln!("stalled with residual {:e}", res.residual_sup);
        return Ok(EXIT_NO_CONVERGENCE);
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(run: &Run) -> Result<i32> {
    let r = &run.resolved;
    let plan = r.plan.as_ref().ok_or_else(|| {
        Error::Config("simulate needs the winding form of the wave (set wave.m, not q or r/s)".into())
    })?;
    let res = solve_at(&run.config, r, &r.params)?;
    if !res.converged {
        eprintln!(
            "stalled with residual {:e}; nothing to simulate",
            res.residual_sup
        );
        return Ok(EXIT_NO_CONVERGENCE);
    }
    let sim = &run.config.simulate;
    let initial = embed(&res.profile, &r.params, plan, 0.0)?;
    let traj = integrate(
        &initial,
        sim.t_final,
        sim.dt,
        sim.sample_every,
        &r.lattice,
        &r.nonlinearity,
    )?;
    let mut csv = Csv::new(&["t", "power", "energy", "translation_error"]);
    let mut worst = 0.0f64;
    for (i, state) in traj.states.iter().enumerate() {
        let err = state_translation_error(state, &res.profile, &r.params)?;
        worst = worst.max(err);
        csv.row(&[
            fmt_f64(traj.times[i]),
            fmt_f64(traj.power_series[i]),
            fmt_f64(traj.energy_series[i]),
            fmt_f64(err),
        ]);
    }
    let mut doc = run.header("simulate");
    doc.insert("wave".into(), json!(r.params));
    doc.insert("plan".into(), json!(plan));
    doc.insert("solve".into(), solve_summary(&res));
    doc.insert(
        "simulation".into(),
        json!({
            "method": traj.method,
            "dt": traj.dt,
            "samples": traj.times.len(),
            "initial_power": power(&initial),
            "relative_power_drift": traj.relative_power_drift(),
            "relative_energy_drift": traj.relative_energy_drift(),
            "max_translation_error": worst,
            "ring_periodicity_defect": ring_periodicity_defect(&res.profile, &r.params, plan, 0.0)?,
        }),
    );
    run.emit(vec![
        Artifact::csv("diagnostics", &run.hash, csv),
        Artifact::json("simulate", &run.hash, &Value::Object(doc)),
    ])?;
    Ok(EXIT_OK)
}

struct SweepRow {
    q: f64,
    omega: f64,
    status: &'static str,
    converged: bool,
    trivial: bool,
    iterations: usize,
    residual: f64,
    margin: f64,
}

fn sweep_point(run: &Run, q: f64, omega: f64) -> SweepRow {
    let r = &run.resolved;
    let mut row = SweepRow {
        q,
        omega,
        status: "invalid",
        converged: false,
        trivial: false,
        iterations: 0,
        residual: f64::NAN,
        margin: f64::NAN,
    };
    let Ok(params) = WaveParameters::new(q, omega) else {
        return row;
    };
    if let Ok(h) = hypothesis_check(&params, &r.lattice, &r.nonlinearity, run.config.wave.power_budget) {
        row.margin = h.margin;
    }
    match solve_at(&run.config, r, &params) {
        Ok(res) => {
            row.status = if res.converged { "ok" } else { "stalled" };
            row.converged = res.converged;
            row.trivial = res.trivial;
            row.iterations = res.iterations;
            row.residual = res.residual_sup;
        }
        Err(Error::MaxIterExceeded {
            iterations, residual, ..
        }) => {
            row.status = "max_iter";
            row.iterations = iterations;
            row.residual = residual;
        }
        Err(Error::Diverged { iterations }) => {
            row.status = "diverged";
            row.iterations = iterations;
        }
        Err(Error::Resonance { .. }) => row.status = "resonance",
        Err(_) => {}
    }
    row
}

fn cmd_sweep(run: &Run) -> Result<i32> {
    let sweep = run
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs a [sweep] section".into()))?;
    let points: Vec<(f64, f64)> = sweep
        .q
        .values()
        .into_iter()
        .flat_map(|q| sweep.omega.values().into_iter().map(move |w| (q, w)))
        .collect();
    // collect() keeps input order, so the table does not depend on scheduling
    let rows: Vec<SweepRow> = points.par_iter().map(|&(q, w)| sweep_point(run, q, w)).collect();
    let mut csv = Csv::new(&[
        "q",
        "omega",
        "status",
        "converged",
        "trivial",
        "iterations",
        "residual",
        "margin",
    ]);
    for row in &rows {
        csv.row(&[
            fmt_f64(row.q),
            fmt_f64(row.omega),
            row.status.to_string(),
            row.converged.to_string(),
            row.trivial.to_string(),
            row.iterations.to_string(),
            fmt_f64(row.residual),
            fmt_f64(row.margin),
        ]);
    }
    let mut doc = run.header("sweep");
    doc.insert("points".into(), json!(rows.len()));
    doc.insert(
        "converged".into(),
        json!(rows.iter().filter(|r| r.converged).count()),
    );
    run.emit(vec![
        Artifact::csv("sweep", &run.hash, csv),
        Artifact::json("sweep", &run.hash, &Value::Object(doc)),
    ])?;
    Ok(EXIT_OK)
}

/// Convenience for callers that already hold a path.
pub fn run_config_file(command: &str, config: &Path, out: &Path) -> i32 {
    run_command([
        OsString::from("dnls-tw"),
        OsString::from(command),
        config.as_os_str().to_owned(),
        OsString::from("--out"),
        out.as_os_str().to_owned(),
    ])
}

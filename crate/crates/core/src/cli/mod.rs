//! Command-line front end.
//!
//! Every command writes CSV (or a short report) to stdout or `--out`.
//! Times on the command line and in the output are in units of `1/γ`.

mod figures;
mod format;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{QflowError, Result};
use crate::evolve::TimeGrid;
use crate::models::file::load_model;
use crate::models::random::{random_quantum_bystander, random_unitary_model};
use crate::models::{
    check_casual_bystander, commuting_model, damping_born_markov, exchange_model, BipartiteModel,
    DepolarizingModel, Modulation,
};
use crate::qcore::{c, CVector, DensityMatrix};
use crate::validate;
use crate::witness::{
    cpf_joint, reference_preparation, td_bound_terms, td_series, CpfSpecs, MeasurementSpec,
    RandomSchemePolicy, Scheme, WitnessEngine,
};

pub use figures::{render_figure, FigureKind, FigureOptions};
pub use format::{format_number, CsvTable};

pub const PRESETS: [&str; 7] = [
    "depolarizing",
    "coherent",
    "exchange",
    "dephasing",
    "born-markov",
    "random-bystander",
    "random-unitary",
];

#[derive(Parser, Debug)]
#[command(
    name = "qflow",
    version,
    about = "Witnesses of memory effects in open quantum systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Trace-distance factor d(t) of the depolarizing model for several φ/γ.
    Fig1a,
    /// Equal-time CPF correlation of the depolarizing model for several φ/γ.
    Fig1b,
    /// Trace-distance factor with a coherently driven environment for several Ω/γ.
    Fig2,
    /// CPF correlation of a model on a (t, τ) grid.
    Cpf,
    /// Trace distance between two evolved system states.
    Td,
    /// Trace-distance increments and their bounding terms.
    Bound,
    /// Tests whether the environment dynamics ignores the system.
    CheckBystander,
    /// Runs the full reproduction suite.
    Validate,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeArg {
    D,
    R,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    #[arg(long, global = true, default_value_t = 1.0)]
    pub gamma: f64,
    /// Defaults to `gamma`.
    #[arg(long, global = true)]
    pub phi: Option<f64>,
    #[arg(long, global = true, default_value_t = 0.0)]
    pub omega: f64,
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [0.25, 1.0, 4.0])]
    pub phi_over_gamma: Vec<f64>,
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0, 2.0, 5.0])]
    pub omega_over_gamma: Vec<f64>,
    /// Rate modulation `b(t) = A sin(ν t)` given as `A,ν`.
    #[arg(long, global = true, value_delimiter = ',', num_args = 2)]
    pub modulation: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Fixed second interval for `cpf` and `bound`.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = SchemeArg::D)]
    pub scheme: SchemeArg,
    /// Preset name or model file.
    #[arg(long, global = true, default_value = "depolarizing")]
    pub model: String,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, env = "QFLOW_JOBS")]
    pub jobs: Option<usize>,
    /// Restricts `validate` to the listed checks.
    #[arg(long, global = true, value_delimiter = ',')]
    pub only: Vec<u8>,
}

impl RunConfig {
    pub fn phi(&self) -> f64 {
        self.phi.unwrap_or(self.gamma)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.gamma, self.phi(), self.omega]
            .iter()
            .all(|x| x.is_finite());
        if !finite || self.gamma <= 0.0 || self.phi() < 0.0 || self.omega < 0.0 {
            return Err(QflowError::InvalidInput(format!(
                "need gamma > 0, phi >= 0, omega >= 0; got {}, {}, {}",
                self.gamma,
                self.phi(),
                self.omega
            )));
        }
        for (name, v) in [("tmax", self.tmax), ("step", self.step), ("tau", self.tau)] {
            if let Some(x) = v {
                if !(x.is_finite() && x >= 0.0) || (name == "step" && x == 0.0) {
                    return Err(QflowError::InvalidInput(format!("invalid --{name} {x}")));
                }
            }
        }
        Ok(())
    }

    fn scheme(&self, dim: usize) -> Scheme {
        match self.scheme {
            SchemeArg::D => Scheme::Deterministic,
            SchemeArg::R => Scheme::Random(RandomSchemePolicy::uniform(dim, dim)),
        }
    }

    /// Grid in units of `1/γ`.
    fn grid(&self, tmax: f64, step: f64) -> Result<TimeGrid> {
        TimeGrid::uniform(self.tmax.unwrap_or(tmax), self.step.unwrap_or(step))
    }

    fn echo(&self, command: &str) -> String {
        let mut parts = vec![
            format!("command={command}"),
            format!("gamma={}", self.gamma),
            format!("phi={}", self.phi()),
            format!("omega={}", self.omega),
            format!("model={}", self.model),
            format!("scheme={:?}", self.scheme).to_lowercase(),
            format!("seed={}", self.seed),
        ];
        for (name, v) in [("tmax", self.tmax), ("step", self.step), ("tau", self.tau)] {
            if let Some(x) = v {
                parts.push(format!("{name}={x}"));
            }
        }
        if let Some(m) = &self.modulation {
            parts.push(format!("modulation={}", join(m)));
        }
        parts.join(" ")
    }
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Resolves `--model` into a model: an existing file is parsed, otherwise the
/// name must be one of [`PRESETS`].
pub fn resolve_model(config: &RunConfig) -> Result<BipartiteModel> {
    let path = Path::new(&config.model);
    if path.is_file() {
        return load_model(path);
    }
    let (g, phi, omega) = (config.gamma, config.phi(), config.omega);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let model: BipartiteModel = match config.model.as_str() {
        "depolarizing" => {
            let m = if omega > 0.0 {
                DepolarizingModel::from_rest(g, phi, omega)?
            } else {
                DepolarizingModel::stationary(g, phi)?
            };
            match &config.modulation {
                Some(v) => m.with_modulation(Modulation::sine(v[0], v[1])?)?.into(),
                None => m.into(),
            }
        }
        "coherent" => DepolarizingModel::from_rest(g, phi, omega)?.into(),
        "exchange" => exchange_model(g)?.into(),
        "dephasing" => commuting_model(g, omega)?.into(),
        "born-markov" => damping_born_markov(g)?.into(),
        "random-bystander" => random_quantum_bystander(&mut rng, 2, 2)?.into(),
        "random-unitary" => random_unitary_model(&mut rng, 2, 2)?.into(),
        other => {
            return Err(QflowError::InvalidInput(format!(
                "{other:?} is neither a model file nor a preset ({})",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(model)
}

/// Result of a command: its text output and whether a validation failed.
#[derive(Debug)]
pub struct Outcome {
    pub output: String,
    pub failed: bool,
}

pub fn run(command: Command, config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    let output = match command {
        Command::Fig1a | Command::Fig1b | Command::Fig2 => {
            let kind = match command {
                Command::Fig1a => FigureKind::Fig1a,
                Command::Fig1b => FigureKind::Fig1b,
                _ => FigureKind::Fig2,
            };
            render_figure(kind, &FigureOptions::from_config(kind, config))?
        }
        Command::Cpf => cmd_cpf(config)?,
        Command::Td => cmd_td(config)?,
        Command::Bound => cmd_bound(config)?,
        Command::CheckBystander => {
            let report = check_casual_bystander(&resolve_model(config)?)?;
            let relation = if report.holds { "<" } else { ">=" };
            format!(
                "{}, residual {} {relation} 1e-9\n",
                report.holds,
                format_number(report.residual)
            )
        }
        Command::Validate => {
            if let Some(bad) = config.only.iter().find(|id| !(1..=10).contains(*id)) {
                return Err(QflowError::InvalidInput(format!(
                    "checks are numbered 1 to 10, got {bad}"
                )));
            }
            return Ok(cmd_validate(config));
        }
    };
    Ok(Outcome {
        output,
        failed: false,
    })
}

fn cmd_validate(config: &RunConfig) -> Outcome {
    let ids: Vec<u8> = if config.only.is_empty() {
        (1..=10).collect()
    } else {
        config.only.clone()
    };
    let mut output = String::new();
    let mut failed = false;
    for id in ids {
        let outcome = validate::run_check(id);
        failed |= !outcome.passed;
        output.push_str(&outcome.line());
        output.push('\n');
    }
    Outcome { output, failed }
}

/// Default preparation: `|+⟩` for qubits, the uniform superposition otherwise.
fn default_preparation(dim: usize) -> Result<DensityMatrix> {
    if dim == 2 {
        return Ok(reference_preparation());
    }
    DensityMatrix::pure(&CVector::from_element(dim, c(1.0 / (dim as f64).sqrt())))
}

fn engine_for(config: &RunConfig) -> Result<(WitnessEngine, DensityMatrix)> {
    let model = resolve_model(config)?;
    let env = model.initial_env();
    let max_step = config.step.map(|h| h / config.gamma);
    Ok((WitnessEngine::new(model, max_step)?, env))
}

fn cmd_cpf(config: &RunConfig) -> Result<String> {
    let (engine, env) = engine_for(config)?;
    let ds = engine.model().system_dim();
    let specs = CpfSpecs::uniform(MeasurementSpec::computational(ds));
    let scheme = config.scheme(ds);
    let rho = default_preparation(ds)?;
    let ts = config.grid(3.0, 0.5)?;
    let taus: Vec<f64> = match config.tau {
        Some(tau) => vec![tau],
        None => ts.times().to_vec(),
    };
    let mut header = vec!["t".to_string(), "tau".to_string()];
    header.extend((0..ds).map(|y| format!("cpf@y{y}")));
    let mut table = CsvTable::new(&config.echo("cpf"), header);
    let g = config.gamma;
    let points: Vec<(f64, f64)> = ts
        .times()
        .iter()
        .flat_map(|&t| taus.iter().map(move |&tau| (t, tau)))
        .collect();
    let rows = figures::par_map(&points, |&(t, tau)| {
        let r = cpf_joint(&engine, &rho, &env, &specs, &scheme, t / g, tau / g)?;
        Ok(r.correlations)
    })?;
    for (&(t, tau), cs) in points.iter().zip(rows) {
        let mut row = vec![t, tau];
        row.extend(cs.into_iter().map(|c| c.unwrap_or(f64::NAN)));
        table.push(&row);
    }
    Ok(table.finish())
}

fn qubit_pair(dim: usize) -> Result<(DensityMatrix, DensityMatrix)> {
    Ok((DensityMatrix::basis(dim, 0)?, DensityMatrix::basis(dim, 1)?))
}

fn cmd_td(config: &RunConfig) -> Result<String> {
    let (engine, env) = engine_for(config)?;
    let (rho, sigma) = qubit_pair(engine.model().system_dim())?;
    let grid = config.grid(6.0, 0.01)?;
    let real = grid.scaled(1.0 / config.gamma)?;
    let trace = td_series(&engine, &rho, &sigma, &env, &real)?;
    let mut table = CsvTable::new(&config.echo("td"), ["t", "D", "revival"]);
    for i in 0..grid.len() {
        let flag = if trace.revivals[i] { 1.0 } else { 0.0 };
        table.push(&[grid.times()[i], trace.distances[i], flag]);
    }
    Ok(table.finish())
}

fn cmd_bound(config: &RunConfig) -> Result<String> {
    let (engine, env) = engine_for(config)?;
    let (rho, sigma) = qubit_pair(engine.model().system_dim())?;
    let grid = config.grid(3.0, 0.1)?;
    let tau = config.tau.unwrap_or(0.5);
    let g = config.gamma;
    let terms = figures::par_map(grid.times(), |&t| {
        td_bound_terms(&engine, &rho, &sigma, &env, t / g, tau / g)
    })?;
    let mut table = CsvTable::new(
        &config.echo("bound"),
        [
            "t",
            "tau",
            "increment",
            "env_distance",
            "corr_rho",
            "corr_sigma",
            "slack",
        ],
    );
    for (&t, b) in grid.times().iter().zip(terms) {
        table.push(&[
            t,
            tau,
            b.increment,
            b.env_distance,
            b.corr_rho,
            b.corr_sigma,
            b.slack,
        ]);
    }
    Ok(table.finish())
}

/// Exit status for an error: 2 for configuration problems, 3 for numerical
/// invariant breaches.
pub fn exit_code(err: &QflowError) -> u8 {
    match err {
        QflowError::InvalidInput(_)
        | QflowError::ModelFile(_)
        | QflowError::Io(_)
        | QflowError::DimensionMismatch { .. }
        | QflowError::NotSquare { .. }
        | QflowError::NotHermitian { .. }
        | QflowError::InvalidState(_)
        | QflowError::NegativeRate(_)
        | QflowError::IncompleteKraus { .. }
        | QflowError::NonProjective { .. } => 2,
        _ => 3,
    }
}

/// Writes the outcome to `--out` or stdout.
pub fn emit(config: &RunConfig, outcome: &Outcome) -> Result<()> {
    match &config.out {
        Some(path) => std::fs::write(path, &outcome.output)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(outcome.output.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

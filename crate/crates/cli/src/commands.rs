//! Subcommand bodies. Each returns the process exit code on success.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use optiplace::flow::{check_compatibility, simulate_with_restarts};
use optiplace::{
    construct_with, irregularity, lower_bound, CoefficientSequence, ConstructOptions, Error, Outcome, Placement,
    SensorSpec,
};
use serde::Serialize;

use crate::report::{trajectory_csv, PlacementReport};
use crate::scenario::{self, Mode, ParseError, Scenario};

/// Certificate tolerance for `construct` reports.
pub const CONSTRUCT_TOL: f64 = 1e-9;
/// Certificate tolerance for `check` and `simulate` reports.
pub const CHECK_TOL: f64 = 1e-6;

pub mod exit {
    pub const OK: i32 = 0;
    pub const NOT_OPTIMAL: i32 = 1;
    pub const INFEASIBLE: i32 = 2;
    pub const CRITICAL: i32 = 3;
    pub const TIMED_OUT: i32 = 4;
    pub const USAGE: i32 = 64;
    pub const DEGENERATE: i32 = 65;
    pub const UNSUPPORTED: i32 = 69;
    pub const NUMERICAL: i32 = 70;
    pub const IO: i32 = 74;
    pub const STEP_SIZE: i32 = 75;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Structured,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Parse { .. } | CliError::Usage(_) => exit::USAGE,
            CliError::Core(e) => match e {
                Error::Contract(_) => exit::USAGE,
                Error::DegenerateGeometry(_) => exit::DEGENERATE,
                Error::Infeasible(_) => exit::INFEASIBLE,
                Error::Unsupported(_) => exit::UNSUPPORTED,
                Error::StepSize { .. } => exit::STEP_SIZE,
                Error::NumericalFailure { .. } | Error::PartNotOptimal { .. } | Error::Internal(_) => {
                    exit::NUMERICAL
                }
            },
        }
    }
}

pub type CliResult = Result<i32, CliError>;

/// Overrides shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Common {
    pub output: Option<PathBuf>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub format: Format,
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    scenario::parse(&text).map_err(|source| CliError::Parse { path: path.into(), source })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.into(), source })
}

fn emit(format: Format, text: &str, json: &str) {
    let mut out = std::io::stdout().lock();
    let _ = match format {
        Format::Text => out.write_all(text.as_bytes()),
        Format::Structured => writeln!(out, "{json}"),
    };
}

fn tolerance(tol: Option<f64>, default: f64) -> Result<f64, CliError> {
    match tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(CliError::Usage(format!("--tol {t} must be positive"))),
        Some(t) => Ok(t),
        None => Ok(default),
    }
}

fn require_mode(s: &Scenario, mode: Mode, command: &str) -> Result<(), CliError> {
    if s.mode == mode {
        return Ok(());
    }
    let want = match mode {
        Mode::Construct => "ranges (no positions)",
        Mode::Simulate => "a position for every sensor",
    };
    Err(CliError::Usage(format!("`{command}` needs a scenario with {want}")))
}

/// Specs and placement of a simulate-mode scenario.
fn positioned(s: &Scenario) -> Result<(Placement, Vec<SensorSpec>), CliError> {
    let positions = s.positions().expect("simulate mode has positions");
    let pl = Placement::from_sensor_positions(s.target.clone(), &positions)?;
    let specs = s
        .sensors
        .iter()
        .zip(pl.ranges())
        .map(|(e, &r)| SensorSpec::new(e.kind, e.sigma, r))
        .collect::<optiplace::Result<Vec<_>>>()?;
    Ok((pl, specs))
}

fn construct_specs(s: &Scenario) -> Result<Vec<SensorSpec>, CliError> {
    let ranges = s.ranges().expect("construct mode has ranges");
    Ok(s.sensors
        .iter()
        .zip(ranges)
        .map(|(e, r)| SensorSpec::new(e.kind, e.sigma, r))
        .collect::<optiplace::Result<Vec<_>>>()?)
}

pub fn construct(path: &Path, report_path: Option<&Path>, common: &Common) -> CliResult {
    let s = load(path)?;
    require_mode(&s, Mode::Construct, "construct")?;
    let tol = tolerance(common.tol, CONSTRUCT_TOL)?;
    let specs = construct_specs(&s)?;
    let coeffs = optiplace::coefficients(&specs)?;
    let options = ConstructOptions { method: s.method, seed: common.seed.unwrap_or(0), ..ConstructOptions::default() };
    let built = construct_with(&coeffs, s.dimension, &options)?;
    let ranges = s.ranges().expect("construct mode has ranges");
    let pl = built.placement.with_ranges(s.target.clone(), &ranges)?;
    let report = PlacementReport::new(&pl, &specs, tol, Some(built.method.to_string()))?;
    if let Some(out) = &common.output {
        write(out, &scenario::render_positions(&s, &pl.sensor_positions()))?;
    }
    if let Some(rp) = report_path {
        write(rp, &report.to_json())?;
    }
    emit(common.format, &report.to_text(), &report.to_json());
    Ok(if report.verdict { exit::OK } else { exit::NOT_OPTIMAL })
}

pub fn check(path: &Path, common: &Common) -> CliResult {
    let s = load(path)?;
    require_mode(&s, Mode::Simulate, "check")?;
    let tol = tolerance(common.tol, CHECK_TOL)?;
    let (pl, specs) = positioned(&s)?;
    let report = PlacementReport::new(&pl, &specs, tol, None)?;
    if let Some(out) = &common.output {
        write(out, &report.to_json())?;
    }
    emit(common.format, &report.to_text(), &report.to_json());
    Ok(if report.verdict { exit::OK } else { exit::NOT_OPTIMAL })
}

#[derive(Debug, Serialize)]
struct SimulationSummary {
    outcome: String,
    restarts: usize,
    attempts: Vec<String>,
    final_time: f64,
    final_potential: f64,
    final_error: f64,
    samples: usize,
    compatibility: Option<String>,
    report: PlacementReport,
}

pub fn simulate(path: &Path, common: &Common) -> CliResult {
    let s = load(path)?;
    require_mode(&s, Mode::Simulate, "simulate")?;
    let (pl, specs) = positioned(&s)?;
    let block = s.flow.clone().unwrap_or_default();
    let mut config = block.config;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(tol) = common.tol {
        config.convergence_tol = tolerance(Some(tol), tol)?;
    }
    // Keep the sample count, and the CSV, bounded on long horizons.
    let steps = (config.t_end / config.dt).ceil();
    config.record_every = ((steps / 1e5).ceil() as usize).max(1);

    let coeffs = optiplace::coefficients(&specs)?;
    let compatibility = match &config.altitude_targets {
        Some(_) => Some(check_compatibility(std::slice::from_ref(&pl), &config)?.diagnostic),
        None => None,
    };
    let run = simulate_with_restarts(&pl, &coeffs, &config, block.max_restarts)?;
    let traj = &run.trajectory;
    let last = traj.final_sample();
    let final_specs = s
        .sensors
        .iter()
        .zip(last.placement.ranges())
        .map(|(e, &r)| SensorSpec::new(e.kind, e.sigma, r))
        .collect::<optiplace::Result<Vec<_>>>()?;
    let report = PlacementReport::new(&last.placement, &final_specs, CHECK_TOL, None)?;
    if let Some(out) = &common.output {
        write(out, &trajectory_csv(traj))?;
    }
    let summary = SimulationSummary {
        outcome: traj.outcome.to_string(),
        restarts: run.restarts,
        attempts: run.outcomes.iter().map(|o| o.to_string()).collect(),
        final_time: last.t,
        final_potential: last.potential,
        final_error: last.optimality_error,
        samples: traj.samples.len(),
        compatibility,
        report,
    };
    let mut text = format!(
        "outcome          {}\nrestarts         {}\nfinal time       {}\nfinal potential  {}\nfinal error      {}\n",
        summary.outcome,
        summary.restarts,
        crate::report::sig(summary.final_time),
        crate::report::sig(summary.final_potential),
        crate::report::sig(summary.final_error),
    );
    if let Some(c) = &summary.compatibility {
        text.push_str(&format!("compatibility    {c}\n"));
    }
    text.push_str(&summary.report.to_text());
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    emit(common.format, &text, &json);
    Ok(match traj.outcome {
        Outcome::ConvergedOptimal => exit::OK,
        Outcome::ConvergedCritical => exit::CRITICAL,
        Outcome::TimedOut => exit::TIMED_OUT,
    })
}

#[derive(Debug, Serialize)]
struct IrregularitySummary {
    dimension: usize,
    coefficients: Vec<f64>,
    k0: usize,
    regular: bool,
    dominant: Vec<usize>,
    residual: Vec<usize>,
    bound: f64,
}

pub fn irregularity_cmd(values: &[f64], dim: Option<usize>, scenario: Option<&Path>, common: &Common) -> CliResult {
    let (coeffs, d) = match (scenario, values.is_empty()) {
        (Some(_), false) => return Err(CliError::Usage("give either coefficient values or --scenario, not both".into())),
        (Some(p), true) => {
            let s = load(p)?;
            let specs = match s.mode {
                Mode::Construct => construct_specs(&s)?,
                Mode::Simulate => positioned(&s)?.1,
            };
            if dim.is_some_and(|d| d != s.dimension) {
                return Err(CliError::Usage(format!("--dim disagrees with the scenario dimension {}", s.dimension)));
            }
            (optiplace::coefficients(&specs)?, s.dimension)
        }
        (None, true) => return Err(CliError::Usage("no coefficient values given".into())),
        (None, false) => {
            let d = dim.ok_or_else(|| CliError::Usage("--dim is required with coefficient values".into()))?;
            (CoefficientSequence::new(values.to_vec())?, d)
        }
    };
    let report = irregularity(&coeffs, d)?;
    let summary = IrregularitySummary {
        dimension: d,
        coefficients: coeffs.values().to_vec(),
        k0: report.k0,
        regular: report.regular,
        dominant: report.dominant,
        residual: report.residual,
        bound: lower_bound(&coeffs, d)?,
    };
    let text = format!(
        "k0        {}\nregular   {}\ndominant  {:?}\nresidual  {:?}\nbound     {}\n",
        summary.k0,
        summary.regular,
        summary.dominant,
        summary.residual,
        crate::report::sig(summary.bound)
    );
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Some(out) = &common.output {
        write(out, &json)?;
    }
    emit(common.format, &text, &json);
    Ok(exit::OK)
}

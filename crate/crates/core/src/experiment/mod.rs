//! Experiment runner behind the `pon-sleep` CLI: configuration, sweeps and
//! result files.

mod config;
mod output;
mod run;

pub use config::{
    parse_sweep_flag, validate, Diagnostic, ExperimentConfig, OutputFormat, OutputSpec, Overrides,
    RawChassis, RawConfig, RawFabric, RawOutput, RawPolicy, RawSweep, RawTraffic, Severity, Sweep,
    SweepParam, TrafficKind, TrafficSpec,
};
pub use output::{
    write_analytic_csv, write_json, write_sim_csv, RunOutput, ANALYTIC_COLUMNS, PARAM_COLUMNS,
    SIM_COLUMNS,
};
pub use run::{
    build_trace, run_analytic, run_analytic_with, run_simulation, run_simulation_with, AnalyticRow,
    PointParams, SimRow,
};

use thiserror::Error;

use crate::markov::MarkovError;
use crate::sim::SimError;
use crate::traffic::TrafficError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration:\n{}", format_diagnostics(.0))]
    Config(Vec<Diagnostic>),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ExperimentError {
    /// 1 for configuration problems, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 1,
            _ => 2,
        }
    }
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Read a TOML file (if given), apply overrides and resolve.
pub fn load_config(
    path: Option<&std::path::Path>,
    overrides: &Overrides,
) -> Result<ExperimentConfig, ExperimentError> {
    let raw = load_raw(path, overrides)?;
    raw.resolve().map_err(ExperimentError::Config)
}

pub fn load_raw(
    path: Option<&std::path::Path>,
    overrides: &Overrides,
) -> Result<RawConfig, ExperimentError> {
    let mut raw = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            RawConfig::from_toml(&text).map_err(|d| ExperimentError::Config(vec![d]))?
        }
        None => RawConfig::default(),
    };
    raw.apply(overrides)
        .map_err(|d| ExperimentError::Config(vec![d]))?;
    Ok(raw)
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pon_sleep::experiment::{
    load_config, load_raw, run_analytic, run_simulation, validate, ExperimentConfig,
    ExperimentError, OutputFormat, Overrides, RunOutput, Severity, TrafficKind,
};

/// Energy-adaptive OLT line-card sleep control: analysis and simulation.
#[derive(Debug, Parser)]
#[command(name = "pon-sleep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the semi-Markov chain at each sweep point.
    Analytic(Common),
    /// Run the cycle-driven simulator at each sweep point.
    Simulate(Common),
    /// Check a configuration and print diagnostics.
    Validate(Common),
    /// Run a sweep: analytic for Poisson traffic, simulation otherwise.
    Sweep(Common),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct Common {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    line_cards: Option<u32>,
    /// Per-card capacity in both directions.
    #[arg(long)]
    capacity_gbps: Option<f64>,
    #[arg(long)]
    cycle_ms: Option<f64>,
    /// Cycles of low load before a card sleeps (M).
    #[arg(long)]
    listen_down: Option<i64>,
    /// Cycles of high load before a card wakes (N).
    #[arg(long)]
    listen_up: Option<i64>,
    #[arg(long, value_parser = parse_kind)]
    traffic: Option<TrafficKind>,
    /// Offered downstream rate (mean rate for self-similar traffic).
    #[arg(long)]
    lambda_gbps: Option<f64>,
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// PARAM=V1,V2,... with PARAM one of lambda, M, N, load.
    #[arg(long)]
    sweep: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<String>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

fn parse_kind(s: &str) -> Result<TrafficKind, String> {
    match s {
        "poisson" => Ok(TrafficKind::Poisson),
        "self-similar" => Ok(TrafficKind::SelfSimilar),
        _ => Err(format!("expected poisson or self-similar, got {s:?}")),
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => Err(format!("expected csv or json, got {s:?}")),
    }
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            line_cards: self.line_cards,
            capacity_gbps: self.capacity_gbps,
            cycle_ms: self.cycle_ms,
            listen_down: self.listen_down,
            listen_up: self.listen_up,
            kind: self.traffic,
            lambda_gbps: self.lambda_gbps,
            hurst: self.hurst,
            cycles: self.cycles,
            seed: self.seed,
            sweep: self.sweep.clone(),
            output: self.output.clone(),
            format: self.format,
        }
    }
}

fn emit(config: &ExperimentConfig, out: RunOutput) -> Result<(), ExperimentError> {
    match &config.output.path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            out.write(config.output.format, &mut w)?;
            w.flush()?;
        }
        None => out.write(config.output.format, io::stdout().lock())?,
    }
    Ok(())
}

fn run(command: Command) -> Result<ExitCode, ExperimentError> {
    match command {
        Command::Validate(args) => {
            let raw = load_raw(args.config.as_deref(), &args.overrides())?;
            let diags = validate(&raw);
            for d in &diags {
                println!("{d}");
            }
            if diags.iter().any(|d| d.severity == Severity::Error) {
                Ok(ExitCode::from(1))
            } else {
                println!("ok");
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Analytic(args) => {
            let cfg = load_config(args.config.as_deref(), &args.overrides())?;
            let rows = run_analytic(&cfg)?;
            emit(&cfg, RunOutput::Analytic(rows))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(args) => {
            let cfg = load_config(args.config.as_deref(), &args.overrides())?;
            let rows = run_simulation(&cfg)?;
            emit(&cfg, RunOutput::Simulation(rows))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let cfg = load_config(args.config.as_deref(), &args.overrides())?;
            if cfg.sweep.is_none() {
                return Err(ExperimentError::Config(vec![
                    pon_sleep::experiment::Diagnostic::error(
                        "sweep",
                        "no sweep given (use --sweep PARAM=V1,V2,... or a [sweep] table)",
                    ),
                ]));
            }
            let out = match cfg.traffic.kind {
                TrafficKind::Poisson => RunOutput::Analytic(run_analytic(&cfg)?),
                TrafficKind::SelfSimilar => RunOutput::Simulation(run_simulation(&cfg)?),
            };
            emit(&cfg, out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pon-sleep: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! CSV and JSON writers. Column order is fixed; rows are written in sweep
//! order, so identical inputs give byte-identical files.

use std::io::Write;

use super::config::OutputFormat;
use super::run::{AnalyticRow, PointParams, SimRow};
use super::ExperimentError;

pub const ANALYTIC_COLUMNS: &[&str] = &[
    "param",
    "value",
    "mean_active_cards",
    "avg_power_w",
    "energy_saving",
];

pub const SIM_COLUMNS: &[&str] = &[
    "param",
    "value",
    "energy_saving",
    "mean_delay_s",
    "mean_active_cards",
    "seed",
    "hurst_estimate",
    "max_delay_s",
    "reconfig_events",
    "traffic_kind",
    "hurst",
    "cycles",
];

pub const PARAM_COLUMNS: &[&str] = &[
    "line_cards",
    "downstream_capacity_gbps",
    "upstream_capacity_gbps",
    "cycle_ms",
    "listen_down",
    "listen_up",
    "lambda_gbps",
    "packet_size_bits",
    "card_power_w",
    "switch_power_w",
];

/// Rows from either runner.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    Analytic(Vec<AnalyticRow>),
    Simulation(Vec<SimRow>),
}

impl RunOutput {
    pub fn write<W: Write>(&self, format: OutputFormat, writer: W) -> Result<(), ExperimentError> {
        match (self, format) {
            (RunOutput::Analytic(rows), OutputFormat::Csv) => write_analytic_csv(rows, writer),
            (RunOutput::Simulation(rows), OutputFormat::Csv) => write_sim_csv(rows, writer),
            (RunOutput::Analytic(rows), OutputFormat::Json) => write_json(rows, writer),
            (RunOutput::Simulation(rows), OutputFormat::Json) => write_json(rows, writer),
        }
    }
}

fn param_fields(p: &PointParams) -> [String; 10] {
    [
        p.line_cards.to_string(),
        p.downstream_capacity_gbps.to_string(),
        p.upstream_capacity_gbps.to_string(),
        p.cycle_ms.to_string(),
        p.listen_down.to_string(),
        p.listen_up.to_string(),
        p.lambda_gbps.to_string(),
        p.packet_size_bits.to_string(),
        p.card_power_w.to_string(),
        p.switch_power_w.to_string(),
    ]
}

pub fn write_analytic_csv<W: Write>(
    rows: &[AnalyticRow],
    writer: W,
) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ANALYTIC_COLUMNS.iter().chain(PARAM_COLUMNS))?;
    for r in rows {
        let head = [
            r.param.clone(),
            r.value.to_string(),
            r.mean_active_cards.to_string(),
            r.avg_power_w.to_string(),
            r.energy_saving.to_string(),
        ];
        w.write_record(head.iter().chain(param_fields(&r.params).iter()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sim_csv<W: Write>(rows: &[SimRow], writer: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SIM_COLUMNS.iter().chain(PARAM_COLUMNS))?;
    for r in rows {
        let head = [
            r.param.clone(),
            r.value.to_string(),
            r.energy_saving.to_string(),
            r.mean_delay_s.to_string(),
            r.mean_active_cards.to_string(),
            r.seed.to_string(),
            r.hurst_estimate.map(|h| h.to_string()).unwrap_or_default(),
            r.max_delay_s.to_string(),
            r.reconfig_events.to_string(),
            r.traffic_kind.clone(),
            r.hurst.to_string(),
            r.cycles.to_string(),
        ];
        w.write_record(head.iter().chain(param_fields(&r.params).iter()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: serde::Serialize>(
    rows: &[T],
    mut writer: W,
) -> Result<(), ExperimentError> {
    serde_json::to_writer_pretty(&mut writer, rows)?;
    writeln!(writer)?;
    Ok(())
}

//! Sweep execution: one independent job per sweep point.

use serde::Serialize;

use super::config::{ExperimentConfig, SweepParam, TrafficKind};
use super::ExperimentError;
use crate::markov::{analyze, packet_rate};
use crate::model::{ChassisConfig, SleepPolicy, GIGA};
use crate::parallel::{map_ordered, Execution};
use crate::sim::simulate;
use crate::traffic::{
    estimate_hurst, poisson_trace_with, self_similar_trace, PacketSizing, TrafficTrace, MIN_CYCLES,
};

/// Parameters in force at one sweep point, echoed into every output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointParams {
    pub line_cards: u32,
    pub downstream_capacity_gbps: f64,
    pub upstream_capacity_gbps: f64,
    pub cycle_ms: f64,
    pub listen_down: u32,
    pub listen_up: u32,
    pub lambda_gbps: f64,
    pub packet_size_bits: f64,
    pub card_power_w: f64,
    pub switch_power_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticRow {
    pub param: String,
    pub value: f64,
    pub mean_active_cards: f64,
    pub avg_power_w: f64,
    pub energy_saving: f64,
    #[serde(flatten)]
    pub params: PointParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub param: String,
    pub value: f64,
    pub energy_saving: f64,
    pub mean_delay_s: f64,
    pub mean_active_cards: f64,
    pub seed: u64,
    pub hurst_estimate: Option<f64>,
    pub max_delay_s: f64,
    pub reconfig_events: u64,
    pub traffic_kind: String,
    pub hurst: f64,
    pub cycles: u64,
    #[serde(flatten)]
    pub params: PointParams,
}

#[derive(Debug, Clone)]
struct Point {
    param: SweepParam,
    value: f64,
    chassis: ChassisConfig,
    policy: SleepPolicy,
    rate_bps: f64,
}

impl Point {
    fn params(&self) -> PointParams {
        let c = &self.chassis;
        PointParams {
            line_cards: c.line_cards,
            downstream_capacity_gbps: c.downstream_capacity / GIGA,
            upstream_capacity_gbps: c.upstream_capacity / GIGA,
            cycle_ms: c.cycle_length * 1e3,
            listen_down: self.policy.listen_down,
            listen_up: self.policy.listen_up,
            lambda_gbps: self.rate_bps / GIGA,
            packet_size_bits: c.analytic_packet_size,
            card_power_w: c.card_power,
            switch_power_w: c.switch_power,
        }
    }
}

/// Expand the sweep; without one the base config is the single point,
/// labelled as a lambda point.
fn points(config: &ExperimentConfig) -> Vec<Point> {
    let base = Point {
        param: SweepParam::Lambda,
        value: config.traffic.rate_bps / GIGA,
        chassis: config.chassis.clone(),
        policy: config.policy,
        rate_bps: config.traffic.rate_bps,
    };
    let Some(sweep) = &config.sweep else {
        return vec![base];
    };
    sweep
        .values
        .iter()
        .map(|&v| {
            let mut p = base.clone();
            p.param = sweep.parameter;
            p.value = v;
            match sweep.parameter {
                SweepParam::Lambda => p.rate_bps = v * GIGA,
                SweepParam::M => p.policy.listen_down = v as u32,
                SweepParam::N => p.policy.listen_up = v as u32,
                SweepParam::Load => {
                    p.rate_bps = v * f64::from(p.chassis.line_cards) * p.chassis.downstream_capacity
                }
            }
            p
        })
        .collect()
}

pub fn run_analytic(config: &ExperimentConfig) -> Result<Vec<AnalyticRow>, ExperimentError> {
    run_analytic_with(config, Execution::Parallel)
}

pub fn run_analytic_with(
    config: &ExperimentConfig,
    exec: Execution,
) -> Result<Vec<AnalyticRow>, ExperimentError> {
    let pts = points(config);
    map_ordered(&pts, exec, |p| {
        let lambda = packet_rate(p.rate_bps, &p.chassis);
        let s = analyze(&p.chassis, &p.policy, lambda)?;
        Ok(AnalyticRow {
            param: p.param.as_str().to_string(),
            value: p.value,
            mean_active_cards: s.mean_active_cards,
            avg_power_w: s.avg_power_w,
            energy_saving: s.energy_saving,
            params: p.params(),
        })
    })
    .into_iter()
    .collect()
}

/// Trace for one point. Poisson traces use the analytic packet size so the
/// simulation is directly comparable with the chain.
pub fn build_trace(
    config: &ExperimentConfig,
    chassis: &ChassisConfig,
    rate_bps: f64,
) -> Result<TrafficTrace, ExperimentError> {
    let t = &config.traffic;
    match t.kind {
        TrafficKind::Poisson => {
            let bytes = (chassis.analytic_packet_size / 8.0) as u32;
            Ok(poisson_trace_with(
                packet_rate(rate_bps, chassis),
                t.cycles,
                chassis.cycle_length,
                t.seed,
                PacketSizing::Fixed(bytes),
                false,
            ))
        }
        TrafficKind::SelfSimilar => Ok(self_similar_trace(
            rate_bps,
            t.hurst,
            t.cycles,
            chassis.cycle_length,
            t.seed,
        )?),
    }
}

pub fn run_simulation(config: &ExperimentConfig) -> Result<Vec<SimRow>, ExperimentError> {
    run_simulation_with(config, Execution::Parallel)
}

pub fn run_simulation_with(
    config: &ExperimentConfig,
    exec: Execution,
) -> Result<Vec<SimRow>, ExperimentError> {
    let pts = points(config);
    let t = &config.traffic;
    map_ordered(&pts, exec, |p| {
        let trace = build_trace(config, &p.chassis, p.rate_bps)?;
        let hurst_estimate = (t.kind == TrafficKind::SelfSimilar && trace.len() >= MIN_CYCLES)
            .then(|| estimate_hurst(&trace).ok())
            .flatten();
        let r = simulate(&p.chassis, &p.policy, &trace)?;
        Ok(SimRow {
            param: p.param.as_str().to_string(),
            value: p.value,
            energy_saving: r.energy_saving,
            mean_delay_s: r.mean_delay,
            mean_active_cards: r.mean_active_cards,
            seed: t.seed,
            hurst_estimate,
            max_delay_s: r.max_delay,
            reconfig_events: r.reconfig_events,
            traffic_kind: t.kind.as_str().to_string(),
            hurst: t.hurst,
            cycles: r.cycles,
            params: p.params(),
        })
    })
    .into_iter()
    .collect()
}

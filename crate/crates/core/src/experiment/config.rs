//! Experiment configuration: a TOML file, flag overrides on top of it, and
//! resolution into validated domain types.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fabric::{PonType, SwitchFabric, Topology};
use crate::model::{ChassisConfig, SleepPolicy, GIGA};
use crate::traffic::MIN_CYCLES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Note,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(field: &str, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            field: Some(field.to_string()),
            message: message.into(),
        }
    }

    pub fn warning(field: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            field: field.map(str::to_string),
            message: message.into(),
        }
    }

    pub fn note(field: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Note,
            field: field.map(str::to_string),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Note => "note",
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match &self.field {
            Some(field) => write!(f, "{tag}: {field}: {}", self.message),
            None => write!(f, "{tag}: {}", self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrafficKind {
    Poisson,
    SelfSimilar,
}

impl TrafficKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TrafficKind::Poisson => "poisson",
            TrafficKind::SelfSimilar => "self-similar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "lambda")]
    Lambda,
    M,
    N,
    #[serde(rename = "load")]
    Load,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Lambda => "lambda",
            SweepParam::M => "M",
            SweepParam::N => "N",
            SweepParam::Load => "load",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lambda" => Some(SweepParam::Lambda),
            "M" | "m" | "listen_down" => Some(SweepParam::M),
            "N" | "n" | "listen_up" => Some(SweepParam::N),
            "load" => Some(SweepParam::Load),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

// ---- raw file layout -------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChassis {
    pub line_cards: Option<u32>,
    /// Both directions, unless a per-direction value is given.
    pub capacity_gbps: Option<f64>,
    pub upstream_capacity_gbps: Option<f64>,
    pub downstream_capacity_gbps: Option<f64>,
    pub cycle_ms: Option<f64>,
    pub onus_per_segment: Option<Vec<u32>>,
    pub card_power_w: Option<f64>,
    pub electrical_part_power_w: Option<f64>,
    pub packet_size_bits: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPolicy {
    pub listen_down: Option<i64>,
    pub listen_up: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFabric {
    pub topology: Option<Topology>,
    pub ports: Option<u32>,
    pub per_element_power_w: Option<f64>,
    pub reconfig_time_ms: Option<f64>,
    pub pon: Option<PonType>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTraffic {
    pub kind: Option<TrafficKind>,
    /// Offered downstream rate; the mean rate for self-similar traffic.
    #[serde(alias = "mean_rate_gbps")]
    pub lambda_gbps: Option<f64>,
    pub hurst: Option<f64>,
    pub cycles: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub parameter: Option<String>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub format: Option<OutputFormat>,
    pub path: Option<String>,
}

/// The config file as written; every field optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub chassis: RawChassis,
    #[serde(default)]
    pub policy: RawPolicy,
    #[serde(default)]
    pub fabric: RawFabric,
    #[serde(default)]
    pub traffic: RawTraffic,
    pub sweep: Option<RawSweep>,
    #[serde(default)]
    pub output: RawOutput,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self, Diagnostic> {
        toml::from_str(text).map_err(|e| Diagnostic::error("config", e.to_string()))
    }
}

/// Command-line overrides; `Some` beats the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub line_cards: Option<u32>,
    pub capacity_gbps: Option<f64>,
    pub cycle_ms: Option<f64>,
    pub listen_down: Option<i64>,
    pub listen_up: Option<i64>,
    pub kind: Option<TrafficKind>,
    pub lambda_gbps: Option<f64>,
    pub hurst: Option<f64>,
    pub cycles: Option<usize>,
    pub seed: Option<u64>,
    /// `param=v1,v2,...`
    pub sweep: Option<String>,
    pub output: Option<String>,
    pub format: Option<OutputFormat>,
}

impl RawConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<(), Diagnostic> {
        fn set<T: Clone>(slot: &mut Option<T>, v: &Option<T>) {
            if v.is_some() {
                slot.clone_from(v);
            }
        }
        set(&mut self.chassis.line_cards, &o.line_cards);
        if o.capacity_gbps.is_some() {
            self.chassis.capacity_gbps = o.capacity_gbps;
            self.chassis.upstream_capacity_gbps = None;
            self.chassis.downstream_capacity_gbps = None;
        }
        set(&mut self.chassis.cycle_ms, &o.cycle_ms);
        set(&mut self.policy.listen_down, &o.listen_down);
        set(&mut self.policy.listen_up, &o.listen_up);
        set(&mut self.traffic.kind, &o.kind);
        set(&mut self.traffic.lambda_gbps, &o.lambda_gbps);
        set(&mut self.traffic.hurst, &o.hurst);
        set(&mut self.traffic.cycles, &o.cycles);
        set(&mut self.traffic.seed, &o.seed);
        set(&mut self.output.path, &o.output);
        set(&mut self.output.format, &o.format);
        if let Some(flag) = &o.sweep {
            self.sweep = Some(parse_sweep_flag(flag)?);
        }
        Ok(())
    }
}

/// Parse `lambda=5,10,20` into a raw sweep.
pub fn parse_sweep_flag(flag: &str) -> Result<RawSweep, Diagnostic> {
    let (name, list) = flag.split_once('=').ok_or_else(|| {
        Diagnostic::error("sweep", format!("expected PARAM=V1,V2,..., got {flag:?}"))
    })?;
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Diagnostic::error("sweep.values", format!("not a number: {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RawSweep {
        parameter: Some(name.trim().to_string()),
        values: Some(values),
    })
}

// ---- resolved config -------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrafficSpec {
    pub kind: TrafficKind,
    /// Offered downstream rate in bits/second.
    pub rate_bps: f64,
    pub hurst: f64,
    pub cycles: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub format: OutputFormat,
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub chassis: ChassisConfig,
    pub policy: SleepPolicy,
    pub fabric: SwitchFabric,
    pub pon: Option<PonType>,
    pub traffic: TrafficSpec,
    pub sweep: Option<Sweep>,
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        RawConfig::default().resolve().expect("defaults resolve")
    }
}

pub const DEFAULT_LAMBDA_GBPS: f64 = 20.0;
pub const DEFAULT_HURST: f64 = 0.8;
pub const DEFAULT_CYCLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 1;
/// Opto-mechanical switching time.
pub const DEFAULT_RECONFIG_MS: f64 = 5.0;

fn positive(field: &str, v: f64, errs: &mut Vec<Diagnostic>) {
    if !(v.is_finite() && v > 0.0) {
        errs.push(Diagnostic::error(
            field,
            format!("must be positive, got {v}"),
        ));
    }
}

fn window(field: &str, v: i64, errs: &mut Vec<Diagnostic>) -> u32 {
    match u32::try_from(v) {
        Ok(w) if w >= 1 => w,
        _ => {
            errs.push(Diagnostic::error(
                field,
                format!("must be an integer >= 1, got {v}"),
            ));
            1
        }
    }
}

impl RawConfig {
    /// Resolve defaults and check every field; all field errors are reported
    /// together.
    pub fn resolve(&self) -> Result<ExperimentConfig, Vec<Diagnostic>> {
        let mut errs = Vec::new();
        let c = &self.chassis;

        let line_cards = c.line_cards.unwrap_or(4);
        if line_cards == 0 {
            errs.push(Diagnostic::error("chassis.line_cards", "must be >= 1"));
        }
        let both = c.capacity_gbps.unwrap_or(10.0);
        let up = c.upstream_capacity_gbps.unwrap_or(both);
        let down = c.downstream_capacity_gbps.unwrap_or(both);
        positive("chassis.upstream_capacity_gbps", up, &mut errs);
        positive("chassis.downstream_capacity_gbps", down, &mut errs);
        let cycle_ms = c.cycle_ms.unwrap_or(2.0);
        positive("chassis.cycle_ms", cycle_ms, &mut errs);
        let onus = c
            .onus_per_segment
            .clone()
            .unwrap_or_else(|| vec![32; line_cards as usize]);
        if onus.len() != line_cards as usize {
            errs.push(Diagnostic::error(
                "chassis.onus_per_segment",
                format!(
                    "has {} entries, expected line_cards = {line_cards}",
                    onus.len()
                ),
            ));
        } else if onus.contains(&0) {
            errs.push(Diagnostic::error(
                "chassis.onus_per_segment",
                "every segment needs an ONU",
            ));
        }
        let card_power = c.card_power_w.unwrap_or(5.0);
        if !(card_power.is_finite() && card_power >= 0.0) {
            errs.push(Diagnostic::error(
                "chassis.card_power_w",
                format!("must be >= 0, got {card_power}"),
            ));
        }
        let electrical = c.electrical_part_power_w.unwrap_or(card_power);
        if !(electrical >= 0.0 && electrical <= card_power) {
            errs.push(Diagnostic::error(
                "chassis.electrical_part_power_w",
                format!("must lie in [0, card_power_w = {card_power}], got {electrical}"),
            ));
        }
        let packet_size = c.packet_size_bits.unwrap_or(1e4);
        positive("chassis.packet_size_bits", packet_size, &mut errs);
        if packet_size.is_finite() && packet_size > 0.0 && packet_size % 8.0 != 0.0 {
            errs.push(Diagnostic::error(
                "chassis.packet_size_bits",
                format!("must be a whole number of bytes, got {packet_size} bits"),
            ));
        }

        let listen_down = window(
            "policy.listen_down",
            self.policy.listen_down.unwrap_or(2),
            &mut errs,
        );
        let listen_up = window(
            "policy.listen_up",
            self.policy.listen_up.unwrap_or(2),
            &mut errs,
        );

        let f = &self.fabric;
        let topology = f.topology.unwrap_or(Topology::SingleNxN);
        let fabric = SwitchFabric {
            topology,
            ports: f.ports.unwrap_or(line_cards),
            per_element_power: f.per_element_power_w.unwrap_or(0.0),
            reconfig_time: f.reconfig_time_ms.unwrap_or(DEFAULT_RECONFIG_MS) / 1e3,
        };
        if let Err(e) = fabric.validate() {
            errs.push(Diagnostic::error("fabric", e.to_string()));
        }
        if fabric.ports != line_cards {
            errs.push(Diagnostic::error(
                "fabric.ports",
                format!("{} ports for {line_cards} line cards", fabric.ports),
            ));
        }

        let t = &self.traffic;
        let lambda_gbps = t.lambda_gbps.unwrap_or(DEFAULT_LAMBDA_GBPS);
        if !(lambda_gbps.is_finite() && lambda_gbps >= 0.0) {
            errs.push(Diagnostic::error(
                "traffic.lambda_gbps",
                format!("must be >= 0, got {lambda_gbps}"),
            ));
        }
        let kind = t.kind.unwrap_or(TrafficKind::Poisson);
        let hurst = t.hurst.unwrap_or(DEFAULT_HURST);
        if kind == TrafficKind::SelfSimilar && !(hurst > 0.5 && hurst < 1.0) {
            errs.push(Diagnostic::error(
                "traffic.hurst",
                format!("must lie in (0.5, 1), got {hurst}"),
            ));
        }
        let cycles = t.cycles.unwrap_or(DEFAULT_CYCLES);
        if cycles == 0 {
            errs.push(Diagnostic::error("traffic.cycles", "must be >= 1"));
        }

        let sweep = self
            .sweep
            .as_ref()
            .and_then(|s| resolve_sweep(s, &mut errs));

        if !errs.is_empty() {
            return Err(errs);
        }
        let chassis = ChassisConfig {
            line_cards,
            upstream_capacity: up * GIGA,
            downstream_capacity: down * GIGA,
            cycle_length: cycle_ms / 1e3,
            onus_per_segment: onus,
            card_power,
            switch_power: fabric.total_power(),
            electrical_part_power: electrical,
            analytic_packet_size: packet_size,
        };
        Ok(ExperimentConfig {
            chassis,
            policy: SleepPolicy {
                listen_down,
                listen_up,
            },
            fabric,
            pon: f.pon,
            traffic: TrafficSpec {
                kind,
                rate_bps: lambda_gbps * GIGA,
                hurst,
                cycles,
                seed: t.seed.unwrap_or(DEFAULT_SEED),
            },
            sweep,
            output: OutputSpec {
                format: self.output.format.unwrap_or(OutputFormat::Csv),
                path: self.output.path.clone(),
            },
        })
    }
}

fn resolve_sweep(raw: &RawSweep, errs: &mut Vec<Diagnostic>) -> Option<Sweep> {
    let Some(name) = raw.parameter.as_deref() else {
        errs.push(Diagnostic::error(
            "sweep.parameter",
            "missing (one of lambda, M, N, load)",
        ));
        return None;
    };
    let Some(parameter) = SweepParam::parse(name) else {
        errs.push(Diagnostic::error(
            "sweep.parameter",
            format!("unknown parameter {name:?} (expected lambda, M, N or load)"),
        ));
        return None;
    };
    let values = raw.values.clone().unwrap_or_default();
    if values.is_empty() {
        errs.push(Diagnostic::error("sweep.values", "sweep list is empty"));
        return None;
    }
    let before = errs.len();
    for &v in &values {
        let ok = match parameter {
            SweepParam::Lambda => v.is_finite() && v >= 0.0,
            SweepParam::M | SweepParam::N => {
                v >= 1.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX)
            }
            SweepParam::Load => (0.0..=1.0).contains(&v),
        };
        if !ok {
            let want = match parameter {
                SweepParam::Lambda => "a non-negative rate in Gb/s",
                SweepParam::M | SweepParam::N => "an integer >= 1",
                SweepParam::Load => "a fraction in [0, 1]",
            };
            errs.push(Diagnostic::error(
                "sweep.values",
                format!(
                    "{v} is not valid for {}: expected {want}",
                    parameter.as_str()
                ),
            ));
        }
    }
    (errs.len() == before).then_some(Sweep { parameter, values })
}

/// Full check of a raw config: field errors, then switch-power viability,
/// reconfiguration compliance and traffic sanity notes.
pub fn validate(raw: &RawConfig) -> Vec<Diagnostic> {
    let cfg = match raw.resolve() {
        Ok(cfg) => cfg,
        Err(errs) => return errs,
    };
    let mut out = Vec::new();
    let ch = &cfg.chassis;

    let threshold = crate::model::break_even_active_cards(ch);
    if ch.switch_power > 0.0 {
        if threshold <= 1.0 {
            out.push(Diagnostic::warning(
                Some("fabric.per_element_power_w"),
                format!(
                    "switch power {} W exceeds what sleeping cards can save; no configuration is viable",
                    ch.switch_power
                ),
            ));
        } else {
            out.push(Diagnostic::note(
                Some("fabric.per_element_power_w"),
                format!("mean active cards must stay below {threshold} for the switch to pay off"),
            ));
        }
    }

    for pon in [PonType::Epon, PonType::Gpon] {
        let ok = crate::fabric::reconfig_compliant(&cfg.fabric, pon);
        let name = match pon {
            PonType::Epon => "EPON",
            PonType::Gpon => "GPON",
        };
        let ms = cfg.fabric.reconfig_time * 1e3;
        let limit = pon.max_reconfig_time() * 1e3;
        if ok {
            out.push(Diagnostic::note(
                Some("fabric.reconfig_time_ms"),
                format!("{ms} ms reconfiguration is compliant with {name} (limit {limit} ms)"),
            ));
        } else {
            let msg = format!("{ms} ms reconfiguration exceeds the {name} limit of {limit} ms; ONU service may be disrupted");
            if cfg.pon.is_none() || cfg.pon == Some(pon) {
                out.push(Diagnostic::warning(Some("fabric.reconfig_time_ms"), msg));
            } else {
                out.push(Diagnostic::note(Some("fabric.reconfig_time_ms"), msg));
            }
        }
    }

    if cfg.traffic.kind == TrafficKind::SelfSimilar && cfg.traffic.cycles < MIN_CYCLES {
        out.push(Diagnostic::warning(
            Some("traffic.cycles"),
            format!(
                "{} cycles is too short to estimate the Hurst parameter (need {MIN_CYCLES})",
                cfg.traffic.cycles
            ),
        ));
    }
    let full = ch.downstream_capacity * f64::from(ch.line_cards);
    if cfg.traffic.rate_bps > full {
        out.push(Diagnostic::warning(
            Some("traffic.lambda_gbps"),
            format!(
                "offered {} Gb/s exceeds chassis capacity {} Gb/s; backlog will grow without bound",
                cfg.traffic.rate_bps / GIGA,
                full / GIGA
            ),
        ));
    }
    out
}

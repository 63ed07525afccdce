//! Chassis parameters and the closed-form saving formulas shared by the
//! analytic model, the simulator and the switch fabric.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Decimal giga, used for every Gb/s figure at the interface.
pub const GIGA: f64 = 1e9;

/// Relative slack used when checking per-segment capacity sums, so that a
/// segment loaded exactly to capacity is not rejected because of rounding.
const CAPACITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid chassis configuration: {0}")]
    InvalidConfig(String),
    #[error("segment {segment}: {direction} sum {sum} b/s exceeds card capacity {capacity} b/s")]
    SegmentOverCapacity {
        segment: usize,
        direction: &'static str,
        sum: f64,
        capacity: f64,
    },
    #[error("invalid traffic snapshot: {0}")]
    InvalidSnapshot(String),
    #[error("active card count {active} outside [1, {line_cards}]")]
    ActiveOutOfRange { active: f64, line_cards: u32 },
    #[error("empty active-card series")]
    EmptySeries,
    #[error("non-positive duration {0} in active-card series")]
    NonPositiveDuration(f64),
}

/// Static description of an OLT chassis.
///
/// Rates are in bits/second, powers in watts, times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChassisConfig {
    pub line_cards: u32,
    pub upstream_capacity: f64,
    pub downstream_capacity: f64,
    pub cycle_length: f64,
    pub onus_per_segment: Vec<u32>,
    pub card_power: f64,
    /// Total power drawn by the switch fabric.
    pub switch_power: f64,
    pub electrical_part_power: f64,
    /// Fixed packet size in bits used by the analytic model.
    pub analytic_packet_size: f64,
}

impl Default for ChassisConfig {
    /// Four 10 Gb/s cards, 2 ms cycles, 5 W per card, no switch power.
    fn default() -> Self {
        Self {
            line_cards: 4,
            upstream_capacity: 10.0 * GIGA,
            downstream_capacity: 10.0 * GIGA,
            cycle_length: 2e-3,
            onus_per_segment: vec![32; 4],
            card_power: 5.0,
            switch_power: 0.0,
            electrical_part_power: 5.0,
            analytic_packet_size: 1e4,
        }
    }
}

impl ChassisConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if self.line_cards < 1 {
            return bad("line_cards must be >= 1".into());
        }
        for (name, v) in [
            ("upstream_capacity", self.upstream_capacity),
            ("downstream_capacity", self.downstream_capacity),
            ("cycle_length", self.cycle_length),
            ("analytic_packet_size", self.analytic_packet_size),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.switch_power.is_finite() && self.switch_power >= 0.0) {
            return bad(format!(
                "switch_power must be >= 0, got {}",
                self.switch_power
            ));
        }
        if !(self.card_power.is_finite() && self.card_power >= 0.0) {
            return bad(format!("card_power must be >= 0, got {}", self.card_power));
        }
        if !(self.electrical_part_power >= 0.0 && self.electrical_part_power <= self.card_power) {
            return bad(format!(
                "electrical_part_power must lie in [0, card_power={}], got {}",
                self.card_power, self.electrical_part_power
            ));
        }
        if self.onus_per_segment.len() != self.line_cards as usize {
            return bad(format!(
                "onus_per_segment has {} entries, expected line_cards={}",
                self.onus_per_segment.len(),
                self.line_cards
            ));
        }
        if self.onus_per_segment.contains(&0) {
            return bad("every segment needs at least one ONU".into());
        }
        Ok(())
    }

    /// Downstream bits one card can carry in one scheduling cycle.
    pub fn card_bits_per_cycle(&self) -> f64 {
        self.downstream_capacity * self.cycle_length
    }

    /// Fraction of total downstream chassis capacity used by `bits` offered
    /// in a single cycle. Every load classification goes through this.
    pub fn cycle_load_fraction(&self, bits: f64) -> f64 {
        bits / (self.card_bits_per_cycle() * f64::from(self.line_cards))
    }

    fn check_active(&self, active: f64) -> Result<(), ModelError> {
        if active.is_nan() || active < 1.0 || active > f64::from(self.line_cards) {
            return Err(ModelError::ActiveOutOfRange {
                active,
                line_cards: self.line_cards,
            });
        }
        Ok(())
    }
}

/// Observation period split into the decrease (`M`) and increase (`N`)
/// listening windows, both counted in scheduling cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SleepPolicy {
    pub listen_down: u32,
    pub listen_up: u32,
}

impl Default for SleepPolicy {
    fn default() -> Self {
        Self {
            listen_down: 2,
            listen_up: 2,
        }
    }
}

impl SleepPolicy {
    pub fn new(listen_down: u32, listen_up: u32) -> Result<Self, ModelError> {
        let p = Self {
            listen_down,
            listen_up,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.listen_down < 1 || self.listen_up < 1 {
            return Err(ModelError::InvalidConfig(format!(
                "listen windows must be >= 1 (M={}, N={})",
                self.listen_down, self.listen_up
            )));
        }
        Ok(())
    }
}

/// Per-ONU rates at one instant. `upstream[j][i]` is ONU `i` of segment `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficSnapshot {
    pub upstream: Vec<Vec<f64>>,
    pub downstream: Vec<Vec<f64>>,
    pub time: f64,
}

impl TrafficSnapshot {
    /// Snapshot with every ONU of every segment idle.
    pub fn idle(config: &ChassisConfig, time: f64) -> Self {
        let zeros: Vec<Vec<f64>> = config
            .onus_per_segment
            .iter()
            .map(|&n| vec![0.0; n as usize])
            .collect();
        Self {
            upstream: zeros.clone(),
            downstream: zeros,
            time,
        }
    }

    /// Snapshot with a given aggregate per segment, spread evenly over its ONUs.
    pub fn from_segment_totals(
        config: &ChassisConfig,
        upstream: &[f64],
        downstream: &[f64],
        time: f64,
    ) -> Self {
        let spread = |totals: &[f64]| {
            config
                .onus_per_segment
                .iter()
                .zip(totals)
                .map(|(&n, &t)| vec![t / f64::from(n); n as usize])
                .collect()
        };
        Self {
            upstream: spread(upstream),
            downstream: spread(downstream),
            time,
        }
    }

    pub fn total_upstream(&self) -> f64 {
        self.upstream.iter().flatten().sum()
    }

    pub fn total_downstream(&self) -> f64 {
        self.downstream.iter().flatten().sum()
    }

    pub fn validate(&self, config: &ChassisConfig) -> Result<(), ModelError> {
        let l = config.line_cards as usize;
        if self.upstream.len() != l || self.downstream.len() != l {
            return Err(ModelError::InvalidSnapshot(format!(
                "expected {l} segments, got {} upstream / {} downstream",
                self.upstream.len(),
                self.downstream.len()
            )));
        }
        for (direction, rates, capacity) in [
            ("upstream", &self.upstream, config.upstream_capacity),
            ("downstream", &self.downstream, config.downstream_capacity),
        ] {
            for (segment, onus) in rates.iter().enumerate() {
                let expected = config.onus_per_segment[segment] as usize;
                if onus.len() != expected {
                    return Err(ModelError::InvalidSnapshot(format!(
                        "segment {segment} has {} {direction} ONU rates, expected {expected}",
                        onus.len()
                    )));
                }
                if let Some(r) = onus.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
                    return Err(ModelError::InvalidSnapshot(format!(
                        "negative or non-finite {direction} rate {r} in segment {segment}"
                    )));
                }
                let sum: f64 = onus.iter().sum();
                if sum > capacity * (1.0 + CAPACITY_SLACK) {
                    return Err(ModelError::SegmentOverCapacity {
                        segment,
                        direction,
                        sum,
                        capacity,
                    });
                }
            }
        }
        Ok(())
    }
}

/// `ceil(x)` that ignores floating noise just above an integer.
pub(crate) fn ceil_tolerant(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// Smallest number of cards that carries the snapshot, clamped to `[1, L]`.
pub fn required_line_cards(
    snapshot: &TrafficSnapshot,
    config: &ChassisConfig,
) -> Result<u32, ModelError> {
    snapshot.validate(config)?;
    let up = ceil_tolerant(snapshot.total_upstream() / config.upstream_capacity);
    let down = ceil_tolerant(snapshot.total_downstream() / config.downstream_capacity);
    let needed = up.max(down).max(1.0);
    Ok((needed as u32).min(config.line_cards))
}

/// Maximum of upstream and downstream chassis utilization.
pub fn chassis_load(snapshot: &TrafficSnapshot, config: &ChassisConfig) -> Result<f64, ModelError> {
    snapshot.validate(config)?;
    let l = f64::from(config.line_cards);
    let up = snapshot.total_upstream() / (config.upstream_capacity * l);
    let down = snapshot.total_downstream() / (config.downstream_capacity * l);
    Ok(up.max(down).min(1.0))
}

/// Instantaneous saving `1 - l/L` against a chassis with every card on.
pub fn relative_saving(active: u32, config: &ChassisConfig) -> Result<f64, ModelError> {
    config.check_active(f64::from(active))?;
    Ok(1.0 - f64::from(active) / f64::from(config.line_cards))
}

/// Duration-weighted mean of `1 - l/L` over `(l, duration)` pairs.
pub fn average_saving(series: &[(u32, f64)], config: &ChassisConfig) -> Result<f64, ModelError> {
    if series.is_empty() {
        return Err(ModelError::EmptySeries);
    }
    let mut weighted = 0.0;
    let mut total = 0.0;
    for &(active, duration) in series {
        if !(duration > 0.0) {
            return Err(ModelError::NonPositiveDuration(duration));
        }
        weighted += relative_saving(active, config)? * duration;
        total += duration;
    }
    Ok(weighted / total)
}

/// Saving once the fabric's power is charged against the cards that sleep.
/// Negative when the switch costs more than it saves.
pub fn saving_with_switch_power(
    mean_active: f64,
    config: &ChassisConfig,
) -> Result<f64, ModelError> {
    config.check_active(mean_active)?;
    let full = config.card_power * f64::from(config.line_cards);
    Ok(1.0 - (config.card_power * mean_active + config.switch_power) / full)
}

/// Mean active-card count at which the switch exactly pays for itself:
/// `L - p_s / p_l`. Savings are positive strictly below it.
pub fn break_even_active_cards(config: &ChassisConfig) -> f64 {
    f64::from(config.line_cards) - config.switch_power / config.card_power
}

/// Whether `p_s < (L - mean_l) * p_l`, i.e. the switch leaves a net saving.
pub fn switch_power_viable(config: &ChassisConfig, mean_active: f64) -> bool {
    if config.card_power == 0.0 {
        return false;
    }
    mean_active < break_even_active_cards(config)
}

/// Saving with an electrical switch, where only the electrical part of a
/// card can be powered down.
pub fn electrical_saving(active: u32, config: &ChassisConfig) -> Result<f64, ModelError> {
    config.check_active(f64::from(active))?;
    Ok(1.0
        - f64::from(active) * config.electrical_part_power
            / (f64::from(config.line_cards) * config.card_power))
}

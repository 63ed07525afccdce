//! Switch fabric between PON segments and line cards: a single N×N switch
//! or a tree of cascaded 2×2 elements, with power and reconfiguration-time
//! checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ceil_tolerant;

/// EPON ONUs tolerate a reconfiguration gap up to one 50 ms GATE interval.
pub const EPON_MAX_RECONFIG: f64 = 50e-3;
/// GPON ONUs tolerate at most one 125 µs frame.
pub const GPON_MAX_RECONFIG: f64 = 125e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FabricError {
    #[error("cascaded fabric needs a power-of-two port count >= 2, got {0}")]
    PortsNotPowerOfTwo(u32),
    #[error("fabric needs at least one port")]
    NoPorts,
    #[error("load {0} outside (0, 1]")]
    LoadOutOfRange(f64),
    #[error("invalid fabric parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    #[serde(rename = "single-nxn")]
    SingleNxN,
    #[serde(rename = "cascaded-2x2")]
    Cascaded2x2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PonType {
    Epon,
    Gpon,
}

impl PonType {
    pub fn max_reconfig_time(self) -> f64 {
        match self {
            PonType::Epon => EPON_MAX_RECONFIG,
            PonType::Gpon => GPON_MAX_RECONFIG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchFabric {
    pub topology: Topology,
    pub ports: u32,
    pub per_element_power: f64,
    /// Seconds.
    pub reconfig_time: f64,
}

impl SwitchFabric {
    pub fn new(
        topology: Topology,
        ports: u32,
        per_element_power: f64,
        reconfig_time: f64,
    ) -> Result<Self, FabricError> {
        let f = Self {
            topology,
            ports,
            per_element_power,
            reconfig_time,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), FabricError> {
        if self.ports == 0 {
            return Err(FabricError::NoPorts);
        }
        if self.topology == Topology::Cascaded2x2
            && (self.ports < 2 || !self.ports.is_power_of_two())
        {
            return Err(FabricError::PortsNotPowerOfTwo(self.ports));
        }
        if !(self.per_element_power.is_finite() && self.per_element_power >= 0.0) {
            return Err(FabricError::InvalidParameter(format!(
                "per_element_power {}",
                self.per_element_power
            )));
        }
        if !(self.reconfig_time.is_finite() && self.reconfig_time > 0.0) {
            return Err(FabricError::InvalidParameter(format!(
                "reconfig_time {}",
                self.reconfig_time
            )));
        }
        Ok(())
    }

    pub fn element_count(&self) -> u32 {
        match self.topology {
            Topology::SingleNxN => 1,
            Topology::Cascaded2x2 => self.ports - 1,
        }
    }

    pub fn stage_count(&self) -> u32 {
        match self.topology {
            Topology::SingleNxN => 1,
            Topology::Cascaded2x2 => self.ports.trailing_zeros(),
        }
    }

    /// Elements in stage `k` (1-based): `2^(k-1)` for a cascaded fabric.
    pub fn stage_elements(&self, stage: u32) -> u32 {
        match self.topology {
            Topology::SingleNxN => u32::from(stage == 1),
            Topology::Cascaded2x2 if (1..=self.stage_count()).contains(&stage) => 1 << (stage - 1),
            Topology::Cascaded2x2 => 0,
        }
    }

    /// Total fabric power, charged as the chassis switch power.
    pub fn total_power(&self) -> f64 {
        f64::from(self.element_count()) * self.per_element_power
    }
}

/// Whether reconfiguring `fabric` stays inside the PON's service tolerance.
pub fn reconfig_compliant(fabric: &SwitchFabric, pon: PonType) -> bool {
    fabric.reconfig_time <= pon.max_reconfig_time()
}

/// Which powered card serves each PON segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentMapping {
    pub assignment: Vec<u32>,
    pub active_cards: u32,
}

impl SegmentMapping {
    /// Segments carried by each active card.
    pub fn segments_per_card(&self) -> Vec<u32> {
        let mut counts = vec![0; self.active_cards as usize];
        for &c in &self.assignment {
            counts[c as usize] += 1;
        }
        counts
    }

    /// Per-card utilization when every segment offers `load` of one card.
    pub fn card_loads(&self, load: f64) -> Vec<f64> {
        self.segments_per_card()
            .into_iter()
            .map(|n| f64::from(n) * load)
            .collect()
    }

    pub fn saving(&self) -> f64 {
        1.0 - f64::from(self.active_cards) / self.assignment.len() as f64
    }
}

/// N×N switch: `max(1, ceil(load * L))` cards, segments dealt round-robin.
/// Loads exactly at `x/L` map to `x` cards.
pub fn nxn_mapping(load: f64, line_cards: u32) -> Result<SegmentMapping, FabricError> {
    if !(0.0..=1.0).contains(&load) {
        return Err(FabricError::LoadOutOfRange(load));
    }
    if line_cards == 0 {
        return Err(FabricError::NoPorts);
    }
    let active = (ceil_tolerant(load * f64::from(line_cards)) as u32).clamp(1, line_cards);
    Ok(SegmentMapping {
        assignment: (0..line_cards).map(|s| s % active).collect(),
        active_cards: active,
    })
}

/// Largest `k` with `load <= 1/2^k`, i.e. `floor(log2(1/load))`, capped so at
/// least one card of `line_cards` stays on.
fn cascade_level(load: f64, line_cards: u32) -> Result<u32, FabricError> {
    if !(load > 0.0 && load <= 1.0) {
        return Err(FabricError::LoadOutOfRange(load));
    }
    let max_k = line_cards.max(1).ilog2();
    let mut k = 0;
    while k < max_k && load * f64::from(1u32 << (k + 1)) <= 1.0 {
        k += 1;
    }
    Ok(k)
}

/// Cascaded 2×2 fabric: blocks of `2^k` adjacent segments share one card.
pub fn cascaded_mapping(load: f64, line_cards: u32) -> Result<SegmentMapping, FabricError> {
    if line_cards < 2 || !line_cards.is_power_of_two() {
        return Err(FabricError::PortsNotPowerOfTwo(line_cards));
    }
    let k = cascade_level(load, line_cards)?;
    Ok(SegmentMapping {
        assignment: (0..line_cards).map(|s| s >> k).collect(),
        active_cards: line_cards >> k,
    })
}

/// `1 - 1/2^floor(log2(1/load))`, with the powered fraction floored at `1/L`.
pub fn cascaded_saving(load: f64, line_cards: u32) -> Result<f64, FabricError> {
    let k = cascade_level(load, line_cards)?;
    Ok(1.0 - 1.0 / f64::from(1u32 << k))
}

/// Powered-card fraction `1/2^k` of a cascaded fabric at `load`.
pub fn cascaded_active_fraction(load: f64, line_cards: u32) -> Result<f64, FabricError> {
    cascaded_saving(load, line_cards).map(|s| 1.0 - s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cascaded_counts() {
        for (p, stages) in [(2, 1), (4, 2), (8, 3), (16, 4)] {
            let f = SwitchFabric::new(Topology::Cascaded2x2, p, 0.2, 5e-3).unwrap();
            assert_eq!(f.stage_count(), stages);
            assert_eq!(f.element_count(), p - 1);
            let per_stage: u32 = (1..=stages).map(|k| f.stage_elements(k)).sum();
            assert_eq!(per_stage, p - 1);
            assert!((f.total_power() - 0.2 * f64::from(p - 1)).abs() < 1e-12);
        }
        assert!(SwitchFabric::new(Topology::Cascaded2x2, 6, 0.2, 5e-3).is_err());
        let single = SwitchFabric::new(Topology::SingleNxN, 4, 0.2, 5e-3).unwrap();
        assert_eq!(single.element_count(), 1);
        assert_eq!(single.total_power(), 0.2);
    }

    #[test]
    fn nxn_examples() {
        assert_eq!(nxn_mapping(0.6, 4).unwrap().active_cards, 3);
        assert_eq!(nxn_mapping(0.75, 4).unwrap().active_cards, 3);
        assert_eq!(nxn_mapping(0.5, 4).unwrap().active_cards, 2);
        assert_eq!(nxn_mapping(0.1, 4).unwrap().active_cards, 1);
        assert_eq!(nxn_mapping(0.25, 4).unwrap().active_cards, 1);
        assert_eq!(nxn_mapping(0.0, 4).unwrap().active_cards, 1);
        assert_eq!(nxn_mapping(1.0, 4).unwrap().active_cards, 4);
        assert_eq!(nxn_mapping(0.6, 5).unwrap().active_cards, 3);
        assert_eq!(nxn_mapping(0.6, 4).unwrap().assignment, vec![0, 1, 2, 0]);
        assert!(nxn_mapping(1.2, 4).is_err());
    }

    #[test]
    fn cascaded_examples() {
        let m = cascaded_mapping(0.3, 4).unwrap();
        assert_eq!(m.active_cards, 2);
        assert_eq!(m.assignment, vec![0, 0, 1, 1]);
        assert_eq!(cascaded_saving(0.3, 4).unwrap(), 0.5);
        assert_eq!(cascaded_mapping(0.6, 4).unwrap().active_cards, 4);
        assert_eq!(cascaded_saving(0.6, 4).unwrap(), 0.0);
        assert_eq!(cascaded_mapping(0.2, 4).unwrap().active_cards, 1);
        assert_eq!(cascaded_saving(0.2, 4).unwrap(), 0.75);
        // Capped: one card of four is the floor.
        assert_eq!(cascaded_saving(0.01, 4).unwrap(), 0.75);
        assert_eq!(cascaded_saving(1.0, 4).unwrap(), 0.0);
        assert_eq!(cascaded_mapping(0.5, 4).unwrap().active_cards, 2);
        assert!(matches!(
            cascaded_mapping(0.0, 4),
            Err(FabricError::LoadOutOfRange(_))
        ));
        assert!(cascaded_mapping(0.3, 6).is_err());
    }

    #[test]
    fn compliance() {
        let opto = SwitchFabric::new(Topology::Cascaded2x2, 4, 0.2, 5e-3).unwrap();
        assert!(reconfig_compliant(&opto, PonType::Epon));
        assert!(!reconfig_compliant(&opto, PonType::Gpon));
        let fast = SwitchFabric::new(Topology::SingleNxN, 4, 0.2, 100e-6).unwrap();
        assert!(reconfig_compliant(&fast, PonType::Gpon));
        let edge = SwitchFabric::new(Topology::SingleNxN, 4, 0.2, 0.125 / 1e3).unwrap();
        assert!(reconfig_compliant(&edge, PonType::Gpon));
        let slow = SwitchFabric::new(Topology::SingleNxN, 4, 0.2, 60e-3).unwrap();
        assert!(!reconfig_compliant(&slow, PonType::Epon));
    }

    #[test]
    fn mapping_json() {
        let m = cascaded_mapping(0.3, 8).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"assignment":[0,0,1,1,2,2,3,3],"active_cards":4}"#);
    }

    proptest! {
        #[test]
        fn cascaded_never_beats_nxn(load in 1e-6f64..=1.0, exp in 1u32..6) {
            let l = 1u32 << exp;
            let c = cascaded_mapping(load, l).unwrap();
            let n = nxn_mapping(load, l).unwrap();
            prop_assert!(c.active_cards >= n.active_cards);
            prop_assert!(cascaded_saving(load, l).unwrap() <= n.saving() + 1e-15);
            // Cascaded groups fit one card each under uniform load.
            prop_assert!(c.card_loads(load).iter().all(|&x| x <= 1.0));
        }

        #[test]
        fn mappings_cover_every_segment(load in 0.0f64..=1.0, l in 1u32..33) {
            let m = nxn_mapping(load, l).unwrap();
            prop_assert_eq!(m.assignment.len(), l as usize);
            prop_assert!(m.assignment.iter().all(|&c| c < m.active_cards));
            prop_assert!(m.segments_per_card().iter().all(|&n| n >= 1));
            // Aggregate capacity of the powered cards covers the load.
            prop_assert!(load * f64::from(l) <= f64::from(m.active_cards) + 1e-9);
        }

        #[test]
        fn nxn_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0, l in 1u32..17) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(nxn_mapping(lo, l).unwrap().active_cards <= nxn_mapping(hi, l).unwrap().active_cards);
        }
    }
}

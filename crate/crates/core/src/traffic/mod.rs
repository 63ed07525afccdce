//! Per-cycle downstream arrival traces: Poisson and self-similar generators,
//! CSV import/export, and a variance-time Hurst estimator.

mod hurst;
mod poisson;
mod selfsim;

pub use hurst::{
    estimate_hurst, estimate_hurst_series, variance_time, VarianceTime, MAX_LEVEL_LOG2, MIN_CYCLES,
};
pub use poisson::{poisson_trace, poisson_trace_with};
pub use selfsim::{self_similar_trace, self_similar_trace_with, SelfSimilarOptions};

use std::io::{Read, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shortest and longest Ethernet frame carried, in bytes.
pub const MIN_PACKET_BYTES: u32 = 64;
pub const MAX_PACKET_BYTES: u32 = 1518;

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("hurst parameter must lie in (0.5, 1), got {0}")]
    HurstOutOfRange(f64),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("trace too short for hurst estimation: {got} cycles, need at least {need}")]
    TooShort { got: usize, need: usize },
    #[error("trace has zero variance; hurst parameter undefined")]
    Degenerate,
    #[error("trace csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace csv row {row}: cycle_index {found}, expected {row}")]
    CycleIndex { row: usize, found: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    Poisson,
    SelfSimilar,
    /// Loaded from a file; generator parameters unknown.
    External,
}

/// How packet lengths are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PacketSizing {
    Fixed(u32),
    /// Uniform over `[MIN_PACKET_BYTES, MAX_PACKET_BYTES]`.
    UniformEthernet,
}

impl PacketSizing {
    pub fn draw(self, rng: &mut ChaCha8Rng) -> u32 {
        match self {
            PacketSizing::Fixed(b) => b,
            PacketSizing::UniformEthernet => rng.random_range(MIN_PACKET_BYTES..=MAX_PACKET_BYTES),
        }
    }

    pub fn mean_bytes(self) -> f64 {
        match self {
            PacketSizing::Fixed(b) => f64::from(b),
            PacketSizing::UniformEthernet => f64::from(MIN_PACKET_BYTES + MAX_PACKET_BYTES) / 2.0,
        }
    }
}

/// Arrivals observed in one scheduling cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleArrivals {
    pub packet_count: u64,
    pub byte_total: u64,
    /// Individual lengths, kept only when the generator was asked to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet_lengths: Option<Vec<u16>>,
}

impl CycleArrivals {
    pub fn new(packet_count: u64, byte_total: u64) -> Self {
        Self {
            packet_count,
            byte_total,
            packet_lengths: None,
        }
    }

    pub fn from_lengths(lengths: Vec<u16>) -> Self {
        Self {
            packet_count: lengths.len() as u64,
            byte_total: lengths.iter().map(|&l| u64::from(l)).sum(),
            packet_lengths: Some(lengths),
        }
    }

    pub fn bits(&self) -> f64 {
        self.byte_total as f64 * 8.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficTrace {
    pub cycle_length: f64,
    pub kind: TraceKind,
    pub seed: u64,
    pub arrivals: Vec<CycleArrivals>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    cycle_index: u64,
    packet_count: u64,
    byte_total: u64,
}

impl TrafficTrace {
    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    /// Constant offered rate, in bits/second, of `packet_bytes`-byte packets.
    /// Fractional packets are carried to the next cycle.
    pub fn constant(rate_bps: f64, packet_bytes: u32, cycles: usize, cycle_length: f64) -> Self {
        let per_cycle = rate_bps * cycle_length / 8.0 / f64::from(packet_bytes);
        let mut carry = 0.0;
        let arrivals = (0..cycles)
            .map(|_| {
                carry += per_cycle;
                let n = carry.floor();
                carry -= n;
                CycleArrivals::new(n as u64, n as u64 * u64::from(packet_bytes))
            })
            .collect();
        Self {
            cycle_length,
            kind: TraceKind::External,
            seed: 0,
            arrivals,
        }
    }

    pub fn total_bytes(&self) -> u64 {
        self.arrivals.iter().map(|a| a.byte_total).sum()
    }

    pub fn total_packets(&self) -> u64 {
        self.arrivals.iter().map(|a| a.packet_count).sum()
    }

    /// Mean offered rate in bits/second.
    pub fn mean_rate(&self) -> f64 {
        self.total_bytes() as f64 * 8.0 / (self.len() as f64 * self.cycle_length)
    }

    pub fn byte_series(&self) -> Vec<f64> {
        self.arrivals.iter().map(|a| a.byte_total as f64).collect()
    }

    pub fn count_series(&self) -> Vec<f64> {
        self.arrivals
            .iter()
            .map(|a| a.packet_count as f64)
            .collect()
    }

    /// Writes `cycle_index,packet_count,byte_total` rows with a header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TrafficError> {
        let mut w = csv::Writer::from_writer(writer);
        for (i, a) in self.arrivals.iter().enumerate() {
            w.serialize(CsvRow {
                cycle_index: i as u64,
                packet_count: a.packet_count,
                byte_total: a.byte_total,
            })?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads rows written by [`write_csv`](Self::write_csv). Cycle indices must
    /// be contiguous from zero.
    pub fn read_csv<R: Read>(reader: R, cycle_length: f64) -> Result<Self, TrafficError> {
        let mut r = csv::Reader::from_reader(reader);
        let mut arrivals = Vec::new();
        for (row, rec) in r.deserialize::<CsvRow>().enumerate() {
            let rec = rec?;
            if rec.cycle_index != row as u64 {
                return Err(TrafficError::CycleIndex {
                    row,
                    found: rec.cycle_index,
                });
            }
            arrivals.push(CycleArrivals::new(rec.packet_count, rec.byte_total));
        }
        Ok(Self {
            cycle_length,
            kind: TraceKind::External,
            seed: 0,
            arrivals,
        })
    }
}

/// Draw `count` packets, keeping the lengths only if asked.
pub(crate) fn draw_packets(
    count: u64,
    sizing: PacketSizing,
    keep_lengths: bool,
    rng: &mut ChaCha8Rng,
) -> CycleArrivals {
    match (sizing, keep_lengths) {
        (PacketSizing::Fixed(b), false) => CycleArrivals::new(count, count * u64::from(b)),
        (_, false) => {
            let bytes = (0..count).map(|_| u64::from(sizing.draw(rng))).sum();
            CycleArrivals::new(count, bytes)
        }
        (_, true) => {
            CycleArrivals::from_lengths((0..count).map(|_| sizing.draw(rng) as u16).collect())
        }
    }
}

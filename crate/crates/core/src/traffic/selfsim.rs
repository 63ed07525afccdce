//! Self-similar traffic from a superposition of on/off sources with
//! Pareto-distributed period lengths.
//!
//! With period shape `a = 3 - 2H` (`1 < a < 2`) the aggregate is
//! asymptotically self-similar with Hurst parameter `H`. Sources emit a
//! fluid at a constant peak rate while on; the per-cycle fluid volume is
//! rescaled to the requested mean and cut into packets, carrying any partial
//! packet into the next cycle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto};
use serde::{Deserialize, Serialize};

use super::{CycleArrivals, PacketSizing, TraceKind, TrafficError, TrafficTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarOptions {
    /// Number of superposed on/off sources.
    pub sources: usize,
    /// Pareto location (shortest period), in cycles.
    pub min_period_cycles: f64,
    pub sizing: PacketSizing,
    pub keep_lengths: bool,
}

impl Default for SelfSimilarOptions {
    fn default() -> Self {
        Self {
            sources: 32,
            min_period_cycles: 1.0,
            sizing: PacketSizing::UniformEthernet,
            keep_lengths: false,
        }
    }
}

struct Source {
    on: bool,
    /// Seconds left in the current period.
    remaining: f64,
}

/// Equilibrium residual of a Pareto(`scale`, `shape`) renewal period, so
/// sources start in steady state.
fn residual_period(scale: f64, shape: f64, rng: &mut ChaCha8Rng) -> f64 {
    if rng.random::<f64>() < (shape - 1.0) / shape {
        scale * rng.random::<f64>()
    } else {
        Pareto::new(scale, shape - 1.0)
            .expect("valid pareto")
            .sample(rng)
    }
}

pub fn self_similar_trace(
    mean_rate: f64,
    hurst: f64,
    cycles: usize,
    cycle_length: f64,
    seed: u64,
) -> Result<TrafficTrace, TrafficError> {
    self_similar_trace_with(
        mean_rate,
        hurst,
        cycles,
        cycle_length,
        seed,
        SelfSimilarOptions::default(),
    )
}

pub fn self_similar_trace_with(
    mean_rate: f64,
    hurst: f64,
    cycles: usize,
    cycle_length: f64,
    seed: u64,
    opts: SelfSimilarOptions,
) -> Result<TrafficTrace, TrafficError> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(TrafficError::HurstOutOfRange(hurst));
    }
    if !(mean_rate.is_finite() && mean_rate >= 0.0) {
        return Err(TrafficError::InvalidParameter(format!(
            "mean rate {mean_rate}"
        )));
    }
    if !(cycle_length > 0.0) || opts.sources == 0 || !(opts.min_period_cycles > 0.0) {
        return Err(TrafficError::InvalidParameter(format!(
            "cycle_length={cycle_length}, sources={}, min_period_cycles={}",
            opts.sources, opts.min_period_cycles
        )));
    }

    let shape = 3.0 - 2.0 * hurst;
    let scale = opts.min_period_cycles * cycle_length;
    let period = Pareto::new(scale, shape).expect("valid pareto");
    // On and off periods share a distribution, so each source is on half the time.
    let peak_bytes_per_sec = mean_rate / 8.0 / (opts.sources as f64 * 0.5);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sources: Vec<Source> = (0..opts.sources)
        .map(|_| Source {
            on: rng.random::<bool>(),
            remaining: residual_period(scale, shape, &mut rng),
        })
        .collect();

    let mut fluid = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        let mut on_time = 0.0;
        for s in &mut sources {
            let mut left = cycle_length;
            while s.remaining <= left {
                if s.on {
                    on_time += s.remaining;
                }
                left -= s.remaining;
                s.on = !s.on;
                s.remaining = period.sample(&mut rng);
            }
            if s.on {
                on_time += left;
            }
            s.remaining -= left;
        }
        fluid.push(on_time * peak_bytes_per_sec);
    }

    // Heavy-tailed periods make the realized mean converge slowly; rescale
    // the whole series so the trace offers exactly the requested rate.
    let realized: f64 = fluid.iter().sum();
    let target = mean_rate / 8.0 * cycle_length * cycles as f64;
    let gain = if realized > 0.0 {
        target / realized
    } else {
        0.0
    };

    let mut budget = 0.0f64;
    let mut pending: Option<u32> = None;
    let arrivals = fluid
        .into_iter()
        .map(|bytes| {
            budget += bytes * gain;
            let mut lengths = opts.keep_lengths.then(Vec::new);
            let (mut count, mut total) = (0u64, 0u64);
            loop {
                let len = *pending.get_or_insert_with(|| opts.sizing.draw(&mut rng));
                if budget < f64::from(len) {
                    break;
                }
                budget -= f64::from(len);
                pending = None;
                count += 1;
                total += u64::from(len);
                if let Some(l) = lengths.as_mut() {
                    l.push(len as u16);
                }
            }
            CycleArrivals {
                packet_count: count,
                byte_total: total,
                packet_lengths: lengths,
            }
        })
        .collect();

    Ok(TrafficTrace {
        cycle_length,
        kind: TraceKind::SelfSimilar,
        seed,
        arrivals,
    })
}

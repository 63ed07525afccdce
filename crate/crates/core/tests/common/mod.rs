//! Independent reference implementations used by the integration and
//! acceptance tests. None of these call into the library's own numerics.

#![allow(dead_code)]

use std::collections::BTreeMap;

use pon_sleep::markov::{ChainState, TransitionMatrix};
use pon_sleep::model::{ChassisConfig, SleepPolicy};
use pon_sleep::sim::{policy_step, simulate_with, SimOptions, SimState};
use pon_sleep::traffic::{CycleArrivals, TraceKind, TrafficTrace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `ln(k!)` by direct summation.
pub fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// `P(X >= k)` for `X ~ Poisson(mean)`, summing the pmf upward from `k`
/// until the terms vanish.
pub fn brute_poisson_sf(mean: f64, k: u64) -> f64 {
    let mut ln_p = k as f64 * mean.ln() - mean - ln_factorial(k);
    let mut sum = 0.0;
    let mut j = k;
    loop {
        let p = ln_p.exp();
        sum += p;
        if p < 1e-300 || (j as f64 > mean && p < sum * 1e-18) {
            break;
        }
        j += 1;
        ln_p += mean.ln() - (j as f64).ln();
    }
    sum
}

/// `P(a <= X <= b)` by summing the pmf over the range; no cancellation.
pub fn brute_poisson_range(mean: f64, a: u64, b: u64) -> f64 {
    let mut ln_p = a as f64 * mean.ln() - mean - ln_factorial(a);
    let mut sum = 0.0;
    for j in a..=b {
        if j > a {
            ln_p += mean.ln() - (j as f64).ln();
        }
        sum += ln_p.exp();
    }
    sum
}

/// `P(X <= k)` by summing the pmf from 0.
pub fn brute_poisson_cdf(mean: f64, k: u64) -> f64 {
    let mut ln_p = -mean;
    let mut sum = ln_p.exp();
    for j in 1..=k {
        ln_p += mean.ln() - (j as f64).ln();
        sum += ln_p.exp();
    }
    sum
}

/// Visit frequencies of a `steps`-long walk on the chain, started with every
/// card on.
pub fn monte_carlo_walk(matrix: &TransitionMatrix, steps: usize, seed: u64) -> Vec<f64> {
    let n = matrix.dim();
    let top = matrix
        .states()
        .iter()
        .map(|s| s.active_cards())
        .max()
        .unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; n];
    let mut s = matrix
        .index_of(ChainState::Active(top))
        .expect("top level present");
    for _ in 0..steps {
        let u: f64 = rng.random();
        let row = matrix.row(s);
        let mut acc = 0.0;
        let mut next = n - 1;
        for (j, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                next = j;
                break;
            }
        }
        // Rounding can leave `acc` a hair below 1; fall back to the last
        // state with positive mass.
        if u >= acc {
            next = row.iter().rposition(|&p| p > 0.0).unwrap_or(s);
        }
        s = next;
        counts[s] += 1;
    }
    counts
        .into_iter()
        .map(|c| c as f64 / steps as f64)
        .collect()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Variance over mean of a count series.
pub fn dispersion(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var / mean
}

/// Reference FIFO: drive the controller with the library's single-step rule,
/// then serve packets one by one with `level * floor(C*T/8)` bytes per cycle.
/// Returns packets served per (arrival cycle, serve cycle) pair.
pub fn fifo_oracle(
    config: &ChassisConfig,
    policy: &SleepPolicy,
    arrivals: &[CycleArrivals],
) -> BTreeMap<(u64, u64), u64> {
    let per_card = (config.downstream_capacity * config.cycle_length / 8.0).floor() as u64;
    let chassis_bits =
        config.downstream_capacity * config.cycle_length * f64::from(config.line_cards);
    let mut state = SimState::boot(config);
    let mut queue: std::collections::VecDeque<(u64, u64)> = Default::default(); // (arrival, bytes left)
    let mut out = BTreeMap::new();
    for (cycle, a) in arrivals.iter().enumerate() {
        let cycle = cycle as u64;
        state = policy_step(
            state,
            a.byte_total as f64 * 8.0 / chassis_bits,
            policy,
            config,
        );
        for &l in a.packet_lengths.as_ref().expect("explicit lengths") {
            queue.push_back((cycle, u64::from(l)));
        }
        let mut budget = per_card * u64::from(state.current.active_cards());
        while let Some(front) = queue.front_mut() {
            if front.1 <= budget {
                budget -= front.1;
                *out.entry((front.0, cycle)).or_insert(0) += 1;
                queue.pop_front();
            } else {
                front.1 -= budget;
                break;
            }
        }
    }
    out
}

/// 1 Mb/s cards: 250 bytes per card per cycle, so a few Ethernet frames
/// already queue.
pub fn small_chassis() -> ChassisConfig {
    ChassisConfig {
        upstream_capacity: 1e6,
        downstream_capacity: 1e6,
        ..ChassisConfig::default()
    }
}

pub fn trace_of(cycles: Vec<Vec<u16>>, cycle_length: f64) -> TrafficTrace {
    TrafficTrace {
        cycle_length,
        kind: TraceKind::External,
        seed: 0,
        arrivals: cycles
            .into_iter()
            .map(CycleArrivals::from_lengths)
            .collect(),
    }
}

/// Simulate explicit-length arrivals on [`small_chassis`] and check the
/// service log against [`fifo_oracle`], ordering, and byte conservation.
pub fn check_fifo_and_conservation(cycles: Vec<Vec<u16>>, m: u32, n: u32) -> Result<(), String> {
    let cfg = small_chassis();
    let policy = SleepPolicy::new(m, n).map_err(|e| e.to_string())?;
    let trace = trace_of(cycles, cfg.cycle_length);
    let opts = SimOptions {
        record_service: true,
        ..SimOptions::default()
    };
    let sim = simulate_with(&cfg, &policy, &trace, opts).map_err(|e| e.to_string())?;

    let mut got: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for r in sim.service_log() {
        *got.entry((r.arrival_cycle, r.serve_cycle)).or_insert(0) += r.packets;
    }
    if got != fifo_oracle(&cfg, &policy, &trace.arrivals) {
        return Err("service log differs from reference FIFO".into());
    }
    let log = sim.service_log();
    for w in log.windows(2) {
        if w[0].arrival_cycle > w[1].arrival_cycle || w[0].serve_cycle > w[1].serve_cycle {
            return Err(format!("out of order: {:?} then {:?}", w[0], w[1]));
        }
    }
    if let Some(r) = log.iter().find(|r| r.serve_cycle < r.arrival_cycle) {
        return Err(format!("served before arrival: {r:?}"));
    }
    let report = sim.report();
    if report.served_bytes + report.final_backlog_bytes != report.arrived_bytes {
        return Err(format!(
            "served {} + backlog {} != arrived {}",
            report.served_bytes, report.final_backlog_bytes, report.arrived_bytes
        ));
    }
    Ok(())
}

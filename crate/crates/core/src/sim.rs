//! Cycle-driven simulation of the sleep controller.
//!
//! Each cycle the controller observes that cycle's offered arrivals (never
//! the backlog), steps the same state machine the analytic chain uses,
//! serves the FIFO buffer with the cards now on, and charges their power.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::markov::{classify_load, next_state, ChainState};
use crate::model::{ChassisConfig, ModelError, SleepPolicy};
use crate::traffic::{CycleArrivals, TrafficTrace};

/// Default backlog bound (1 GB) above which a run is declared unstable.
pub const DEFAULT_BACKLOG_CAP: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("trace cycle length {trace}s does not match chassis cycle length {config}s")]
    CycleLengthMismatch { trace: f64, config: f64 },
    #[error("upstream trace has {upstream} cycles, downstream has {downstream}")]
    TraceLengthMismatch { downstream: usize, upstream: usize },
    #[error("backlog of {backlog} bytes exceeds cap {cap} at cycle {cycle}")]
    BacklogOverflow { cycle: u64, backlog: u64, cap: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub backlog_cap: u64,
    /// Keep a per-batch log of when packets were served.
    pub record_service: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            backlog_cap: DEFAULT_BACKLOG_CAP,
            record_service: false,
        }
    }
}

/// Packets of one arrival batch that finished service in a given cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ServiceRecord {
    pub arrival_cycle: u64,
    pub serve_cycle: u64,
    pub packets: u64,
}

#[derive(Debug, Clone)]
struct Batch {
    arrival_cycle: u64,
    total: u64,
    consumed: u64,
    count: u64,
    completed: u64,
    lengths: Option<Vec<u16>>,
    /// Bytes of fully served packets, when lengths are known.
    completed_bytes: u64,
}

impl Batch {
    fn new(arrival_cycle: u64, a: &CycleArrivals) -> Self {
        Self {
            arrival_cycle,
            total: a.byte_total,
            consumed: 0,
            count: a.packet_count,
            completed: 0,
            lengths: a.packet_lengths.clone(),
            completed_bytes: 0,
        }
    }

    /// Packets whose last byte has been served. Without explicit lengths the
    /// batch is treated as equal-size packets.
    fn advance_completed(&mut self) -> u64 {
        let before = self.completed;
        match &self.lengths {
            Some(lens) => {
                while let Some(&l) = lens.get(self.completed as usize) {
                    if self.completed_bytes + u64::from(l) > self.consumed {
                        break;
                    }
                    self.completed_bytes += u64::from(l);
                    self.completed += 1;
                }
            }
            None if self.total == 0 => self.completed = self.count,
            None => {
                self.completed = (u128::from(self.consumed) * u128::from(self.count)
                    / u128::from(self.total)) as u64;
            }
        }
        self.completed - before
    }
}

/// One traffic direction: its FIFO buffer and counters.
#[derive(Debug, Clone)]
struct Lane {
    card_bytes_per_cycle: u64,
    /// Denominator turning offered bits into a chassis load fraction.
    chassis_bits_per_cycle: f64,
    queue: VecDeque<Batch>,
    backlog: u64,
    arrived: u64,
    served: u64,
}

impl Lane {
    fn new(capacity: f64, config: &ChassisConfig) -> Self {
        let card_bits = capacity * config.cycle_length;
        Self {
            card_bytes_per_cycle: (card_bits / 8.0).floor() as u64,
            chassis_bits_per_cycle: card_bits * f64::from(config.line_cards),
            queue: VecDeque::new(),
            backlog: 0,
            arrived: 0,
            served: 0,
        }
    }
}

/// Controller state between cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimState {
    pub current: ChainState,
    pub backlog: u64,
    pub cycle_index: u64,
}

impl SimState {
    /// A chassis that boots with every card on.
    pub fn boot(config: &ChassisConfig) -> Self {
        Self {
            current: ChainState::Active(config.line_cards),
            backlog: 0,
            cycle_index: 0,
        }
    }
}

/// Advance the controller by one cycle given the observed load fraction.
pub fn policy_step(
    state: SimState,
    observed_cycle_load: f64,
    policy: &SleepPolicy,
    config: &ChassisConfig,
) -> SimState {
    let class = classify_load(
        state.current.active_cards(),
        observed_cycle_load,
        config.line_cards,
    );
    SimState {
        current: next_state(state.current, class, policy),
        ..state
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub energy_saving: f64,
    pub mean_delay: f64,
    pub max_delay: f64,
    pub state_occupancy: BTreeMap<ChainState, f64>,
    pub mean_active_cards: f64,
    pub reconfig_events: u64,
    pub cycles: u64,
    pub arrived_bytes: u64,
    pub served_bytes: u64,
    pub final_backlog_bytes: u64,
    pub served_packets: u64,
}

/// Steppable simulator; [`simulate`] drives it over a whole trace.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: ChassisConfig,
    policy: SleepPolicy,
    options: SimOptions,
    state: SimState,
    lanes: Vec<Lane>,
    occupancy: BTreeMap<ChainState, u64>,
    card_cycles: u64,
    reconfig_events: u64,
    delay_cycles_sum: u128,
    max_delay_cycles: u64,
    served_packets: u64,
    service_log: Vec<ServiceRecord>,
}

impl Simulator {
    /// Downstream-only simulator.
    pub fn new(
        config: &ChassisConfig,
        policy: &SleepPolicy,
        options: SimOptions,
    ) -> Result<Self, SimError> {
        Self::with_capacities(config, policy, options, &[config.downstream_capacity])
    }

    /// Downstream and upstream lanes; the observed load is the larger of the two.
    pub fn bidirectional(
        config: &ChassisConfig,
        policy: &SleepPolicy,
        options: SimOptions,
    ) -> Result<Self, SimError> {
        Self::with_capacities(
            config,
            policy,
            options,
            &[config.downstream_capacity, config.upstream_capacity],
        )
    }

    fn with_capacities(
        config: &ChassisConfig,
        policy: &SleepPolicy,
        options: SimOptions,
        capacities: &[f64],
    ) -> Result<Self, SimError> {
        config.validate()?;
        policy.validate()?;
        Ok(Self {
            config: config.clone(),
            policy: *policy,
            options,
            state: SimState::boot(config),
            lanes: capacities.iter().map(|&c| Lane::new(c, config)).collect(),
            occupancy: BTreeMap::new(),
            card_cycles: 0,
            reconfig_events: 0,
            delay_cycles_sum: 0,
            max_delay_cycles: 0,
            served_packets: 0,
            service_log: Vec::new(),
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn service_log(&self) -> &[ServiceRecord] {
        &self.service_log
    }

    /// Run one cycle. `arrivals` holds one entry per lane (downstream first).
    pub fn step(&mut self, arrivals: &[&CycleArrivals]) -> Result<(), SimError> {
        assert_eq!(
            arrivals.len(),
            self.lanes.len(),
            "one arrival record per lane"
        );
        let cycle = self.state.cycle_index;

        let load = self
            .lanes
            .iter()
            .zip(arrivals)
            .map(|(lane, a)| a.bits() / lane.chassis_bits_per_cycle)
            .fold(0.0, f64::max);
        let before = self.state.current.active_cards();
        self.state = policy_step(self.state.clone(), load, &self.policy, &self.config);
        let level = self.state.current.active_cards();
        if level != before {
            self.reconfig_events += 1;
        }

        let mut backlog = 0;
        for (lane, a) in self.lanes.iter_mut().zip(arrivals) {
            if a.byte_total > 0 || a.packet_count > 0 {
                lane.queue.push_back(Batch::new(cycle, a));
                lane.arrived += a.byte_total;
                lane.backlog += a.byte_total;
            }
            let mut budget = lane.card_bytes_per_cycle * u64::from(level);
            while let Some(front) = lane.queue.front_mut() {
                let take = budget.min(front.total - front.consumed);
                front.consumed += take;
                budget -= take;
                lane.served += take;
                lane.backlog -= take;
                let done = front.advance_completed();
                if done > 0 {
                    let wait = cycle - front.arrival_cycle;
                    self.delay_cycles_sum += u128::from(wait) * u128::from(done);
                    self.max_delay_cycles = self.max_delay_cycles.max(wait);
                    self.served_packets += done;
                    if self.options.record_service {
                        self.service_log.push(ServiceRecord {
                            arrival_cycle: front.arrival_cycle,
                            serve_cycle: cycle,
                            packets: done,
                        });
                    }
                }
                if front.consumed == front.total && front.completed == front.count {
                    lane.queue.pop_front();
                } else {
                    break;
                }
            }
            backlog += lane.backlog;
        }
        self.state.backlog = backlog;

        *self.occupancy.entry(self.state.current).or_insert(0) += 1;
        self.card_cycles += u64::from(level);
        self.state.cycle_index += 1;

        if backlog > self.options.backlog_cap {
            return Err(SimError::BacklogOverflow {
                cycle,
                backlog,
                cap: self.options.backlog_cap,
            });
        }
        Ok(())
    }

    pub fn report(&self) -> SimReport {
        let cycles = self.state.cycle_index;
        let n = cycles.max(1) as f64;
        let t = self.config.cycle_length;
        let l = f64::from(self.config.line_cards);
        let mean_active = self.card_cycles as f64 / n;
        let energy = self.config.card_power * self.card_cycles as f64 * t;
        let duration = n * t;
        let full = self.config.card_power * l * duration;
        let energy_saving = if full > 0.0 {
            1.0 - (energy + self.config.switch_power * duration) / full
        } else {
            0.0
        };
        let mean_delay = if self.served_packets > 0 {
            self.delay_cycles_sum as f64 / self.served_packets as f64 * t
        } else {
            0.0
        };
        SimReport {
            energy_saving,
            mean_delay,
            max_delay: self.max_delay_cycles as f64 * t,
            state_occupancy: self
                .occupancy
                .iter()
                .map(|(s, &c)| (*s, c as f64 / n))
                .collect(),
            mean_active_cards: mean_active,
            reconfig_events: self.reconfig_events,
            cycles,
            arrived_bytes: self.lanes.iter().map(|l| l.arrived).sum(),
            served_bytes: self.lanes.iter().map(|l| l.served).sum(),
            final_backlog_bytes: self.lanes.iter().map(|l| l.backlog).sum(),
            served_packets: self.served_packets,
        }
    }
}

fn check_cycle_length(trace: &TrafficTrace, config: &ChassisConfig) -> Result<(), SimError> {
    if (trace.cycle_length - config.cycle_length).abs() > 1e-12 * config.cycle_length {
        return Err(SimError::CycleLengthMismatch {
            trace: trace.cycle_length,
            config: config.cycle_length,
        });
    }
    Ok(())
}

/// Run the downstream controller over `trace`.
pub fn simulate(
    config: &ChassisConfig,
    policy: &SleepPolicy,
    trace: &TrafficTrace,
) -> Result<SimReport, SimError> {
    simulate_with(config, policy, trace, SimOptions::default()).map(|s| s.report())
}

/// As [`simulate`], returning the simulator for inspection.
pub fn simulate_with(
    config: &ChassisConfig,
    policy: &SleepPolicy,
    trace: &TrafficTrace,
    options: SimOptions,
) -> Result<Simulator, SimError> {
    check_cycle_length(trace, config)?;
    let mut sim = Simulator::new(config, policy, options)?;
    for a in &trace.arrivals {
        sim.step(&[a])?;
    }
    Ok(sim)
}

/// Run with both directions; the controller sizes for the busier one.
pub fn simulate_bidirectional(
    config: &ChassisConfig,
    policy: &SleepPolicy,
    downstream: &TrafficTrace,
    upstream: &TrafficTrace,
) -> Result<SimReport, SimError> {
    check_cycle_length(downstream, config)?;
    check_cycle_length(upstream, config)?;
    if downstream.len() != upstream.len() {
        return Err(SimError::TraceLengthMismatch {
            downstream: downstream.len(),
            upstream: upstream.len(),
        });
    }
    let mut sim = Simulator::bidirectional(config, policy, SimOptions::default())?;
    for (d, u) in downstream.arrivals.iter().zip(&upstream.arrivals) {
        sim.step(&[d, u])?;
    }
    Ok(sim.report())
}

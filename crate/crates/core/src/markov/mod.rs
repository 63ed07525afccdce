//! Semi-Markov model of the line-card controller under Poisson downstream
//! arrivals: state space, transition matrix, stationary solve, and the
//! resulting average power and energy saving.

mod matrix;
mod poisson;
mod rules;
mod solve;
mod state;

pub use matrix::{
    build_transition_matrix, class_probabilities, count_thresholds, ClassProbs, TransitionMatrix,
};
pub use poisson::{poisson_arrival_prob, poisson_cdf, poisson_sf};
pub use rules::{classify_load, next_state, LoadClass};
pub use solve::{solve_stationary, StationaryDistribution};
pub use state::{build_state_space, state_count, ChainState, ParseStateError};

use serde::Serialize;
use thiserror::Error;

use crate::model::{ChassisConfig, ModelError, SleepPolicy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("arrival rate must be finite and non-negative, got {0}")]
    NegativeRate(f64),
    #[error("row {row} is not stochastic (sum {sum})")]
    NotStochastic { row: usize, sum: f64 },
    #[error("matrix has {entries} entries for {states} states")]
    Shape { states: usize, entries: usize },
    #[error(
        "power iteration did not converge after {iterations} iterations (last delta {delta:e})"
    )]
    NonConvergence { iterations: usize, delta: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `p_l * sum_state active_cards(state) * pi(state)`, in watts.
pub fn average_power(dist: &StationaryDistribution, config: &ChassisConfig) -> f64 {
    config.card_power * dist.mean_active_cards()
}

/// `1 - (average_power + p_s) / (p_l * L)`.
pub fn analytic_saving(dist: &StationaryDistribution, config: &ChassisConfig) -> f64 {
    let full = config.card_power * f64::from(config.line_cards);
    1.0 - (average_power(dist, config) + config.switch_power) / full
}

/// Solved operating point of the chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticSummary {
    pub lambda: f64,
    pub mean_active_cards: f64,
    pub avg_power_w: f64,
    pub energy_saving: f64,
    pub distribution: StationaryDistribution,
}

/// Build, solve and summarize the chain at `lambda` packets/second.
pub fn analyze(
    config: &ChassisConfig,
    policy: &SleepPolicy,
    lambda: f64,
) -> Result<AnalyticSummary, MarkovError> {
    let matrix = build_transition_matrix(config, policy, lambda)?;
    let distribution = solve_stationary(&matrix)?;
    Ok(AnalyticSummary {
        lambda,
        mean_active_cards: distribution.mean_active_cards(),
        avg_power_w: average_power(&distribution, config),
        energy_saving: analytic_saving(&distribution, config),
        distribution,
    })
}

/// Packets/second corresponding to `bits_per_second` of analytic-size packets.
pub fn packet_rate(bits_per_second: f64, config: &ChassisConfig) -> f64 {
    bits_per_second / config.analytic_packet_size
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GIGA;
    use ChainState::*;

    fn states4() -> Vec<ChainState> {
        build_state_space(4, 2, 2)
    }

    #[test]
    fn power_examples() {
        let cfg = ChassisConfig::default();
        let d = StationaryDistribution::point_mass(states4(), Active(1));
        assert_eq!(average_power(&d, &cfg), 5.0);
        assert_eq!(analytic_saving(&d, &cfg), 0.75);
        let d = StationaryDistribution::point_mass(states4(), Active(4));
        assert_eq!(average_power(&d, &cfg), 20.0);
        assert_eq!(analytic_saving(&d, &cfg), 0.0);
        let probs = states4()
            .iter()
            .map(|s| f64::from(u8::from(s.is_active())))
            .collect();
        let d = StationaryDistribution::from_probs(states4(), probs);
        assert!((average_power(&d, &cfg) - 12.5).abs() < 1e-12);
    }

    #[test]
    fn listening_states_count_their_cards() {
        let cfg = ChassisConfig::default();
        let d = StationaryDistribution::point_mass(states4(), Down(3, 2));
        assert_eq!(average_power(&d, &cfg), 15.0);
        let d = StationaryDistribution::point_mass(states4(), Up(2, 1));
        assert_eq!(average_power(&d, &cfg), 10.0);
    }

    #[test]
    fn switch_power_charged() {
        let cfg = ChassisConfig {
            switch_power: 1.0,
            ..ChassisConfig::default()
        };
        let d = StationaryDistribution::point_mass(states4(), Active(1));
        assert!((analytic_saving(&d, &cfg) - (1.0 - 6.0 / 20.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_traffic_settles_on_one_card() {
        let cfg = ChassisConfig::default();
        let s = analyze(&cfg, &SleepPolicy::default(), 0.0).unwrap();
        assert_eq!(s.distribution.prob(Active(1)), 1.0);
        assert_eq!(s.energy_saving, 0.75);
    }

    #[test]
    fn full_load_saving_vanishes() {
        let cfg = ChassisConfig::default();
        let s = analyze(
            &cfg,
            &SleepPolicy::default(),
            packet_rate(40.0 * GIGA, &cfg),
        )
        .unwrap();
        assert!(s.energy_saving < 0.01, "{}", s.energy_saving);
        assert!(s.energy_saving >= 0.0);
    }

    #[test]
    fn unreachable_down_states_have_zero_mass() {
        // 60 Gb/s offered: below-threshold cycles at level 4 underflow to 0.
        let cfg = ChassisConfig::default();
        let s = analyze(
            &cfg,
            &SleepPolicy::default(),
            packet_rate(60.0 * GIGA, &cfg),
        )
        .unwrap();
        for (st, p) in s.distribution.iter() {
            if matches!(st, Down(..)) {
                assert_eq!(p, 0.0, "{st}");
            }
        }
        assert_eq!(s.distribution.prob(Active(4)), 1.0);
    }

    #[test]
    fn residual_and_normalization() {
        let cfg = ChassisConfig::default();
        for gbps in [1.0, 10.0, 20.0, 27.5, 40.0] {
            for (m, n) in [(1, 1), (2, 2), (4, 1), (1, 4)] {
                let policy = SleepPolicy::new(m, n).unwrap();
                let matrix =
                    build_transition_matrix(&cfg, &policy, packet_rate(gbps * GIGA, &cfg)).unwrap();
                let d = solve_stationary(&matrix).unwrap();
                assert!(d.residual(&matrix) <= 1e-8);
                assert!((d.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-10);
                assert!(d.probs().iter().all(|&p| p >= 0.0));
            }
        }
    }
}

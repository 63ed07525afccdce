use std::collections::HashMap;

use super::poisson::{poisson_cdf, poisson_sf};
use super::rules::{classify_load, next_state, LoadClass};
use super::{build_state_space, ChainState, MarkovError};
use crate::model::{ChassisConfig, SleepPolicy};

/// Row-stochastic transition matrix over the canonical state ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    states: Vec<ChainState>,
    index: HashMap<ChainState, usize>,
    /// Row-major, `dim * dim`.
    data: Vec<f64>,
}

impl TransitionMatrix {
    /// Wrap an explicit row-major matrix. Rows must be stochastic.
    pub fn from_rows(states: Vec<ChainState>, data: Vec<f64>) -> Result<Self, MarkovError> {
        let n = states.len();
        if data.len() != n * n {
            return Err(MarkovError::Shape {
                states: n,
                entries: data.len(),
            });
        }
        let m = Self::with_states(states, data);
        m.check_stochastic(1e-12)?;
        Ok(m)
    }

    fn with_states(states: Vec<ChainState>, data: Vec<f64>) -> Self {
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Self {
            states,
            index,
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[ChainState] {
        &self.states
    }

    pub fn index_of(&self, state: ChainState) -> Option<usize> {
        self.index.get(&state).copied()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim() + j]
    }

    /// Probability of moving from `from` to `to` in one cycle, 0 for unknown states.
    pub fn prob(&self, from: ChainState, to: ChainState) -> f64 {
        match (self.index_of(from), self.index_of(to)) {
            (Some(i), Some(j)) => self.entry(i, j),
            _ => 0.0,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn check_stochastic(&self, tol: f64) -> Result<(), MarkovError> {
        for i in 0..self.dim() {
            let row = self.row(i);
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(MarkovError::NotStochastic {
                    row: i,
                    sum: f64::NAN,
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(MarkovError::NotStochastic { row: i, sum });
            }
        }
        Ok(())
    }
}

/// Probabilities of the three load classes for one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassProbs {
    pub below: f64,
    pub within: f64,
    pub above: f64,
}

impl ClassProbs {
    fn get(&self, class: LoadClass) -> f64 {
        match class {
            LoadClass::Below => self.below,
            LoadClass::Within => self.within,
            LoadClass::Above => self.above,
        }
    }
}

/// Integer arrival-count boundaries of the `Within` band at one level:
/// `Below` iff `alpha < lo`, `Above` iff `alpha > hi`.
///
/// Found by probing the shared classifier so the matrix and the simulator
/// split boundary counts identically.
pub fn count_thresholds(level: u32, config: &ChassisConfig) -> (u64, Option<u64>) {
    let size = config.analytic_packet_size;
    let l = config.line_cards;
    let class =
        |alpha: u64| classify_load(level, config.cycle_load_fraction(alpha as f64 * size), l);
    let card = config.card_bits_per_cycle() / size;

    let mut lo = (f64::from(level.saturating_sub(1)) * card).ceil().max(0.0) as u64;
    while lo > 0 && class(lo - 1) != LoadClass::Below {
        lo -= 1;
    }
    while class(lo) == LoadClass::Below {
        lo += 1;
    }

    if level >= l {
        return (lo, None);
    }
    let mut hi = (f64::from(level) * card).floor() as u64;
    while class(hi) == LoadClass::Above {
        hi -= 1;
    }
    while class(hi + 1) != LoadClass::Above {
        hi += 1;
    }
    (lo, Some(hi))
}

/// Per-cycle class probabilities at `level` for Poisson arrivals of
/// `lambda` packets/second.
pub fn class_probabilities(level: u32, config: &ChassisConfig, lambda: f64) -> ClassProbs {
    let mean = lambda * config.cycle_length;
    let (lo, hi) = count_thresholds(level, config);
    let below = if lo == 0 {
        0.0
    } else {
        poisson_cdf(mean, lo - 1)
    };
    let above = hi.map_or(0.0, |hi| poisson_sf(mean, hi + 1));
    let within = (1.0 - below - above).max(0.0);
    ClassProbs {
        below,
        within,
        above,
    }
}

/// Transition matrix of the downstream chain under Poisson arrivals.
pub fn build_transition_matrix(
    config: &ChassisConfig,
    policy: &SleepPolicy,
    lambda: f64,
) -> Result<TransitionMatrix, MarkovError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(MarkovError::NegativeRate(lambda));
    }
    config.validate()?;
    policy.validate()?;

    let states = build_state_space(config.line_cards, policy.listen_down, policy.listen_up);
    let n = states.len();
    let probs: Vec<ClassProbs> = (1..=config.line_cards)
        .map(|level| class_probabilities(level, config, lambda))
        .collect();

    let mut m = TransitionMatrix::with_states(states, vec![0.0; n * n]);
    for row in 0..n {
        let from = m.states[row];
        let cp = probs[from.active_cards() as usize - 1];
        for class in [LoadClass::Below, LoadClass::Within, LoadClass::Above] {
            let p = cp.get(class);
            if p == 0.0 {
                continue;
            }
            let col = m.index[&next_state(from, class, policy)];
            m.data[row * n + col] += p;
        }
    }
    Ok(m)
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A state of the line-card control chain.
///
/// `Down(i, j)`: `i` cards on, load has stayed below `(i-1)/L` for `j` cycles.
/// `Up(i, k)`: `i` cards on, load has stayed above `i/L` for `k` cycles.
/// Cards stay powered while listening, so every variant carries `i` active cards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChainState {
    Active(u32),
    Down(u32, u32),
    Up(u32, u32),
}

impl ChainState {
    pub fn active_cards(self) -> u32 {
        match self {
            ChainState::Active(i) | ChainState::Down(i, _) | ChainState::Up(i, _) => i,
        }
    }

    pub fn is_active(self) -> bool {
        matches!(self, ChainState::Active(_))
    }

    /// Whether the state exists for a chassis with `l` cards and windows `m`, `n`.
    pub fn is_valid(self, l: u32, m: u32, n: u32) -> bool {
        match self {
            ChainState::Active(i) => (1..=l).contains(&i),
            ChainState::Down(i, j) => (2..=l).contains(&i) && (1..=m).contains(&j),
            ChainState::Up(i, k) => i >= 1 && i < l && (1..=n).contains(&k),
        }
    }
}

impl fmt::Display for ChainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainState::Active(i) => write!(f, "A{i}"),
            ChainState::Down(i, j) => write!(f, "D{i}.{j}"),
            ChainState::Up(i, k) => write!(f, "I{i}.{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognized chain state {0:?}")]
pub struct ParseStateError(String);

impl FromStr for ChainState {
    type Err = ParseStateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseStateError(s.to_string());
        let (tag, rest) = s.split_at_checked(1).ok_or_else(err)?;
        let pair = |rest: &str| -> Result<(u32, u32), ParseStateError> {
            let (a, b) = rest.split_once('.').ok_or_else(err)?;
            Ok((a.parse().map_err(|_| err())?, b.parse().map_err(|_| err())?))
        };
        match tag {
            "A" => Ok(ChainState::Active(rest.parse().map_err(|_| err())?)),
            "D" => pair(rest).map(|(i, j)| ChainState::Down(i, j)),
            "I" => pair(rest).map(|(i, k)| ChainState::Up(i, k)),
            _ => Err(err()),
        }
    }
}

impl Serialize for ChainState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ChainState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All states in canonical order: level by level, `A(i)` first, then the
/// `D(i, 1..=M)` chain, then the `I(i, 1..=N)` chain.
pub fn build_state_space(line_cards: u32, listen_down: u32, listen_up: u32) -> Vec<ChainState> {
    let mut states = Vec::with_capacity(state_count(line_cards, listen_down, listen_up));
    for i in 1..=line_cards {
        states.push(ChainState::Active(i));
        if i >= 2 {
            states.extend((1..=listen_down).map(|j| ChainState::Down(i, j)));
        }
        if i < line_cards {
            states.extend((1..=listen_up).map(|k| ChainState::Up(i, k)));
        }
    }
    states
}

pub fn state_count(line_cards: u32, listen_down: u32, listen_up: u32) -> usize {
    let l = line_cards as usize;
    l + l.saturating_sub(1) * (listen_down as usize + listen_up as usize)
}

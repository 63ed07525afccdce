//! The single-cycle transition rule. Both the transition matrix and the
//! simulator go through [`classify_load`] and [`next_state`].

use super::ChainState;
use crate::model::SleepPolicy;

/// Where one cycle's load sits relative to the current level's thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoadClass {
    /// Strictly below `(i-1)/L`: one card fewer would have sufficed.
    Below,
    /// Within `[(i-1)/L, i/L]`. Boundary loads land here.
    Within,
    /// Strictly above `i/L`.
    Above,
}

/// Classify a cycle load fraction against level `level` of an `L`-card chassis.
///
/// At the floor there is nothing below; at the ceiling nothing above.
pub fn classify_load(level: u32, load: f64, line_cards: u32) -> LoadClass {
    let l = f64::from(line_cards);
    if level > 1 && load < f64::from(level - 1) / l {
        LoadClass::Below
    } else if level < line_cards && load > f64::from(level) / l {
        LoadClass::Above
    } else {
        LoadClass::Within
    }
}

/// Successor of `state` after a cycle of class `class`.
///
/// Any cycle that breaks a listening streak returns the chain to `A(i)` and
/// restarts the window.
pub fn next_state(state: ChainState, class: LoadClass, policy: &SleepPolicy) -> ChainState {
    use ChainState::*;
    match (state, class) {
        (Active(i), LoadClass::Below) => Down(i, 1),
        (Active(i), LoadClass::Above) => Up(i, 1),
        (Active(i), LoadClass::Within) => Active(i),
        (Down(i, j), LoadClass::Below) if j < policy.listen_down => Down(i, j + 1),
        (Down(i, _), LoadClass::Below) => Active(i - 1),
        (Down(i, _), _) => Active(i),
        (Up(i, k), LoadClass::Above) if k < policy.listen_up => Up(i, k + 1),
        (Up(i, _), LoadClass::Above) => Active(i + 1),
        (Up(i, _), _) => Active(i),
    }
}

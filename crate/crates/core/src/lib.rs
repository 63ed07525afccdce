//! Energy-adaptive OLT line-card control for TDM-PONs.
//!
//! The chassis powers line cards on and off as downstream load moves
//! between `(i-1)/L` and `i/L`, with listening windows of `M` cycles before
//! sleeping a card and `N` cycles before waking one. This crate provides the
//! closed-form savings ([`model`]), the semi-Markov steady-state analysis
//! ([`markov`]), traffic generators and a Hurst estimator ([`traffic`]), a
//! cycle-driven simulator ([`sim`]), switch-fabric models ([`fabric`]) and
//! the experiment runner behind the `pon-sleep` CLI ([`experiment`]).

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiment;
pub mod fabric;
pub mod markov;
pub mod model;
pub mod parallel;
pub mod sim;
pub mod traffic;

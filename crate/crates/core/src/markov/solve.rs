use serde::Serialize;

use super::{ChainState, MarkovError, TransitionMatrix};

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 1_000_000;
/// Acceptance bound on `||pi P - pi||_inf` for the direct solve.
const RESIDUAL_TOL: f64 = 1e-10;
const PIVOT_EPS: f64 = 1e-300;

/// Long-run probability of each chain state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    states: Vec<ChainState>,
    probs: Vec<f64>,
}

impl StationaryDistribution {
    /// Build from explicit probabilities (normalized here).
    pub fn from_probs(states: Vec<ChainState>, probs: Vec<f64>) -> Self {
        let total: f64 = probs.iter().sum();
        let probs = probs.into_iter().map(|p| p / total).collect();
        Self { states, probs }
    }

    /// All mass on one state.
    pub fn point_mass(states: Vec<ChainState>, at: ChainState) -> Self {
        let probs = states
            .iter()
            .map(|s| f64::from(u8::from(*s == at)))
            .collect();
        Self { states, probs }
    }

    pub fn states(&self) -> &[ChainState] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, state: ChainState) -> f64 {
        self.iter()
            .find(|(s, _)| *s == state)
            .map_or(0.0, |(_, p)| p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ChainState, f64)> + '_ {
        self.states.iter().copied().zip(self.probs.iter().copied())
    }

    /// Expected number of powered cards, `sum_i i * pi(state)`.
    pub fn mean_active_cards(&self) -> f64 {
        self.iter()
            .map(|(s, p)| f64::from(s.active_cards()) * p)
            .sum()
    }

    /// `||pi P - pi||_inf`.
    pub fn residual(&self, matrix: &TransitionMatrix) -> f64 {
        let next = step(matrix, &self.probs);
        next.iter()
            .zip(&self.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// One left-multiplication `x P`.
fn step(matrix: &TransitionMatrix, x: &[f64]) -> Vec<f64> {
    let n = matrix.dim();
    let mut out = vec![0.0; n];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for (o, &p) in out.iter_mut().zip(matrix.row(i)) {
            *o += xi * p;
        }
    }
    out
}

/// Solve `pi P = pi`, `sum pi = 1`.
///
/// Direct Gaussian elimination on the balance equations with the last one
/// replaced by the normalization row; falls back to power iteration on the
/// lazy chain `(I + P) / 2` when the system is singular or the residual is
/// poor.
pub fn solve_stationary(matrix: &TransitionMatrix) -> Result<StationaryDistribution, MarkovError> {
    matrix.check_stochastic(1e-9)?;
    let n = matrix.dim();
    let states = matrix.states().to_vec();
    if n == 1 {
        return Ok(StationaryDistribution {
            states,
            probs: vec![1.0],
        });
    }

    let support = structural_support(matrix);
    let probs = match direct_solve(matrix) {
        Some(p) if residual_of(matrix, &p) <= RESIDUAL_TOL => p,
        _ => power_iteration(matrix)?,
    };
    let mut probs: Vec<f64> = probs
        .into_iter()
        .zip(&support)
        .map(|(p, &live)| if live { p.max(0.0) } else { 0.0 })
        .collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(StationaryDistribution { states, probs })
}

fn residual_of(matrix: &TransitionMatrix, x: &[f64]) -> f64 {
    step(matrix, x)
        .iter()
        .zip(x)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn direct_solve(matrix: &TransitionMatrix) -> Option<Vec<f64>> {
    let n = matrix.dim();
    // A = P^T - I, last row all ones; b = e_n.
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[j * n + i] = matrix.entry(i, j);
        }
        a[i * n + i] -= 1.0;
    }
    a[(n - 1) * n..].fill(1.0);
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;

    for col in 0..n {
        let pivot =
            (col..n).max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))?;
        if a[pivot * n + col].abs() < PIVOT_EPS {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn power_iteration(matrix: &TransitionMatrix) -> Result<Vec<f64>, MarkovError> {
    let n = matrix.dim();
    let mut x = vec![1.0 / n as f64; n];
    let mut delta = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        let px = step(matrix, &x);
        let next: Vec<f64> = px.iter().zip(&x).map(|(a, b)| 0.5 * (a + b)).collect();
        delta = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        if delta < POWER_TOL {
            let total: f64 = x.iter().sum();
            return Ok(x.into_iter().map(|v| v / total).collect());
        }
    }
    Err(MarkovError::NonConvergence {
        iterations: POWER_MAX_ITER,
        delta,
    })
}

/// Recurrent states: `j` is recurrent iff every state reachable from `j`
/// can reach `j` back. Transient states carry no stationary mass.
fn structural_support(matrix: &TransitionMatrix) -> Vec<bool> {
    let n = matrix.dim();
    let reach: Vec<Vec<bool>> = (0..n).map(|s| reachable_from(matrix, s)).collect();
    (0..n)
        .map(|j| (0..n).all(|k| !reach[j][k] || reach[k][j]))
        .collect()
}

fn reachable_from(matrix: &TransitionMatrix, start: usize) -> Vec<bool> {
    let n = matrix.dim();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(i) = stack.pop() {
        for (j, &p) in matrix.row(i).iter().enumerate() {
            if p > 0.0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use ChainState::*;

    #[test]
    fn one_by_one() {
        let m = TransitionMatrix::from_rows(vec![Active(1)], vec![1.0]).unwrap();
        assert_eq!(solve_stationary(&m).unwrap().probs(), &[1.0]);
    }

    #[test]
    fn symmetric_two_state() {
        for p in [0.1, 0.5, 0.9] {
            let m = TransitionMatrix::from_rows(
                vec![Active(1), Active(2)],
                vec![1.0 - p, p, p, 1.0 - p],
            )
            .unwrap();
            let d = solve_stationary(&m).unwrap();
            assert!((d.probs()[0] - 0.5).abs() < 1e-14);
            assert!((d.probs()[1] - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn periodic_chain_still_solves() {
        let m = TransitionMatrix::from_rows(vec![Active(1), Active(2)], vec![0.0, 1.0, 1.0, 0.0])
            .unwrap();
        let d = solve_stationary(&m).unwrap();
        assert!((d.probs()[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn reducible_chain_falls_back() {
        // Two closed classes: direct solve is singular, lazy power iteration
        // converges to the mixture reached from the uniform start.
        let m = TransitionMatrix::from_rows(vec![Active(1), Active(2)], vec![1.0, 0.0, 0.0, 1.0])
            .unwrap();
        let d = solve_stationary(&m).unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(d.residual(&m) < 1e-12);
    }

    #[test]
    fn transient_states_get_zero() {
        // 0 -> 1 -> 2, 2 absorbing.
        let m = TransitionMatrix::from_rows(
            vec![Active(1), Active(2), Active(3)],
            vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let d = solve_stationary(&m).unwrap();
        assert_eq!(d.probs(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn non_stochastic_rejected() {
        let r = TransitionMatrix::from_rows(vec![Active(1), Active(2)], vec![0.5, 0.4, 0.0, 1.0]);
        assert!(matches!(r, Err(MarkovError::NotStochastic { row: 0, .. })));
    }
}

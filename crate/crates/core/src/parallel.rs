//! Order-preserving map over independent jobs: rayon when the `parallel`
//! feature is on, a plain loop otherwise.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Apply `f` to every item; results come back in input order either way.
pub fn map_ordered<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_preserved() {
        let xs: Vec<u64> = (0..1000).collect();
        let par = map_ordered(&xs, Execution::Parallel, |x| x * x);
        let seq = map_ordered(&xs, Execution::Sequential, |x| x * x);
        assert_eq!(par, seq);
        assert_eq!(par[999], 998_001);
    }
}

use serde::Serialize;

use super::{TrafficError, TrafficTrace};

/// Shortest series accepted by the estimator.
pub const MIN_CYCLES: usize = 1 << 10;
/// Aggregation levels run over `2^0 ..= 2^MAX_LEVEL_LOG2`.
pub const MAX_LEVEL_LOG2: u32 = 8;

/// Variance of block means at each aggregation level, and the fitted slope
/// of `log10 var` against `log10 m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceTime {
    pub levels: Vec<usize>,
    pub variances: Vec<f64>,
    pub slope: f64,
}

impl VarianceTime {
    /// `H = 1 + slope / 2`.
    pub fn hurst(&self) -> f64 {
        1.0 + self.slope / 2.0
    }
}

fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

/// Aggregated-variance analysis over non-overlapping blocks.
pub fn variance_time(series: &[f64]) -> Result<VarianceTime, TrafficError> {
    if series.len() < MIN_CYCLES {
        return Err(TrafficError::TooShort {
            got: series.len(),
            need: MIN_CYCLES,
        });
    }
    let mut levels = Vec::new();
    let mut variances = Vec::new();
    for k in 0..=MAX_LEVEL_LOG2 {
        let m = 1usize << k;
        let means: Vec<f64> = series
            .chunks_exact(m)
            .map(|c| c.iter().sum::<f64>() / m as f64)
            .collect();
        let v = variance(&means);
        if !(v > 0.0) {
            return Err(TrafficError::Degenerate);
        }
        levels.push(m);
        variances.push(v);
    }

    let xs: Vec<f64> = levels.iter().map(|&m| (m as f64).log10()).collect();
    let ys: Vec<f64> = variances.iter().map(|v| v.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(VarianceTime {
        levels,
        variances,
        slope: sxy / sxx,
    })
}

pub fn estimate_hurst_series(series: &[f64]) -> Result<f64, TrafficError> {
    variance_time(series).map(|vt| vt.hurst())
}

/// Hurst estimate of the per-cycle byte totals.
pub fn estimate_hurst(trace: &TrafficTrace) -> Result<f64, TrafficError> {
    estimate_hurst_series(&trace.byte_series())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn iid_noise_is_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xs: Vec<f64> = (0..1 << 16).map(|_| rng.random::<f64>()).collect();
        let h = estimate_hurst_series(&xs).unwrap();
        assert!((h - 0.5).abs() < 0.05, "{h}");
    }

    #[test]
    fn constant_is_degenerate() {
        let xs = vec![3.0; 4096];
        assert!(matches!(
            estimate_hurst_series(&xs),
            Err(TrafficError::Degenerate)
        ));
    }

    #[test]
    fn short_series_rejected() {
        let xs = vec![1.0; 1000];
        assert!(matches!(
            estimate_hurst_series(&xs),
            Err(TrafficError::TooShort {
                got: 1000,
                need: 1024
            })
        ));
    }

    #[test]
    fn random_walk_increments_persist() {
        // Blocks of a slowly varying level: strong persistence, H near 1.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut level = 0.0;
        let xs: Vec<f64> = (0..1 << 14)
            .map(|_| {
                level += rng.random::<f64>() - 0.5;
                level
            })
            .collect();
        assert!(estimate_hurst_series(&xs).unwrap() > 0.9);
    }
}

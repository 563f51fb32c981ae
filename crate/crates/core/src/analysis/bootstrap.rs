use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { resamples: 1000, level: 0.67, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
    pub level: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap interval of `statistic`.
///
/// Replicate `b` resamples `data` with replacement from its own random
/// stream; the statistic receives the resample and that stream for any
/// further randomness it needs.
pub fn bootstrap_ci<T, F>(data: &[T], statistic: F, cfg: &BootstrapConfig) -> Result<Interval>
where
    T: Clone + Send + Sync,
    F: Fn(&[T], &mut ChaCha8Rng) -> Result<f64> + Sync,
{
    if data.is_empty() {
        return Err(Error::EmptyInput("bootstrap data".into()));
    }
    if cfg.resamples < 100 {
        return Err(Error::Domain(format!("at least 100 bootstrap resamples required, got {}", cfg.resamples)));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::Domain(format!("confidence level must lie in (0, 1), got {}", cfg.level)));
    }
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stats = (0..cfg.resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = base.clone();
            rng.set_stream(b as u64);
            let sample: Vec<T> = (0..data.len()).map(|_| data[rng.gen_range(0..data.len())].clone()).collect();
            statistic(&sample, &mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - cfg.level) / 2.0;
    Ok(Interval { low: percentile(&stats, tail), high: percentile(&stats, 1.0 - tail), level: cfg.level })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: &[f64], _: &mut ChaCha8Rng) -> Result<f64> {
        Ok(xs.iter().sum::<f64>() / xs.len() as f64)
    }

    #[test]
    fn constant_data() {
        let ci = bootstrap_ci(&[2.5; 40], mean, &BootstrapConfig::default()).unwrap();
        assert_eq!((ci.low, ci.high), (2.5, 2.5));
    }

    #[test]
    fn deterministic() {
        let data: Vec<f64> = (0..200).map(|i| (i * 37 % 11) as f64).collect();
        let cfg = BootstrapConfig { resamples: 300, level: 0.67, seed: 8 };
        assert_eq!(bootstrap_ci(&data, mean, &cfg).unwrap(), bootstrap_ci(&data, mean, &cfg).unwrap());
    }

    #[test]
    fn errors() {
        let cfg = BootstrapConfig::default();
        assert!(matches!(bootstrap_ci::<f64, _>(&[], mean, &cfg), Err(Error::EmptyInput(_))));
        assert!(bootstrap_ci(&[1.0], mean, &BootstrapConfig { resamples: 10, ..cfg }).is_err());
    }

    #[test]
    fn percentile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(percentile(&v, 0.5), 1.5);
        assert_eq!(percentile(&v, 1.0), 3.0);
    }
}

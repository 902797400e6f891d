//! Compensated sums and Monte Carlo estimators.

use serde::Serialize;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// z-quantile for a two-sided 95 % normal interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Mean with a normal-approximation 95 % confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    /// Number of samples behind the mean.
    pub n: usize,
}

impl EstimateWithCI {
    pub fn new(mean: f64, stderr: f64, n: usize) -> Self {
        let stderr = if stderr.is_finite() { stderr.max(0.0) } else { 0.0 };
        Self {
            mean,
            stderr,
            ci95: (mean - Z95 * stderr, mean + Z95 * stderr),
            n,
        }
    }

    /// Sample mean and standard error of i.i.d. samples.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self::new(f64::NAN, 0.0, 0);
        }
        let mean = compensated_sum(samples.iter().copied()) / n as f64;
        let stderr = if n > 1 {
            let ss = compensated_sum(samples.iter().map(|x| (x - mean).powi(2)));
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self::new(mean, stderr, n)
    }

    /// Pooled per-element mean `Σ sums / Σ counts` over independent clusters
    /// (one cluster per trial), with the delta-method standard error of the
    /// ratio estimator. Clusters with a zero count still enter the variance.
    pub fn from_clusters(sums: &[f64], counts: &[usize]) -> Self {
        assert_eq!(sums.len(), counts.len());
        let clusters = sums.len();
        let total_n: usize = counts.iter().sum();
        if total_n == 0 {
            return Self::new(f64::NAN, 0.0, 0);
        }
        let mean = compensated_sum(sums.iter().copied()) / total_n as f64;
        let stderr = if clusters > 1 {
            let mean_count = total_n as f64 / clusters as f64;
            let ss = compensated_sum(
                sums.iter()
                    .zip(counts)
                    .map(|(s, &k)| (s - mean * k as f64).powi(2)),
            );
            (ss / (clusters - 1) as f64 / clusters as f64).sqrt() / mean_count
        } else {
            0.0
        };
        Self::new(mean, stderr, total_n)
    }
}

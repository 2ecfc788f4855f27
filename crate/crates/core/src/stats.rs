//! Binomial summaries of machine records.

use serde::Serialize;

/// z-score of a two-sided 95% normal interval.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinomialSummary {
    pub successes: u64,
    pub samples: u64,
    pub mean: f64,
    /// Normal-approximation 95% interval, clamped to `[0, 1]`.
    pub ci: [f64; 2],
}

pub fn summarize(successes: u64, samples: u64) -> BinomialSummary {
    assert!(samples > 0, "no samples to summarize");
    let n = samples as f64;
    let mean = successes as f64 / n;
    let half = Z_95 * (mean * (1.0 - mean) / n).sqrt();
    BinomialSummary {
        successes,
        samples,
        mean,
        ci: [(mean - half).max(0.0), (mean + half).min(1.0)],
    }
}

/// `k` standard errors of a Bernoulli(p) mean over `n` samples.
pub fn sigma_bound(p: f64, n: u64, k: f64) -> f64 {
    k * (p * (1.0 - p) / n as f64).sqrt()
}

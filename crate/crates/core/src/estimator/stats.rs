//! Batch-means error estimation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_BATCHES: usize = 20;
pub const DEFAULT_BATCHES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    /// ½·(batch variance / naive variance); 0.5 for independent samples.
    pub tau_int: f64,
    pub naive_stderr: f64,
}

/// Batch boundaries i·n/B, so every sample is used.
fn batch_sums(xs: &[f64], batches: usize) -> Vec<(f64, usize)> {
    let n = xs.len();
    (0..batches)
        .map(|i| {
            let s = &xs[i * n / batches..(i + 1) * n / batches];
            (s.iter().sum(), s.len())
        })
        .collect()
}

/// Batch means pooled over several chains, each split into `batches`.
/// Chains are combined in the given order.
pub fn pooled_batch_means(chains: &[&[f64]], batches: usize) -> Result<BatchStats> {
    if batches < MIN_BATCHES {
        return Err(Error::Config(format!("need at least {MIN_BATCHES} batches, got {batches}")));
    }
    let n: usize = chains.iter().map(|c| c.len()).sum();
    if n == 0 {
        return Err(Error::InsufficientData("no retained samples".into()));
    }
    if let Some(c) = chains.iter().find(|c| c.len() < batches) {
        return Err(Error::InsufficientData(format!("{} samples cannot fill {batches} batches", c.len())));
    }
    let mut sums = Vec::with_capacity(chains.len() * batches);
    for c in chains {
        sums.extend(batch_sums(c, batches));
    }
    let total: f64 = sums.iter().map(|s| s.0).sum();
    let mean = total / n as f64;
    let nb = sums.len() as f64;
    // batch means weighted by length: Var(mean) ≈ Σ (b_i/n)²(m_i − mean)² · B/(B−1)
    let var_mean = sums
        .iter()
        .map(|&(s, len)| {
            let d = s / len as f64 - mean;
            (len as f64 / n as f64).powi(2) * d * d
        })
        .sum::<f64>()
        * nb
        / (nb - 1.0);
    let var_naive = if n > 1 {
        chains.iter().flat_map(|c| c.iter()).map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0) / n as f64
    } else {
        0.0
    };
    let tau_int = if var_naive > 0.0 { 0.5 * var_mean / var_naive } else { 0.5 };
    Ok(BatchStats { mean, stderr: var_mean.sqrt(), n: n as u64, tau_int, naive_stderr: var_naive.sqrt() })
}

pub fn batch_means(xs: &[f64], batches: usize) -> Result<BatchStats> {
    pooled_batch_means(&[xs], batches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_series() {
        let s = batch_means(&[1.0; 100], 32).unwrap();
        assert_eq!((s.mean, s.stderr, s.n), (1.0, 0.0, 100));
    }

    #[test]
    fn rejects_short_series() {
        assert!(matches!(batch_means(&[], 32), Err(Error::InsufficientData(_))));
        assert!(matches!(batch_means(&[0.0; 10], 32), Err(Error::InsufficientData(_))));
        assert!(matches!(batch_means(&[0.0; 100], 10), Err(Error::Config(_))));
    }

    #[test]
    fn iid_error_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..64_000).map(|_| rng.random::<f64>()).collect();
        let s = batch_means(&xs, 32).unwrap();
        assert!((s.mean - 0.5).abs() < 4.0 * s.stderr);
        // 32 batches give the error to about ±25%
        assert!((s.stderr / s.naive_stderr - 1.0).abs() < 0.35, "{s:?}");
    }

    #[test]
    fn ar1_inflates_error() {
        // τ_int = ½(1 + φ)/(1 − φ) = 4.5 at φ = 0.8
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = 0.8 * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect();
        let s = batch_means(&xs, 32).unwrap();
        assert!(s.stderr > s.naive_stderr);
        assert!((s.tau_int - 4.5).abs() < 1.5, "{s:?}");
    }
}

//! Monte Carlo error bars: batch means over parallel chains and
//! autocorrelation-based effective sample sizes.

use serde::{Deserialize, Serialize};

use crate::defaults::BATCH_COUNT;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two points.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Integrated autocorrelation time with Sokal's self-consistent window
/// (`M ≥ 5 τ`). Returns 1 for constant or very short series.
pub fn integrated_autocorrelation_time(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return 1.0;
    }
    let m = mean(xs);
    let c0 = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..n / 2 {
        let c: f64 = xs[..n - lag]
            .iter()
            .zip(&xs[lag..])
            .map(|(a, b)| (a - m) * (b - m))
            .sum::<f64>()
            / n as f64;
        tau += 2.0 * c / c0;
        if lag as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// `n / τ` for one chain.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    xs.len() as f64 / integrated_autocorrelation_time(xs)
}

/// A Monte Carlo estimate with its batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    /// Sum of per-chain effective sample sizes.
    pub ess: f64,
    pub n: usize,
}

/// Contiguous batches of every chain, about [`BATCH_COUNT`] in total.
pub fn batches(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    let per_chain = BATCH_COUNT.div_ceil(chains.len().max(1)).max(2);
    let mut out = Vec::new();
    for c in chains {
        let size = c.len() / per_chain;
        if size == 0 {
            if !c.is_empty() {
                out.push(&c[..]);
            }
            continue;
        }
        out.extend(c.chunks_exact(size).take(per_chain));
    }
    out
}

/// Mean of a statistic over batches with its standard error
/// `sd(batch values) / √B`. The statistic sees one batch at a time.
pub fn batch_statistic(chains: &[Vec<f64>], stat: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let values: Vec<f64> = batches(chains).into_iter().map(stat).collect();
    let b = values.len();
    let se = if b < 2 {
        f64::INFINITY
    } else {
        (variance(&values) / b as f64).sqrt()
    };
    (mean(&values), se)
}

/// Pooled mean of per-chain series with batch-means error and ESS.
pub fn estimate_mean(chains: &[Vec<f64>]) -> Estimate {
    let n: usize = chains.iter().map(Vec::len).sum();
    let value = chains.iter().flatten().sum::<f64>() / n as f64;
    let (_, stderr) = batch_statistic(chains, mean);
    let ess = chains.iter().map(|c| effective_sample_size(c)).sum();
    Estimate {
        value,
        stderr,
        ess,
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn iid_series_has_unit_autocorrelation_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let tau = integrated_autocorrelation_time(&xs);
        assert!((tau - 1.0).abs() < 0.1, "{tau}");
    }

    #[test]
    fn ar1_autocorrelation_time_matches_closed_form() {
        // τ = (1 + φ) / (1 - φ) for an AR(1) process.
        let phi: f64 = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = phi * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect();
        let tau = integrated_autocorrelation_time(&xs);
        assert!((tau - 9.0).abs() < 1.0, "{tau}");
    }

    #[test]
    fn batch_error_matches_iid_standard_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let chains: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..8_000).map(|_| rng.random::<f64>()).collect())
            .collect();
        let e = estimate_mean(&chains);
        let iid = (1.0f64 / 12.0 / 32_000.0).sqrt();
        assert!((e.value - 0.5).abs() < 4.0 * iid);
        assert!(e.stderr > 0.5 * iid && e.stderr < 2.0 * iid, "{} vs {iid}", e.stderr);
        assert!(e.ess > 25_000.0);
    }

    #[test]
    fn constant_series_has_zero_error() {
        let e = estimate_mean(&[vec![1.0; 100], vec![1.0; 100]]);
        assert_eq!((e.value, e.stderr), (1.0, 0.0));
    }
}

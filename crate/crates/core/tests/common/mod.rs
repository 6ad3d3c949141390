#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson statistic of `counts` against a uniform expectation, and the
/// critical value at significance `alpha`.
pub fn chi_square_uniform(counts: &[u64], alpha: f64) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dof = (counts.len() - 1) as f64;
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(1.0 - alpha);
    (stat, critical)
}

/// Total-variation distance between empirical `counts` and uniform.
pub fn tv_from_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let u = 1.0 / counts.len() as f64;
    0.5 * counts
        .iter()
        .map(|&c| (c as f64 / total as f64 - u).abs())
        .sum::<f64>()
}

/// Nodes ranked by count, highest first (ties by index).
pub fn ranked(counts: &[u64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..counts.len()).collect();
    idx.sort_by_key(|&i| (std::cmp::Reverse(counts[i]), i));
    idx
}

/// Circular distance on a ring of `n` nodes.
pub fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

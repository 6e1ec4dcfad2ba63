//! Brute-force reference implementations, deliberately naive.
#![allow(dead_code)]

/// Relative tie band shared with the library's argmax/argmin rules.
pub const TIE: f64 = 1e-12;

/// Split `s` in `1..n` maximizing `|Σ_{i<s}(w_i − w̄)|`, each prefix summed afresh.
pub fn cusum_oracle(w: &[f64]) -> usize {
    let n = w.len();
    let mean = w.iter().sum::<f64>() / n as f64;
    let stats: Vec<f64> = (1..n)
        .map(|s| w[..s].iter().map(|v| v - mean).sum::<f64>().abs())
        .collect();
    let max = stats.iter().copied().fold(f64::MIN, f64::max);
    let band = TIE * w.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    1 + stats.iter().position(|&c| c >= max - band).unwrap()
}

fn population_variance(s: &[f64]) -> f64 {
    let m = s.iter().sum::<f64>() / s.len() as f64;
    s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / s.len() as f64
}

/// `S(z)` for `z = margin..=n − margin`, by two-pass variances of each side.
pub fn split_scan_oracle(w: &[f64], margin: usize) -> Vec<f64> {
    (margin..=w.len() - margin)
        .map(|z| population_variance(&w[..z]) + population_variance(&w[z..]))
        .collect()
}

/// Largest `z` attaining the minimum of [`split_scan_oracle`].
pub fn split_argmin_oracle(w: &[f64], margin: usize) -> usize {
    let s = split_scan_oracle(w, margin);
    let min = s.iter().copied().fold(f64::MAX, f64::min);
    let band = TIE * min.abs().max(f64::MIN_POSITIVE);
    margin + s.iter().rposition(|&v| v <= min + band).unwrap()
}

/// Deterministic pseudo-random sequences for oracle comparisons:
/// Gaussian noise, optionally on top of a random staircase.
pub fn random_sequence(seed: u64, len: usize) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let steps = rng.random_range(0..4usize);
    let mut cuts: Vec<usize> = (0..steps).map(|_| rng.random_range(1..len)).collect();
    cuts.sort_unstable();
    let levels: Vec<f64> = (0..=steps).map(|_| rng.random_range(-5.0..5.0)).collect();
    let noise = rng.random_range(0.01..2.0);
    (0..len)
        .map(|i| {
            let level = levels[cuts.iter().filter(|&&c| c <= i).count()];
            let z: f64 = StandardNormal.sample(&mut rng);
            level + noise * z
        })
        .collect()
}

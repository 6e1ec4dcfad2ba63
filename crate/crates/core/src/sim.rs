//! Exact Gaussian simulation of fractional Brownian motion and simple
//! fractional Brownian motion (sfBm).
//!
//! Paths on a lattice are drawn by circulant embedding of the fractional
//! Gaussian noise covariance. Grids whose times do not share a usable common
//! lattice (geometric grids with large `λ^M` or irrational ratios) are sampled
//! exactly through a Cholesky factor of the increment correlation matrix.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{scale_interval_index, SamplingGrid, TimeSeries};

/// Eigenvalues in `(-CLAMP_TOLERANCE * max, 0)` are treated as zero.
const CLAMP_TOLERANCE: f64 = 1e-8;
const MAX_EMBEDDING_DOUBLINGS: usize = 4;
/// Largest lattice (in points) the circulant sampler will build for an irregular grid.
const MAX_LATTICE_POINTS: usize = 1 << 21;
/// Largest number of grid points sampled through a dense Cholesky factor.
const MAX_DENSE_POINTS: usize = 4096;

/// Random stream for `(seed, stream)`.
///
/// ChaCha streams are independent for a fixed key, so Monte Carlo repetition
/// `r` uses stream `r` and never depends on scheduling order.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("Hurst index must lie in (0,1), got {hurst}")))
    }
}

/// Parameters `(λ, H, H′)` of simple fractional Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SfbmParams {
    pub lambda: f64,
    pub hurst: f64,
    pub hurst_prime: f64,
}

impl SfbmParams {
    pub fn new(lambda: f64, hurst: f64, hurst_prime: f64) -> Result<Self> {
        let params = Self {
            lambda,
            hurst,
            hurst_prime,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 1.0) || !self.lambda.is_finite() {
            return Err(Error::domain(format!("scale must exceed 1, got {}", self.lambda)));
        }
        check_hurst(self.hurst)?;
        check_hurst(self.hurst_prime)
    }

    /// Multiplier `λ^{(n-1)(H-H′)}` applied to `B_{H′}(t)` in scale interval `n`.
    pub fn interval_factor(&self, t: f64) -> f64 {
        let n_minus_one = scale_interval_index(t, self.lambda) as f64;
        self.lambda.powf(n_minus_one * (self.hurst - self.hurst_prime))
    }
}

/// Autocovariance of unit-step fractional Gaussian noise,
/// `γ(k) = ½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.
pub fn fgn_autocovariance(hurst: f64, lag: usize) -> Result<f64> {
    check_hurst(hurst)?;
    Ok(autocov(hurst, lag))
}

fn autocov(hurst: f64, lag: usize) -> f64 {
    if lag == 0 {
        return 1.0;
    }
    let h2 = 2.0 * hurst;
    let k = lag as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).powf(h2))
}

/// Eigenvalues of the minimal circulant embedding of `γ(0..=size/2)`.
///
/// `size` must be even. Exposed for the positive-semidefiniteness checks.
pub fn circulant_eigenvalues(hurst: f64, size: usize) -> Result<Vec<f64>> {
    check_hurst(hurst)?;
    if size < 2 || !size.is_multiple_of(2) {
        return Err(Error::domain(format!("embedding size must be even and >= 2, got {size}")));
    }
    let half = size / 2;
    let mut row: Vec<Complex<f64>> = (0..size)
        .map(|j| {
            let lag = if j <= half { j } else { size - j };
            Complex::new(autocov(hurst, lag), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(size).process(&mut row);
    Ok(row.into_iter().map(|c| c.re).collect())
}

/// Reusable sampler of unit-step fractional Gaussian noise of fixed length.
pub struct FgnGenerator {
    hurst: f64,
    len: usize,
    sqrt_eigenvalues: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FgnGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FgnGenerator")
            .field("hurst", &self.hurst)
            .field("len", &self.len)
            .field("embedding", &self.sqrt_eigenvalues.len())
            .finish()
    }
}

impl FgnGenerator {
    pub fn new(hurst: f64, len: usize) -> Result<Self> {
        check_hurst(hurst)?;
        if len == 0 {
            return Err(Error::domain("fGn length must be positive"));
        }
        let mut size = (2 * len.saturating_sub(1)).max(2).next_power_of_two();
        let mut attempt = 0;
        loop {
            let eigs = circulant_eigenvalues(hurst, size)?;
            let max = eigs.iter().copied().fold(f64::MIN, f64::max);
            let min = eigs.iter().copied().fold(f64::MAX, f64::min);
            if min >= -CLAMP_TOLERANCE * max {
                let scale = 1.0 / size as f64;
                let sqrt_eigenvalues = eigs.iter().map(|&e| (e.max(0.0) * scale).sqrt()).collect();
                let fft = FftPlanner::new().plan_fft_forward(size);
                return Ok(Self {
                    hurst,
                    len,
                    sqrt_eigenvalues,
                    fft,
                });
            }
            if attempt == MAX_EMBEDDING_DOUBLINGS {
                return Err(Error::Embedding {
                    size,
                    min_eigenvalue: min,
                });
            }
            attempt += 1;
            size *= 2;
        }
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Size of the circulant embedding in use.
    pub fn embedding_size(&self) -> usize {
        self.sqrt_eigenvalues.len()
    }

    /// One exact fGn draw with unit variance.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = self
            .sqrt_eigenvalues
            .iter()
            .map(|&s| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.truncate(self.len);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// A sampled fBm path on an equally spaced grid starting at time 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmPath {
    pub hurst: f64,
    pub grid_step: f64,
    pub values: Vec<f64>,
}

impl FbmPath {
    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len())
            .map(|i| i as f64 * self.grid_step)
            .collect()
    }
}

/// fBm at times `0, step, 2·step, …` (`n_points` values, first is 0).
pub fn simulate_fbm(hurst: f64, n_points: usize, grid_step: f64, seed: u64) -> Result<FbmPath> {
    check_hurst(hurst)?;
    if n_points == 0 {
        return Err(Error::domain("fBm path needs at least one point"));
    }
    if !(grid_step > 0.0) || !grid_step.is_finite() {
        return Err(Error::domain(format!("grid step must be positive, got {grid_step}")));
    }
    let mut values = Vec::with_capacity(n_points);
    values.push(0.0);
    if n_points > 1 {
        let gen = FgnGenerator::new(hurst, n_points - 1)?;
        let noise = gen.sample(&mut rng_for(seed, 0));
        let scale = grid_step.powf(hurst);
        let mut level = 0.0;
        for z in noise {
            level += z;
            values.push(level * scale);
        }
    }
    Ok(FbmPath {
        hurst,
        grid_step,
        values,
    })
}

/// Draw `B_H(t)` jointly at increasing positive `times` (with `B_H(0) = 0`).
pub fn sample_fbm_at<R: rand::Rng + ?Sized>(hurst: f64, times: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    check_hurst(hurst)?;
    if times.is_empty() {
        return Ok(Vec::new());
    }
    if !(times[0] > 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("fBm sample times must be positive and strictly increasing"));
    }
    if let Some((step, indices)) = common_lattice(times) {
        let last = *indices.last().expect("non-empty");
        let noise = FgnGenerator::new(hurst, last)?.sample(rng);
        let scale = step.powf(hurst);
        let mut path = Vec::with_capacity(last + 1);
        path.push(0.0);
        let mut level = 0.0;
        for z in noise {
            level += z;
            path.push(level * scale);
        }
        return Ok(indices.into_iter().map(|i| path[i]).collect());
    }
    if times.len() > MAX_DENSE_POINTS {
        return Err(Error::domain(format!(
            "grid of {} points has no common lattice below {} points and is too large for dense sampling",
            times.len(),
            MAX_LATTICE_POINTS
        )));
    }
    sample_dense(hurst, times, rng)
}

/// Find `h` with every time an integer multiple of `h`; returns `h` and the multiples.
fn common_lattice(times: &[f64]) -> Option<(f64, Vec<usize>)> {
    let min_gap = times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(times[0], f64::min);
    let t_max = *times.last()?;
    (1..=64).find_map(|p| {
        let h = min_gap / p as f64;
        if t_max / h > MAX_LATTICE_POINTS as f64 {
            return None;
        }
        let mut indices = Vec::with_capacity(times.len());
        for &t in times {
            let q = t / h;
            let r = q.round();
            if (q - r).abs() > 1e-9 * q.max(1.0) || r < 1.0 {
                return None;
            }
            indices.push(r as usize);
        }
        Some((h, indices))
    })
}

/// `|x + δ|^{2H} − |x|^{2H}` for `x, δ >= 0`, without cancellation when `δ ≪ x`.
fn power_step(x: f64, delta: f64, h2: f64) -> f64 {
    if x == 0.0 {
        delta.powf(h2)
    } else {
        x.powf(h2) * (h2 * (delta / x).ln_1p()).exp_m1()
    }
}

/// `Cov(B(a1) − B(a0), B(b1) − B(b0))` for `b1 <= a0` or identical intervals.
fn increment_covariance(a0: f64, a1: f64, b0: f64, b1: f64, h2: f64) -> f64 {
    if a0 == b0 {
        return (a1 - a0).powf(h2);
    }
    let db = b1 - b0;
    0.5 * (power_step(a1 - b1, db, h2) - power_step(a0 - b1, db, h2))
}

fn sample_dense<R: rand::Rng + ?Sized>(hurst: f64, times: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let n = times.len();
    let h2 = 2.0 * hurst;
    let left = |i: usize| if i == 0 { 0.0 } else { times[i - 1] };
    let sd: Vec<f64> = (0..n).map(|i| (times[i] - left(i)).powf(hurst)).collect();
    let mut corr = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        corr[(i, i)] = 1.0;
        for j in 0..i {
            let c = increment_covariance(left(i), times[i], left(j), times[j], h2) / (sd[i] * sd[j]);
            corr[(i, j)] = c;
            corr[(j, i)] = c;
        }
    }
    let factor = match corr.clone().cholesky() {
        Some(f) => f,
        None => {
            for i in 0..n {
                corr[(i, i)] += 1e-12;
            }
            corr.cholesky()
                .ok_or_else(|| Error::degenerate("fBm increment covariance is not positive definite"))?
        }
    };
    let z = nalgebra::DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
    let increments = factor.l() * z;
    let mut level = 0.0;
    Ok(increments
        .iter()
        .zip(&sd)
        .map(|(dz, s)| {
            level += dz * s;
            level
        })
        .collect())
}

/// Simple fractional Brownian motion on `grid`:
/// `X(t) = λ^{(n−1)(H−H′)} B_{H′}(t)` for `t ∈ [λ^{n−1}, λ^n)`, with one shared `B_{H′}`.
pub fn simulate_sfbm(params: &SfbmParams, grid: &SamplingGrid, seed: u64) -> Result<TimeSeries> {
    let (times, base) = simulate_sfbm_with_base(params, grid, seed)?;
    let values = times
        .iter()
        .zip(&base)
        .map(|(&t, &b)| params.interval_factor(t) * b)
        .collect();
    TimeSeries::new(times, values)
}

/// Like [`simulate_sfbm`], also returning the underlying `B_{H′}` samples.
pub fn simulate_sfbm_with_base(
    params: &SfbmParams,
    grid: &SamplingGrid,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate()?;
    let times = grid.times()?;
    if let Some(end) = grid.geometric_end() {
        if let Some(t) = times.iter().find(|&&t| !(1.0..end).contains(&t)) {
            return Err(Error::domain(format!("grid time {t} outside [1, {end})")));
        }
    }
    let base = sample_fbm_at(params.hurst_prime, &times, &mut rng_for(seed, 0))?;
    Ok((times, base))
}

/// Quasi-Lamperti transform `Y(n) = α^{−nH} X(α^n)` of a series observed at `α^n`.
///
/// The output is indexed by the exponents `n`.
pub fn lamperti_stationarize(x: &TimeSeries, hurst: f64, alpha: f64) -> Result<TimeSeries> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must exceed 1, got {alpha}")));
    }
    if !hurst.is_finite() {
        return Err(Error::domain("Hurst index must be finite"));
    }
    let times = x.times();
    let Some(&t0) = times.first() else {
        return Ok(x.clone());
    };
    let n0 = (t0.ln() / alpha.ln()).round() as i64;
    let mut exps = Vec::with_capacity(times.len());
    let mut values = Vec::with_capacity(times.len());
    for (i, (&t, &v)) in times.iter().zip(x.values()).enumerate() {
        let n = n0 + i as i64;
        let expected = alpha.powf(n as f64);
        if (t - expected).abs() > 1e-9 * expected {
            return Err(Error::domain(format!(
                "time {t} at index {i} is not alpha^{n} = {expected}"
            )));
        }
        exps.push(n as f64);
        values.push((-(n as f64) * hurst * alpha.ln()).exp() * v);
    }
    TimeSeries::new(exps, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocovariance_values() {
        assert_eq!(fgn_autocovariance(0.5, 0).unwrap(), 1.0);
        assert!(fgn_autocovariance(0.5, 1).unwrap().abs() < 1e-15);
        let expected = 0.5 * (2f64.powf(1.4) - 2.0);
        assert!((fgn_autocovariance(0.7, 1).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.3195).abs() < 1e-4);
        assert!(fgn_autocovariance(1.0, 1).is_err());
        assert!(fgn_autocovariance(0.0, 1).is_err());
    }

    #[test]
    fn single_point_path_is_zero() {
        let p = simulate_fbm(0.3, 1, 1.0, 9).unwrap();
        assert_eq!(p.values, vec![0.0]);
    }

    #[test]
    fn fbm_is_deterministic_per_seed() {
        let a = simulate_fbm(0.7, 1000, 0.5, 42).unwrap();
        let b = simulate_fbm(0.7, 1000, 0.5, 42).unwrap();
        let c = simulate_fbm(0.7, 1000, 0.5, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        assert_eq!(a.values[0], 0.0);
    }

    #[test]
    fn lattice_detection() {
        let (h, idx) = common_lattice(&[1.0, 3.0, 5.0]).unwrap();
        assert_eq!(h, 1.0);
        assert_eq!(idx, vec![1, 3, 5]);
        let (h, idx) = common_lattice(&[1.0, 1.5, 2.0]).unwrap();
        assert_eq!(h, 0.5);
        assert_eq!(idx, vec![2, 3, 4]);
        assert!(common_lattice(&[1.0, 1.0 + std::f64::consts::PI]).is_none());
    }

    #[test]
    fn power_step_matches_naive_for_moderate_inputs() {
        let (x, d, h2): (f64, f64, f64) = (3.0, 0.7, 1.4);
        let naive = (x + d).powf(h2) - x.powf(h2);
        assert!((power_step(x, d, h2) - naive).abs() < 1e-12);
    }

    #[test]
    fn dense_and_lattice_samplers_agree_on_covariance() {
        // Monte Carlo check that the dense sampler reproduces Var B(t) = t^{2H}.
        let times = [1.0, 1.7, 4.2];
        let h = 0.35;
        let mut rng = rng_for(1, 0);
        let reps = 20_000;
        let mut acc = [0.0; 3];
        for _ in 0..reps {
            let v = sample_dense(h, &times, &mut rng).unwrap();
            for i in 0..3 {
                acc[i] += v[i] * v[i];
            }
        }
        for i in 0..3 {
            let var = acc[i] / reps as f64;
            let target = times[i].powf(2.0 * h);
            assert!((var / target - 1.0).abs() < 0.05, "t={} var={var} target={target}", times[i]);
        }
    }

    #[test]
    fn sfbm_equal_indices_is_plain_fbm() {
        let params = SfbmParams::new(2.0, 0.4, 0.4).unwrap();
        let grid = SamplingGrid::Uniform { end: 201.0, steps: 200 };
        let (times, base) = simulate_sfbm_with_base(&params, &grid, 3).unwrap();
        let x = simulate_sfbm(&params, &grid, 3).unwrap();
        assert_eq!(x.times(), &times[..]);
        assert_eq!(x.values(), &base[..]);
    }

    #[test]
    fn sfbm_piecewise_factor_is_exact() {
        let params = SfbmParams::new(2.0, 0.9, 0.2).unwrap();
        let grid = SamplingGrid::Uniform { end: 1025.0, steps: 1024 };
        let (times, base) = simulate_sfbm_with_base(&params, &grid, 5).unwrap();
        let x = simulate_sfbm(&params, &grid, 5).unwrap();
        assert_eq!(x.values()[0], base[0]);
        for ((&t, &v), &b) in times.iter().zip(x.values()).zip(&base) {
            let n = scale_interval_index(t, 2.0) as f64;
            let factor = 2f64.powf(n * 0.7);
            assert!((v - factor * b).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn sfbm_rejects_times_beyond_geometric_end() {
        let params = SfbmParams::new(2.0, 0.9, 0.2).unwrap();
        let grid = SamplingGrid::Geometric {
            lambda: 2.0,
            points_per_interval: 8,
            intervals: 4,
        };
        assert!(simulate_sfbm(&params, &grid, 0).is_ok());
        assert!(SfbmParams::new(1.0, 0.5, 0.5).is_err());
        assert!(SfbmParams::new(2.0, 1.5, 0.5).is_err());
    }

    #[test]
    fn lamperti_examples() {
        let alpha: f64 = 2.0;
        let h = 0.3;
        let times: Vec<f64> = (1..=6).map(|n| alpha.powi(n)).collect();
        let values: Vec<f64> = times.iter().map(|t| t.powf(h)).collect();
        let x = TimeSeries::new(times.clone(), values).unwrap();
        let y = lamperti_stationarize(&x, h, alpha).unwrap();
        assert!(y.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert_eq!(y.times()[0], 1.0);

        let raw = TimeSeries::new(times.clone(), vec![3.0; 6]).unwrap();
        let same = lamperti_stationarize(&raw, 0.0, alpha).unwrap();
        assert_eq!(same.values(), raw.values());

        let one = TimeSeries::new(vec![2.0], vec![4.0]).unwrap();
        let y = lamperti_stationarize(&one, 0.5, 2.0).unwrap();
        assert!((y.values()[0] - 2.8284).abs() < 1e-4);

        let bad = TimeSeries::new(vec![2.0, 4.1], vec![0.0, 0.0]).unwrap();
        assert!(lamperti_stationarize(&bad, 0.5, 2.0).is_err());
    }
}

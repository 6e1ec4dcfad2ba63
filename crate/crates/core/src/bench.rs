//! Monte Carlo mean-square-error study of the Hurst estimators on fBm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hurst::{self, HurstMethod};
use crate::numeric::{self, NeumaierSum};
use crate::sim::{self, FgnGenerator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSettings {
    pub hursts: Vec<f64>,
    /// Samples per path.
    pub n: usize,
    pub repetitions: usize,
    pub methods: Vec<HurstMethod>,
    pub k_max: usize,
    pub seed: u64,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            hursts: (1..=9).map(|i| i as f64 / 10.0).collect(),
            n: 10_000,
            repetitions: 500,
            methods: vec![
                HurstMethod::RatioOrder1,
                HurstMethod::RatioOrder2,
                HurstMethod::QuadraticVariation,
            ],
            k_max: hurst::DEFAULT_MAX_STRIDE,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub true_h: f64,
    pub method: HurstMethod,
    pub n: usize,
    pub repetitions: usize,
    pub mean_estimate: f64,
    pub bias: f64,
    /// Population variance of the estimates.
    pub variance: f64,
    pub mse: f64,
}

impl BenchRow {
    /// Summary of `estimates` against `true_h`.
    pub fn from_estimates(true_h: f64, method: HurstMethod, n: usize, estimates: &[f64]) -> Self {
        let reps = estimates.len() as f64;
        let mean = numeric::mean(estimates);
        let variance = numeric::centered_sum_of_squares(estimates) / reps;
        let sq: NeumaierSum = estimates.iter().map(|&e| (e - true_h) * (e - true_h)).collect();
        Self {
            true_h,
            method,
            n,
            repetitions: estimates.len(),
            mean_estimate: mean,
            bias: mean - true_h,
            variance,
            mse: sq.total() / reps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
}

impl BenchResult {
    pub fn row(&self, true_h: f64, method: HurstMethod) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.true_h == true_h)
    }
}

/// Estimates for every repetition, in repetition order, per method.
///
/// Repetition `r` draws its path from random stream `r` of `seed`, so the
/// result does not depend on how the work is scheduled.
pub fn estimates_for(
    hurst: f64,
    n: usize,
    repetitions: usize,
    methods: &[HurstMethod],
    k_max: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return Err(Error::domain("benchmark paths need at least 2 samples"));
    }
    let gen = FgnGenerator::new(hurst, n - 1)?;
    let per_rep: Vec<Vec<f64>> = (0..repetitions)
        .into_par_iter()
        .map(|r| {
            let noise = gen.sample(&mut sim::rng_for(seed, r as u64));
            let mut path = Vec::with_capacity(n);
            path.push(0.0);
            let mut level = 0.0;
            for z in noise {
                level += z;
                path.push(level);
            }
            methods
                .iter()
                .map(|&m| hurst::estimate(&path, m, k_max).map(|e| e.combined))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..methods.len())
        .map(|i| per_rep.iter().map(|rep| rep[i]).collect())
        .collect())
}

pub fn run_bench(settings: &BenchSettings) -> Result<BenchResult> {
    if settings.repetitions == 0 {
        return Err(Error::Config("repetitions must be >= 1".into()));
    }
    if settings.methods.is_empty() || settings.hursts.is_empty() {
        return Err(Error::Config("benchmark needs at least one method and one H".into()));
    }
    let mut rows = Vec::new();
    for &h in &settings.hursts {
        let est = estimates_for(
            h,
            settings.n,
            settings.repetitions,
            &settings.methods,
            settings.k_max,
            settings.seed,
        )?;
        for (&m, e) in settings.methods.iter().zip(&est) {
            rows.push(BenchRow::from_estimates(h, m, settings.n, e));
        }
    }
    Ok(BenchResult { rows })
}

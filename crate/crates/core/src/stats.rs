//! Increments and the variance statistics built on them: sample variance,
//! moving sample variance `V_i`, its moving average `W_i`, running sums
//! `U_i`, and per-scale-interval variances `S_k²(λ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, NeumaierSum};
use crate::series::TimeSeries;

/// Default moving-sample-variance window `b*`.
pub const DEFAULT_MSV_WINDOW: usize = 10;
/// Default moving-average window `d*`.
pub const DEFAULT_AVERAGE_WINDOW: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IncrementOrder {
    First,
    Second,
}

impl IncrementOrder {
    pub fn as_usize(self) -> usize {
        match self {
            IncrementOrder::First => 1,
            IncrementOrder::Second => 2,
        }
    }
}

impl TryFrom<usize> for IncrementOrder {
    type Error = Error;

    fn try_from(order: usize) -> Result<Self> {
        match order {
            1 => Ok(IncrementOrder::First),
            2 => Ok(IncrementOrder::Second),
            other => Err(Error::domain(format!("increment order must be 1 or 2, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSeries {
    pub order: IncrementOrder,
    pub values: Vec<f64>,
    /// Time of each increment's left endpoint.
    pub source_times: Vec<f64>,
}

/// Order-1 (`x_{i+1} − x_i`) or order-2 (`x_{i+2} − 2x_{i+1} + x_i`) differences.
pub fn difference(values: &[f64], order: IncrementOrder) -> Result<Vec<f64>> {
    let d = order.as_usize();
    if values.len() < d + 1 {
        return Err(Error::domain(format!(
            "order-{d} increments need at least {} samples, got {}",
            d + 1,
            values.len()
        )));
    }
    Ok(match order {
        IncrementOrder::First => values.windows(2).map(|w| w[1] - w[0]).collect(),
        IncrementOrder::Second => values.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect(),
    })
}

pub fn increments(x: &TimeSeries, order: IncrementOrder) -> Result<IncrementSeries> {
    let values = difference(x.values(), order)?;
    let source_times = x.times()[..values.len()].to_vec();
    Ok(IncrementSeries {
        order,
        values,
        source_times,
    })
}

/// Unbiased sample variance, `1/(n−1) Σ (v_i − v̄)²`.
pub fn sample_variance(v: &[f64]) -> Result<f64> {
    if v.len() < 2 {
        return Err(Error::domain(format!("sample variance needs >= 2 values, got {}", v.len())));
    }
    Ok(numeric::centered_sum_of_squares(v) / (v.len() - 1) as f64)
}

/// `V_i` = sample variance of the window `y[i .. i + b*]`, for `i = 0..=n − b*`.
pub fn moving_sample_variance(y: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 2 {
        return Err(Error::domain(format!("MSV window must be >= 2, got {window}")));
    }
    if y.len() < window {
        return Err(Error::domain(format!(
            "MSV window {window} exceeds {} increments",
            y.len()
        )));
    }
    Ok(y
        .windows(window)
        .map(|w| numeric::centered_sum_of_squares(w) / (window - 1) as f64)
        .collect())
}

/// `W_i = (Σ_{j=i}^{i+d*} V_j) / d*`, for `i = 0..len − d*`.
///
/// The window spans `d* + 1` terms but is divided by `d*`.
pub fn moving_average(v: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 1 {
        return Err(Error::domain("moving-average window must be >= 1"));
    }
    if v.len() <= window {
        return Err(Error::domain(format!(
            "moving-average window {window} needs more than {} values",
            v.len()
        )));
    }
    let d = window as f64;
    Ok(v.windows(window + 1)
        .map(|w| numeric::sum(w.iter().copied()) / d)
        .collect())
}

/// Running prefix sums.
pub fn cumulative_sum(w: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    w.iter()
        .map(|&x| {
            acc.add(x);
            acc.total()
        })
        .collect()
}

/// How `S_k²` is formed from the increments `Y` inside interval `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalVarianceMode {
    /// `(1/n_k) Σ Y_i²` (zero-mean increments).
    #[default]
    MeanSquare,
    /// `(1/n) Σ (Y_i − Y_{i−1})²` over consecutive increment pairs inside the interval.
    SecondDifference,
}

/// Per-scale-interval variances for one candidate scale.
///
/// Vectors are indexed by `k − 1` for scale intervals `k = 1..=M`,
/// interval `k` being `[λ^{k−1}, λ^k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleIntervalVariances {
    pub lambda: f64,
    pub interval_count: usize,
    /// `S_k²`; NaN where the interval holds no usable terms.
    pub variances: Vec<f64>,
    /// `n_k`, increments lying entirely inside interval `k`.
    pub counts: Vec<usize>,
    /// Increments straddling an interval boundary (dropped).
    pub straddling: usize,
    /// Increments with an endpoint outside `[1, λ^M)` (dropped).
    pub outside: usize,
    /// One-based indices of intervals with `n_k < 2`.
    pub sparse: Vec<usize>,
}

impl ScaleIntervalVariances {
    /// `S_k²` for one-based `k`.
    pub fn variance(&self, k: usize) -> f64 {
        self.variances[k - 1]
    }

    pub fn count(&self, k: usize) -> usize {
        self.counts[k - 1]
    }
}

/// Number of complete scale intervals, `max { l : λ^l <= C }`.
pub fn interval_count(lambda: f64, end: f64) -> usize {
    if !(lambda > 1.0) || end < lambda {
        return 0;
    }
    let mut l = (end.ln() / lambda.ln()).floor() as i32;
    while l > 0 && lambda.powi(l) > end {
        l -= 1;
    }
    while lambda.powi(l + 1) <= end {
        l += 1;
    }
    l as usize
}

/// Partition boundaries: `edges[k]` is the first sample index with `t >= λ^k`, `k = 0..=M`.
pub(crate) fn interval_edges(times: &[f64], lambda: f64, intervals: usize) -> Vec<usize> {
    (0..=intervals)
        .map(|k| {
            let b = lambda.powi(k as i32);
            times.partition_point(|&t| t < b)
        })
        .collect()
}

/// `S_k²(λ)` for `k = 1..=M` with `M = max { l : λ^l <= C }`.
pub fn scale_interval_variances(
    x: &TimeSeries,
    candidate_lambda: f64,
    mode: IntervalVarianceMode,
) -> Result<ScaleIntervalVariances> {
    let end = *x
        .times()
        .last()
        .ok_or_else(|| Error::domain("empty series"))?;
    let m = interval_count(candidate_lambda, end);
    if m < 2 {
        return Err(Error::domain(format!(
            "candidate scale {candidate_lambda} yields {m} intervals on [1, {end}]; need >= 2"
        )));
    }
    scale_interval_variances_with_count(x, candidate_lambda, m, mode)
}

/// As [`scale_interval_variances`] with the interval count `M` fixed by the caller.
pub fn scale_interval_variances_with_count(
    x: &TimeSeries,
    candidate_lambda: f64,
    intervals: usize,
    mode: IntervalVarianceMode,
) -> Result<ScaleIntervalVariances> {
    if !(candidate_lambda > 1.0) || !candidate_lambda.is_finite() {
        return Err(Error::domain(format!("candidate scale must exceed 1, got {candidate_lambda}")));
    }
    if intervals == 0 {
        return Err(Error::domain("need at least one scale interval"));
    }
    let times = x.times();
    let values = x.values();
    if times.len() < 2 {
        return Err(Error::domain("series needs at least two samples"));
    }
    if times[0] < 1.0 {
        return Err(Error::domain(format!("series starts at {} < 1", times[0])));
    }
    let edges = interval_edges(times, candidate_lambda, intervals);
    let total = times.len() - 1;
    let mut variances = Vec::with_capacity(intervals);
    let mut counts = Vec::with_capacity(intervals);
    let mut sparse = Vec::new();
    let mut straddling = 0;
    for k in 0..intervals {
        let (lo, hi) = (edges[k], edges[k + 1]);
        // increments i with lo <= i and i + 1 < hi
        let n = hi.saturating_sub(lo + 1);
        if hi > lo && hi < times.len() {
            // increment (hi − 1, hi) crosses λ^{k+1}
            straddling += 1;
        }
        let s2 = interval_variance(values, lo, lo + n, mode);
        if n < 2 {
            sparse.push(k + 1);
        }
        counts.push(n);
        variances.push(s2);
    }
    let kept: usize = counts.iter().sum();
    Ok(ScaleIntervalVariances {
        lambda: candidate_lambda,
        interval_count: intervals,
        variances,
        counts,
        straddling,
        outside: total - kept - straddling,
        sparse,
    })
}

/// Variance of increments `i ∈ [first, end)` where increment `i` is `x_{i+1} − x_i`.
fn interval_variance(values: &[f64], first: usize, end: usize, mode: IntervalVarianceMode) -> f64 {
    match mode {
        IntervalVarianceMode::MeanSquare => {
            if end <= first {
                return f64::NAN;
            }
            let acc: NeumaierSum = (first..end)
                .map(|i| {
                    let y = values[i + 1] - values[i];
                    y * y
                })
                .collect();
            acc.total() / (end - first) as f64
        }
        IntervalVarianceMode::SecondDifference => {
            if end <= first + 1 {
                return f64::NAN;
            }
            let acc: NeumaierSum = (first + 1..end)
                .map(|i| {
                    let d = (values[i + 1] - values[i]) - (values[i] - values[i - 1]);
                    d * d
                })
                .collect();
            acc.total() / (end - first - 1) as f64
        }
    }
}

//! Initial scale estimate from the moving-average sequence `W`.
//!
//! Scale-interval starts show up as upward level shifts in `W`. Two
//! detectors locate the last three shifts by repeated truncation from the
//! right: a CUSUM mean-change statistic, and a split minimizing the summed
//! within-segment variances `S(z) = L(z) + U(z)`. The scale follows from the
//! ratio of the two gaps between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

pub const DEFAULT_SPLIT_MARGIN: usize = 30;
pub const DEFAULT_BACKOFF: usize = 50;

/// Smallest input for a CUSUM round.
const MIN_CUSUM_LEN: usize = 4;
/// Relative width of the tie band used by both argmin/argmax rules.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangePointMethod {
    Cusum,
    VarianceSplit,
}

/// Three change points `tau1 < tau2 < tau3` (0-based indices into `W`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangePointTriple {
    pub tau1: usize,
    pub tau2: usize,
    pub tau3: usize,
    pub method: ChangePointMethod,
}

impl ChangePointTriple {
    pub fn new(tau1: usize, tau2: usize, tau3: usize, method: ChangePointMethod) -> Result<Self> {
        if !(tau1 < tau2 && tau2 < tau3) {
            return Err(Error::domain(format!(
                "change points must increase, got ({tau1}, {tau2}, {tau3})"
            )));
        }
        Ok(Self {
            tau1,
            tau2,
            tau3,
            method,
        })
    }

    /// The same triple shifted right by `offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        Self {
            tau1: self.tau1 + offset,
            tau2: self.tau2 + offset,
            tau3: self.tau3 + offset,
            method: self.method,
        }
    }
}

/// `C(s) = |Σ_{i<s} (w_i − w̄)|` for split points `s = 1..n−1` (entry `s − 1`).
pub fn cusum_statistic(w: &[f64]) -> Vec<f64> {
    let mean = numeric::mean(w);
    let mut acc = numeric::NeumaierSum::new();
    w[..w.len().saturating_sub(1)]
        .iter()
        .map(|&v| {
            acc.add(v - mean);
            acc.total().abs()
        })
        .collect()
}

fn tie_band(w: &[f64]) -> f64 {
    TIE_TOLERANCE * numeric::sum(w.iter().map(|v| v.abs())).max(f64::MIN_POSITIVE)
}

/// Most probable single mean-change location: the split `s` maximizing the
/// CUSUM statistic, i.e. the first index of the new level. Ties go to the
/// smallest split.
pub fn cusum_single_changepoint(w: &[f64]) -> Result<usize> {
    if w.len() < MIN_CUSUM_LEN {
        return Err(Error::domain(format!(
            "CUSUM needs at least {MIN_CUSUM_LEN} values, got {}",
            w.len()
        )));
    }
    let stat = cusum_statistic(w);
    let max = stat.iter().copied().fold(f64::MIN, f64::max);
    let band = tie_band(w);
    let s = stat
        .iter()
        .position(|&c| c >= max - band)
        .expect("non-empty statistic");
    Ok(s + 1)
}

/// Apply [`cusum_single_changepoint`], drop everything from the detected
/// point onward, and repeat until three points are found.
pub fn last_three_changepoints_cusum(w: &[f64]) -> Result<ChangePointTriple> {
    let mut found = Vec::with_capacity(3);
    let mut end = w.len();
    while found.len() < 3 {
        if end < MIN_CUSUM_LEN {
            return Err(Error::ChangePoints { found });
        }
        let cp = cusum_single_changepoint(&w[..end])?;
        found.push(cp);
        end = cp;
    }
    ChangePointTriple::new(found[2], found[1], found[0], ChangePointMethod::Cusum)
}

/// `S(z)` over every admissible split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitScan {
    /// Split of `values[0]`; `values[i]` belongs to `z = first_split + i`.
    pub first_split: usize,
    pub values: Vec<f64>,
}

impl SplitScan {
    /// Minimizing split; ties go to the largest `z`.
    pub fn argmin(&self) -> usize {
        let min = self.values.iter().copied().fold(f64::MAX, f64::min);
        let band = TIE_TOLERANCE * min.abs().max(f64::MIN_POSITIVE);
        let i = self
            .values
            .iter()
            .rposition(|&s| s <= min + band)
            .expect("non-empty scan");
        self.first_split + i
    }
}

/// `S(z) = L(z) + U(z)` for `z = l*..=n−l*`, where `L(z)` is the population
/// variance of `w[..z]` and `U(z)` that of `w[z..]`.
///
/// Both sides are accumulated with Welford updates, forward and backward.
pub fn variance_split_scan(w: &[f64], margin: usize) -> Result<SplitScan> {
    let n = w.len();
    if margin < 2 {
        return Err(Error::domain(format!("split margin must be >= 2, got {margin}")));
    }
    if n <= 2 * margin {
        return Err(Error::domain(format!(
            "split margin {margin} too large for {n} values"
        )));
    }
    let left = welford_prefix(w.iter().copied());
    let mut right = welford_prefix(w.iter().rev().copied());
    right.reverse();
    // left[z] covers w[..z]; right[z] covers w[z..]
    let values = (margin..=n - margin)
        .map(|z| {
            let l = left[z] / z as f64;
            let u = right[z] / (n - z) as f64;
            l + u
        })
        .collect();
    Ok(SplitScan {
        first_split: margin,
        values,
    })
}

/// `out[i]` = sum of squared deviations of the first `i` items (`out.len() = n + 1`).
fn welford_prefix(items: impl ExactSizeIterator<Item = f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(items.len() + 1);
    out.push(0.0);
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, x) in items.enumerate() {
        let count = (i + 1) as f64;
        let delta = x - mean;
        mean += delta / count;
        m2 += delta * (x - mean);
        out.push(m2.max(0.0));
    }
    out
}

/// Locate `i1 = argmin S` on `w`, retry on `w[..i1 − j*]` for `i2`, and again
/// for `i3`. Returns `(i3, i2, i1)`.
pub fn last_three_minima_variance_split(
    w: &[f64],
    margin: usize,
    backoff: usize,
) -> Result<ChangePointTriple> {
    let mut found: Vec<usize> = Vec::with_capacity(3);
    let mut end = w.len();
    while found.len() < 3 {
        if end <= 2 * margin {
            return Err(Error::ChangePoints { found });
        }
        let i = variance_split_scan(&w[..end], margin)?.argmin();
        found.push(i);
        end = i.saturating_sub(backoff);
    }
    ChangePointTriple::new(found[2], found[1], found[0], ChangePointMethod::VarianceSplit)
}

/// `λ₀ = (τ₃ − τ₂)/(τ₂ − τ₁)`; must exceed 1.
pub fn initial_scale(cp: &ChangePointTriple) -> Result<f64> {
    if !(cp.tau1 < cp.tau2 && cp.tau2 < cp.tau3) {
        return Err(Error::domain("change points must increase"));
    }
    let lambda0 = (cp.tau3 - cp.tau2) as f64 / (cp.tau2 - cp.tau1) as f64;
    if lambda0 <= 1.0 {
        return Err(Error::degenerate(format!(
            "interval-length ratio {lambda0} from ({}, {}, {}) is not an expansion scale",
            cp.tau1, cp.tau2, cp.tau3
        )));
    }
    Ok(lambda0)
}

//! Sample-path containers and sampling grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered `(time, value)` samples on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::domain(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::domain(format!(
                "times not strictly increasing at index {}",
                i + 1
            )));
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite sample"));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.times, self.values)
    }

    /// Same grid, new values. Lengths must match.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.times.len());
        Self {
            times: self.times.clone(),
            values,
        }
    }

    /// Grid step if the series is equally spaced (relative tolerance 1e-9).
    pub fn uniform_step(&self) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        let span = self.times[self.len() - 1] - self.times[0];
        let step = span / (self.len() - 1) as f64;
        let tol = 1e-9 * step;
        let uniform = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= tol);
        uniform.then_some(step)
    }
}

/// Zero-based scale-interval index of `t`: the `k` with `λ^k <= t < λ^{k+1}`.
///
/// Requires `t >= 1` and `lambda > 1`.
pub fn scale_interval_index(t: f64, lambda: f64) -> usize {
    debug_assert!(t >= 1.0 && lambda > 1.0);
    let mut k = (t.ln() / lambda.ln()).floor().max(0.0) as i32;
    while k > 0 && lambda.powi(k) > t {
        k -= 1;
    }
    while lambda.powi(k + 1) <= t {
        k += 1;
    }
    k as usize
}

/// Where a process is observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplingGrid {
    /// `points_per_interval` equally spaced points in each of `intervals`
    /// scale intervals `[λ^{n-1}, λ^n)`.
    Geometric {
        lambda: f64,
        points_per_interval: usize,
        intervals: usize,
    },
    /// `t_0 = 1`, `t_i = t_{i-1} + (end - 1)/steps`, for `i = 1..=steps`.
    Uniform { end: f64, steps: usize },
}

impl SamplingGrid {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SamplingGrid::Geometric {
                lambda,
                points_per_interval,
                intervals,
            } => {
                if !(lambda > 1.0) || !lambda.is_finite() {
                    return Err(Error::domain(format!("grid lambda must exceed 1, got {lambda}")));
                }
                if points_per_interval == 0 || intervals == 0 {
                    return Err(Error::domain("geometric grid needs T >= 1 and M >= 1"));
                }
                if !lambda.powi(intervals as i32).is_finite() {
                    return Err(Error::domain("geometric grid end overflows"));
                }
            }
            SamplingGrid::Uniform { end, steps } => {
                if !(end > 1.0) || !end.is_finite() {
                    return Err(Error::domain(format!("uniform grid end must exceed 1, got {end}")));
                }
                if steps == 0 {
                    return Err(Error::domain("uniform grid needs N >= 1"));
                }
            }
        }
        Ok(())
    }

    /// Grid times, strictly increasing, starting at 1.
    pub fn times(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let times: Vec<f64> = match *self {
            SamplingGrid::Geometric {
                lambda,
                points_per_interval,
                intervals,
            } => {
                let t = points_per_interval as f64;
                let mut out = Vec::with_capacity(points_per_interval * intervals);
                for n in 0..intervals {
                    let start = lambda.powi(n as i32);
                    for k in 0..points_per_interval {
                        out.push(start * (1.0 + k as f64 * (lambda - 1.0) / t));
                    }
                }
                out
            }
            SamplingGrid::Uniform { end, steps } => {
                let step = (end - 1.0) / steps as f64;
                (0..=steps).map(|i| 1.0 + i as f64 * step).collect()
            }
        };
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("grid spacing underflows; times not increasing"));
        }
        Ok(times)
    }

    /// Exclusive upper time bound of the grid's scale intervals (`λ^M`), if geometric.
    pub fn geometric_end(&self) -> Option<f64> {
        match *self {
            SamplingGrid::Geometric {
                lambda, intervals, ..
            } => Some(lambda.powi(intervals as i32)),
            SamplingGrid::Uniform { .. } => None,
        }
    }
}

//! Refinement of the initial scale `λ₀` to `λ*`, and the quantities derived
//! from it: interval ratios `μ_k`, their weighted mean `μ̄*`, the exponent
//! gap `H − H′`, and the rescaled (stationary-increment) path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::series::{scale_interval_index, TimeSeries};
use crate::stats::{self, IntervalVarianceMode};

pub const MIN_CANDIDATES: usize = 50;
pub const DEFAULT_CANDIDATES: usize = 1000;
/// Default grid half-width as a fraction of `λ₀`.
pub const DEFAULT_RELATIVE_HALF_WIDTH: f64 = 0.025;
pub const DEFAULT_COVERAGE: f64 = 0.95;
pub const DEFAULT_SPLIT_MARGIN: usize = 20;

const FLAT_TOLERANCE: f64 = 1e-12;

/// Equally spaced candidate scales around `λ₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGrid {
    pub lambda0: f64,
    pub points: Vec<f64>,
}

impl CandidateGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.points[self.len() - 1] - self.points[0]) / (self.len() - 1) as f64
    }
}

/// `m` equally spaced points on `[λ₀ − w, λ₀ + w]`.
pub fn candidate_grid(lambda0: f64, half_width: f64, m: usize) -> Result<CandidateGrid> {
    if m < MIN_CANDIDATES {
        return Err(Error::domain(format!(
            "candidate grid needs at least {MIN_CANDIDATES} points, got {m}"
        )));
    }
    if !(half_width > 0.0) || !half_width.is_finite() || !lambda0.is_finite() {
        return Err(Error::domain(format!("grid half-width must be positive, got {half_width}")));
    }
    let lo = lambda0 - half_width;
    if !(lo > 1.0) {
        return Err(Error::domain(format!("candidate grid lower bound {lo} must exceed 1")));
    }
    let step = 2.0 * half_width / (m - 1) as f64;
    let points = (0..m).map(|i| lo + i as f64 * step).collect();
    Ok(CandidateGrid { lambda0, points })
}

/// Number of trailing intervals, as returned by [`trailing_interval_count`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailingIntervals {
    /// Intervals `M − j ..= M` are used.
    pub j: usize,
    pub interval_count: usize,
    /// False when even every interval falls short of the coverage.
    pub attained: bool,
}

/// Smallest `j` such that intervals `M − j ..= M` hold at least `coverage`
/// of the samples in `[1, λ^M)`.
pub fn trailing_interval_count(x: &TimeSeries, lambda: f64, coverage: f64) -> Result<TrailingIntervals> {
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::domain(format!("coverage must lie in (0, 1), got {coverage}")));
    }
    if !(lambda > 1.0) {
        return Err(Error::domain(format!("scale must exceed 1, got {lambda}")));
    }
    let times = x.times();
    let end = *times.last().ok_or_else(|| Error::domain("empty series"))?;
    let m = stats::interval_count(lambda, end);
    if m < 1 {
        return Err(Error::domain(format!("no complete scale interval of {lambda} in [1, {end}]")));
    }
    let edges = stats::interval_edges(times, lambda, m);
    let total = (edges[m] - edges[0]) as f64;
    for j in 0..m {
        let held = (edges[m] - edges[m - j - 1]) as f64;
        if held >= coverage * total {
            return Ok(TrailingIntervals {
                j,
                interval_count: m,
                attained: true,
            });
        }
    }
    Ok(TrailingIntervals {
        j: m - 1,
        interval_count: m,
        attained: false,
    })
}

/// `R(a) = Σ_{k=M−j}^{M} S_k²(a)` with `M` implied by `a` and the series end.
pub fn scale_objective_r(x: &TimeSeries, a: f64, j: usize, mode: IntervalVarianceMode) -> Result<f64> {
    let end = *x.times().last().ok_or_else(|| Error::domain("empty series"))?;
    objective_with_count(x, a, stats::interval_count(a, end), j, mode)
}

fn objective_with_count(
    x: &TimeSeries,
    a: f64,
    intervals: usize,
    j: usize,
    mode: IntervalVarianceMode,
) -> Result<f64> {
    if j + 1 > intervals {
        return Err(Error::domain(format!(
            "{} trailing intervals requested but only {intervals} exist at scale {a}",
            j + 1
        )));
    }
    let s = stats::scale_interval_variances_with_count(x, a, intervals, mode)?;
    let mut acc = NeumaierSum::new();
    for k in intervals - j..=intervals {
        if s.count(k) < 2 || !s.variance(k).is_finite() {
            return Err(Error::SparseInterval {
                interval: k,
                count: s.count(k),
            });
        }
        acc.add(s.variance(k));
    }
    Ok(acc.total())
}

/// How the sequence `R(a_1..a_m)` is split in two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitObjective {
    /// Residual variance of a least-squares line fitted to each side.
    #[default]
    Trend,
    /// Sample variance of each side about its mean.
    Level,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    /// Minimum number of candidates on each side of a split (`k*`).
    pub margin: usize,
    pub objective: SplitObjective,
    pub mode: IntervalVarianceMode,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            margin: DEFAULT_SPLIT_MARGIN,
            objective: SplitObjective::default(),
            mode: IntervalVarianceMode::default(),
        }
    }
}

/// One evaluated candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub a: f64,
    pub r: f64,
    /// NaN outside the admissible split range.
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub lambda_star: f64,
    /// `M`, held fixed at its value for `λ₀` across all candidates.
    pub interval_count: usize,
    /// Candidates dropped because `a^M` exceeds the series end.
    pub clipped: usize,
    /// V was flat; `lambda_star` is the middle candidate.
    pub degenerate: bool,
    pub trace: Vec<TracePoint>,
}

/// Evaluate `R` on every candidate and return the split point minimizing `V`.
///
/// `M` is taken from `λ₀` for every candidate; candidates whose last interval
/// would run past the series end are dropped.
pub fn refine_scale(
    x: &TimeSeries,
    grid: &CandidateGrid,
    j: usize,
    options: &RefineOptions,
) -> Result<Refinement> {
    let end = *x.times().last().ok_or_else(|| Error::domain("empty series"))?;
    let intervals = stats::interval_count(grid.lambda0, end);
    let kept: Vec<f64> = grid
        .points
        .iter()
        .copied()
        .filter(|a| a.powi(intervals as i32) <= end)
        .collect();
    let clipped = grid.len() - kept.len();
    let margin = options.margin.max(3);
    if kept.len() <= 2 * margin {
        return Err(Error::domain(format!(
            "{} usable candidates; need more than {}",
            kept.len(),
            2 * margin
        )));
    }
    let r: Vec<f64> = kept
        .par_iter()
        .map(|&a| objective_with_count(x, a, intervals, j, options.mode))
        .collect::<Result<_>>()?;
    let v = split_objective(&kept, &r, margin, options.objective);

    let admissible = &v[margin - 1..kept.len() - margin];
    let (lo, hi) = admissible
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let degenerate = hi - lo <= FLAT_TOLERANCE * hi.abs().max(lo.abs());
    let best = if degenerate {
        kept.len() / 2
    } else {
        let rel = admissible
            .iter()
            .position(|&s| s == lo)
            .expect("minimum is attained");
        margin - 1 + rel
    };
    let trace = kept
        .iter()
        .zip(&r)
        .zip(&v)
        .map(|((&a, &r), &v)| TracePoint { a, r, v })
        .collect();
    Ok(Refinement {
        lambda_star: kept[best],
        interval_count: intervals,
        clipped,
        degenerate,
        trace,
    })
}

/// `V` at each 0-based split position `p`, the left group being `r[..=p]`.
/// Positions outside `margin − 1 ..= n − margin − 1` are NaN.
pub fn split_objective(a: &[f64], r: &[f64], margin: usize, objective: SplitObjective) -> Vec<f64> {
    let n = r.len();
    let mut v = vec![f64::NAN; n];
    if margin < 3 || n <= 2 * margin {
        return v;
    }
    for p in margin - 1..n - margin {
        let (left, right) = ((0..=p), (p + 1..n));
        v[p] = match objective {
            SplitObjective::Level => {
                level_dispersion(&r[left.clone()]) + level_dispersion(&r[right.clone()])
            }
            SplitObjective::Trend => {
                trend_dispersion(&a[left.clone()], &r[left])
                    + trend_dispersion(&a[right.clone()], &r[right])
            }
        };
    }
    v
}

fn level_dispersion(r: &[f64]) -> f64 {
    crate::numeric::centered_sum_of_squares(r) / (r.len() - 1) as f64
}

/// Residual sum of squares of the least-squares line, over `n − 2`.
fn trend_dispersion(a: &[f64], r: &[f64]) -> f64 {
    let n = r.len() as f64;
    let a_mean = crate::numeric::mean(a);
    let r_mean = crate::numeric::mean(r);
    let (mut saa, mut sar) = (NeumaierSum::new(), NeumaierSum::new());
    for (&ai, &ri) in a.iter().zip(r) {
        saa.add((ai - a_mean) * (ai - a_mean));
        sar.add((ai - a_mean) * (ri - r_mean));
    }
    let slope = sar.total() / saa.total();
    let sse: NeumaierSum = a
        .iter()
        .zip(r)
        .map(|(&ai, &ri)| {
            let e = ri - r_mean - slope * (ai - a_mean);
            e * e
        })
        .collect();
    sse.total() / (n - 2.0)
}

/// `μ_k = S_k²(λ*) / S_{k−1}²(λ*)` for `k = M − j ..= M`.
pub fn mu_ratios(x: &TimeSeries, lambda_star: f64, j: usize, mode: IntervalVarianceMode) -> Result<Vec<f64>> {
    let s = stats::scale_interval_variances(x, lambda_star, mode)?;
    let m = s.interval_count;
    if j + 2 > m {
        return Err(Error::domain(format!(
            "ratios over {} trailing intervals need {} intervals; have {m}",
            j + 1,
            j + 2
        )));
    }
    (m - j..=m)
        .map(|k| {
            let (num, den) = (s.variance(k), s.variance(k - 1));
            if s.count(k - 1) < 2 || !(den > 0.0) {
                return Err(Error::degenerate(format!(
                    "scale interval {} has variance {den} from {} increments",
                    k - 1,
                    s.count(k - 1)
                )));
            }
            if s.count(k) < 2 || !num.is_finite() {
                return Err(Error::SparseInterval {
                    interval: k,
                    count: s.count(k),
                });
            }
            Ok(num / den)
        })
        .collect()
}

/// Weighted mean of `μ` with weights `λ*^0, λ*^1, …`.
pub fn weighted_mu(mu: &[f64], lambda_star: f64) -> Result<f64> {
    if mu.is_empty() {
        return Err(Error::domain("no interval ratios to average"));
    }
    if !(lambda_star > 1.0) || !lambda_star.is_finite() {
        return Err(Error::domain(format!("scale must exceed 1, got {lambda_star}")));
    }
    // weights normalized by the largest to keep them <= 1
    let last = (mu.len() - 1) as i32;
    let (mut num, mut den) = (NeumaierSum::new(), NeumaierSum::new());
    for (i, &m) in mu.iter().enumerate() {
        let w = lambda_star.powi(i as i32 - last);
        num.add(w * m);
        den.add(w);
    }
    Ok(num.total() / den.total())
}

/// `H − H′ = ln μ̄* / (2 ln λ*)`.
pub fn estimate_h_minus_hprime(mu_bar: f64, lambda_star: f64) -> Result<f64> {
    if !(mu_bar > 0.0) || !mu_bar.is_finite() {
        return Err(Error::domain(format!("mean ratio must be positive, got {mu_bar}")));
    }
    if !(lambda_star > 1.0) || !lambda_star.is_finite() {
        return Err(Error::domain(format!("scale must exceed 1, got {lambda_star}")));
    }
    Ok(mu_bar.ln() / (2.0 * lambda_star.ln()))
}

/// Divide each sample in `[λ^{k−1}, λ^k)` by `λ^{(k−1)(H−H′)}`.
pub fn rescale_to_fbm(x: &TimeSeries, lambda_star: f64, h_gap: f64) -> Result<TimeSeries> {
    if !(lambda_star > 1.0) || !lambda_star.is_finite() || !h_gap.is_finite() {
        return Err(Error::domain(format!(
            "invalid rescaling (scale {lambda_star}, exponent gap {h_gap})"
        )));
    }
    if x.times().first().is_some_and(|&t| t < 1.0) {
        return Err(Error::domain("rescaling needs times >= 1"));
    }
    let step = lambda_star.powf(h_gap);
    let values = x
        .times()
        .iter()
        .zip(x.values())
        .map(|(&t, &v)| v / step.powi(scale_interval_index(t, lambda_star) as i32))
        .collect();
    Ok(x.with_values(values))
}

/// Everything the scale stage produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    pub lambda0: f64,
    pub lambda_star: f64,
    pub j_used: usize,
    pub coverage_attained: bool,
    pub mu_k: Vec<f64>,
    pub mu_bar_star: f64,
    pub h_minus_hprime: f64,
    pub refinement: Refinement,
}

//! End-to-end estimation: initial scale from change points, refinement,
//! exponent gap, rescaling, and the Hurst index of the rescaled path.

use serde::{Deserialize, Serialize};

use crate::changepoint::{self, ChangePointMethod, ChangePointTriple};
use crate::error::{Error, Result, StageExt};
use crate::hurst::{self, HurstEstimate, HurstMethod};
use crate::scale::{self, RefineOptions, ScaleEstimate, SplitObjective};
use crate::series::TimeSeries;
use crate::stats::{self, IncrementOrder, IntervalVarianceMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSettings {
    pub msv_window: usize,
    pub average_window: usize,
    pub split_margin: usize,
    pub backoff: usize,
    pub refine_margin: usize,
    pub coverage: f64,
    /// Candidate-grid half-width; `None` means 2.5% of `λ₀`.
    pub grid_half_width: Option<f64>,
    pub grid_points: usize,
    pub initializer: ChangePointMethod,
    pub objective: SplitObjective,
    pub variance_mode: IntervalVarianceMode,
}

impl Default for ScaleSettings {
    fn default() -> Self {
        Self {
            msv_window: stats::DEFAULT_MSV_WINDOW,
            average_window: stats::DEFAULT_AVERAGE_WINDOW,
            split_margin: changepoint::DEFAULT_SPLIT_MARGIN,
            backoff: changepoint::DEFAULT_BACKOFF,
            refine_margin: scale::DEFAULT_SPLIT_MARGIN,
            coverage: scale::DEFAULT_COVERAGE,
            grid_half_width: None,
            grid_points: scale::DEFAULT_CANDIDATES,
            initializer: ChangePointMethod::VarianceSplit,
            objective: SplitObjective::default(),
            variance_mode: IntervalVarianceMode::default(),
        }
    }
}

/// Outcome of one initializer; the one not selected may fail without
/// aborting the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Initializer {
    pub change_points: Option<ChangePointTriple>,
    pub lambda0: Option<f64>,
    pub error: Option<String>,
}

impl Initializer {
    fn from_result(r: Result<ChangePointTriple>) -> (Self, Result<f64>) {
        let out = r.and_then(|cp| changepoint::initial_scale(&cp).map(|l| (cp, l)));
        match out {
            Ok((cp, l)) => (
                Self {
                    change_points: Some(cp),
                    lambda0: Some(l),
                    error: None,
                },
                Ok(l),
            ),
            Err(e) => (
                Self {
                    change_points: None,
                    lambda0: None,
                    error: Some(e.to_string()),
                },
                Err(e),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub cusum: Initializer,
    pub variance_split: Initializer,
    pub estimate: ScaleEstimate,
}

/// Intermediate sequences kept for plotting.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScaleTraces {
    pub msv: Vec<f64>,
    pub averaged: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// `(z, S(z))` from the first variance-split round.
    pub split_scan: Vec<(usize, f64)>,
}

/// Smallest series [`estimate_scale`] accepts.
pub fn minimum_length(settings: &ScaleSettings) -> usize {
    settings.msv_window + settings.average_window + 2 * settings.split_margin
}

pub fn estimate_scale(x: &TimeSeries, settings: &ScaleSettings) -> Result<(ScaleReport, ScaleTraces)> {
    let need = minimum_length(settings);
    if x.len() < need {
        return Err(Error::domain(format!(
            "series has {} samples; need at least b* + d* + 2l* = {need}",
            x.len()
        )))
        .stage("input");
    }

    let y = stats::difference(x.values(), IncrementOrder::First).stage("increments")?;
    let msv = stats::moving_sample_variance(&y, settings.msv_window).stage("moving sample variance")?;
    let averaged = stats::moving_average(&msv, settings.average_window).stage("moving average")?;
    let cumulative = stats::cumulative_sum(&averaged);

    let (cusum, cusum_l) = Initializer::from_result(changepoint::last_three_changepoints_cusum(&averaged));
    let (split, split_l) = Initializer::from_result(changepoint::last_three_minima_variance_split(
        &averaged,
        settings.split_margin,
        settings.backoff,
    ));
    let lambda0 = match settings.initializer {
        ChangePointMethod::Cusum => cusum_l.stage("cusum initializer")?,
        ChangePointMethod::VarianceSplit => split_l.stage("variance-split initializer")?,
    };
    let split_scan = changepoint::variance_split_scan(&averaged, settings.split_margin)
        .map(|s| {
            s.values
                .iter()
                .enumerate()
                .map(|(i, &v)| (s.first_split + i, v))
                .collect()
        })
        .unwrap_or_default();

    let half_width = settings
        .grid_half_width
        .unwrap_or(scale::DEFAULT_RELATIVE_HALF_WIDTH * lambda0);
    let grid = scale::candidate_grid(lambda0, half_width, settings.grid_points).stage("candidate grid")?;
    let trailing = scale::trailing_interval_count(x, lambda0, settings.coverage).stage("coverage")?;
    let options = RefineOptions {
        margin: settings.refine_margin,
        objective: settings.objective,
        mode: settings.variance_mode,
    };
    let refinement = scale::refine_scale(x, &grid, trailing.j, &options).stage("refinement")?;
    let lambda_star = refinement.lambda_star;
    let mu_k = scale::mu_ratios(x, lambda_star, trailing.j, settings.variance_mode).stage("interval ratios")?;
    let mu_bar_star = scale::weighted_mu(&mu_k, lambda_star).stage("weighted ratio")?;
    let h_minus_hprime = scale::estimate_h_minus_hprime(mu_bar_star, lambda_star).stage("exponent gap")?;

    let report = ScaleReport {
        cusum,
        variance_split: split,
        estimate: ScaleEstimate {
            lambda0,
            lambda_star,
            j_used: trailing.j,
            coverage_attained: trailing.attained,
            mu_k,
            mu_bar_star,
            h_minus_hprime,
            refinement,
        },
    };
    let traces = ScaleTraces {
        msv,
        averaged,
        cumulative,
        split_scan,
    };
    Ok((report, traces))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HurstChoice {
    Auto,
    Fixed(HurstMethod),
}

impl std::str::FromStr for HurstChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(HurstChoice::Auto)
        } else {
            s.parse().map(HurstChoice::Fixed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstReport {
    /// `(λ*, H − H′)` used to undo the interval scaling, if any.
    pub rescaled_with: Option<(f64, f64)>,
    pub selected: HurstEstimate,
    /// Every estimate computed along the way.
    pub estimates: Vec<HurstEstimate>,
    /// `Ĥ′ + (H − H′)` when a rescaling was applied.
    pub hurst_total: Option<f64>,
}

/// Hurst index of `x`, first dividing out `λ*^{(k−1)(H−H′)}` when `prior` is given.
pub fn estimate_hurst(
    x: &TimeSeries,
    choice: HurstChoice,
    k_max: usize,
    prior: Option<(f64, f64)>,
) -> Result<HurstReport> {
    let path = match prior {
        Some((lambda_star, gap)) => scale::rescale_to_fbm(x, lambda_star, gap).stage("rescale")?,
        None => x.clone(),
    };
    let values = path.values();
    let (selected, estimates) = match choice {
        HurstChoice::Auto => {
            let auto = hurst::hurst_auto(values, k_max).stage("hurst")?;
            let mut all = vec![auto.order1];
            all.extend(auto.order2);
            (auto.selected, all)
        }
        HurstChoice::Fixed(m) => {
            let e = hurst::estimate(values, m, k_max).stage("hurst")?;
            (e.clone(), vec![e])
        }
    };
    Ok(HurstReport {
        rescaled_with: prior,
        hurst_total: prior.map(|(_, gap)| selected.combined + gap),
        selected,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_input_is_rejected_before_work() {
        let s = ScaleSettings::default();
        let n = minimum_length(&s) - 1;
        let times = (0..n).map(|i| 1.0 + i as f64).collect();
        let x = TimeSeries::new(times, vec![0.0; n]).unwrap();
        let err = estimate_scale(&x, &s).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "input", .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn choice_parsing() {
        assert_eq!("auto".parse::<HurstChoice>().unwrap(), HurstChoice::Auto);
        assert_eq!(
            "qv".parse::<HurstChoice>().unwrap(),
            HurstChoice::Fixed(HurstMethod::QuadraticVariation)
        );
        assert!("x".parse::<HurstChoice>().is_err());
    }
}

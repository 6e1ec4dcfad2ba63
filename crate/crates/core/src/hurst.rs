//! Hurst-index estimators for paths with stationary increments.
//!
//! The ratio methods compare the variance of increments of a consecutive
//! block with that of a stride-`k` subsample of the same length; for an
//! H-sssi path the ratio is `k^{2H}`. Quadratic variation is a baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::stats::{self, IncrementOrder};

pub const DEFAULT_MAX_STRIDE: usize = 5;
/// Order-1 estimates at or above this switch [`hurst_auto`] to order 2.
pub const AUTO_SWITCH: f64 = 0.75;
/// Subsample length below which the ratio estimates are flagged as unreliable.
pub const MIN_SUBSAMPLE: usize = 30;

/// Warning text when `n / k_max` falls under [`MIN_SUBSAMPLE`].
pub fn short_subsample_warning(n: usize, k_max: usize) -> Option<String> {
    (k_max > 0 && n / k_max < MIN_SUBSAMPLE).then(|| {
        format!("warning: {n} samples give stride-{k_max} subsamples of {} points (< {MIN_SUBSAMPLE})", n / k_max)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HurstMethod {
    #[serde(rename = "ratio1")]
    RatioOrder1,
    #[serde(rename = "ratio2")]
    RatioOrder2,
    #[serde(rename = "qv")]
    QuadraticVariation,
}

impl HurstMethod {
    pub fn name(self) -> &'static str {
        match self {
            HurstMethod::RatioOrder1 => "ratio1",
            HurstMethod::RatioOrder2 => "ratio2",
            HurstMethod::QuadraticVariation => "qv",
        }
    }
}

impl std::str::FromStr for HurstMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio1" | "ratio_order1" => Ok(HurstMethod::RatioOrder1),
            "ratio2" | "ratio_order2" => Ok(HurstMethod::RatioOrder2),
            "qv" | "quadratic_variation" => Ok(HurstMethod::QuadraticVariation),
            other => Err(Error::Config(format!("unknown Hurst method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub method: HurstMethod,
    /// `(k, Ĥ_k)` per stride; a single `(2, Ĥ)` entry for quadratic variation.
    pub per_stride: Vec<(usize, f64)>,
    pub combined: f64,
    pub k_max: usize,
}

/// Elements at one-based positions `k, 2k, …, ⌊N/k⌋·k`.
pub fn stride_subsample(x: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > x.len() {
        return Err(Error::domain(format!("stride {k} invalid for {} samples", x.len())));
    }
    Ok(x.iter().skip(k - 1).step_by(k).copied().collect())
}

/// Variance-ratio estimate from increments of the given order.
pub fn hurst_ratio(x: &[f64], order: IncrementOrder, k_max: usize) -> Result<HurstEstimate> {
    if k_max < 2 {
        return Err(Error::domain(format!("K_max must be >= 2, got {k_max}")));
    }
    let d = order.as_usize();
    let n = x.len();
    if n / k_max < d + 3 {
        return Err(Error::domain(format!(
            "{n} samples too few for K_max = {k_max} at order {d}"
        )));
    }
    let method = match order {
        IncrementOrder::First => HurstMethod::RatioOrder1,
        IncrementOrder::Second => HurstMethod::RatioOrder2,
    };
    let per_stride = (2..=k_max)
        .map(|k| {
            let len = n / k;
            let block = stats::sample_variance(&stats::difference(&x[..len], order)?)?;
            let sub = stride_subsample(x, k)?;
            let strided = stats::sample_variance(&stats::difference(&sub, order)?)?;
            if !(block > 0.0) || !(strided > 0.0) {
                return Err(Error::degenerate(format!(
                    "zero order-{d} increment variance at stride {k}"
                )));
            }
            Ok((k, (strided / block).ln() / (2.0 * (k as f64).ln())))
        })
        .collect::<Result<Vec<_>>>()?;
    let combined = per_stride.iter().map(|&(_, h)| h).sum::<f64>() / per_stride.len() as f64;
    Ok(HurstEstimate {
        method,
        per_stride,
        combined,
        k_max,
    })
}

/// Both ratio estimates as computed by [`hurst_auto`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoHurst {
    pub selected: HurstEstimate,
    pub order1: HurstEstimate,
    pub order2: Option<HurstEstimate>,
}

/// Order-1 ratio estimate, replaced by order 2 when it reaches [`AUTO_SWITCH`].
pub fn hurst_auto(x: &[f64], k_max: usize) -> Result<AutoHurst> {
    let order1 = hurst_ratio(x, IncrementOrder::First, k_max)?;
    if order1.combined >= AUTO_SWITCH {
        let order2 = hurst_ratio(x, IncrementOrder::Second, k_max)?;
        Ok(AutoHurst {
            selected: order2.clone(),
            order1,
            order2: Some(order2),
        })
    } else {
        Ok(AutoHurst {
            selected: order1.clone(),
            order1,
            order2: None,
        })
    }
}

fn mean_square_second_difference(x: &[f64], dilation: usize) -> f64 {
    let m = dilation;
    let terms = x.len() - 2 * m;
    let acc: NeumaierSum = (0..terms)
        .map(|i| {
            let d = x[i + 2 * m] - 2.0 * x[i + m] + x[i];
            d * d
        })
        .collect();
    acc.total() / terms as f64
}

/// `Ĥ = ½ log₂(V₂ / V₁)` from mean squared second differences at dilations 1 and 2.
pub fn hurst_quadratic_variation(x: &[f64]) -> Result<HurstEstimate> {
    if x.len() < 5 {
        return Err(Error::domain(format!(
            "quadratic variation needs >= 5 samples, got {}",
            x.len()
        )));
    }
    let v1 = mean_square_second_difference(x, 1);
    let v2 = mean_square_second_difference(x, 2);
    if !(v1 > 0.0) || !(v2 > 0.0) {
        return Err(Error::degenerate("second differences vanish"));
    }
    let h = 0.5 * (v2 / v1).log2();
    Ok(HurstEstimate {
        method: HurstMethod::QuadraticVariation,
        per_stride: vec![(2, h)],
        combined: h,
        k_max: 2,
    })
}

pub fn estimate(x: &[f64], method: HurstMethod, k_max: usize) -> Result<HurstEstimate> {
    match method {
        HurstMethod::RatioOrder1 => hurst_ratio(x, IncrementOrder::First, k_max),
        HurstMethod::RatioOrder2 => hurst_ratio(x, IncrementOrder::Second, k_max),
        HurstMethod::QuadraticVariation => hurst_quadratic_variation(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_subsamples_warn() {
        assert!(short_subsample_warning(150, 5).is_none());
        assert!(short_subsample_warning(149, 5).is_some());
    }

    #[test]
    fn stride_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(stride_subsample(&x, 2).unwrap(), vec![2.0, 4.0, 6.0]);
        assert_eq!(stride_subsample(&x, 1).unwrap(), x.to_vec());
        let ten: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(stride_subsample(&ten, 3).unwrap(), vec![3.0, 6.0, 9.0]);
        assert!(stride_subsample(&x, 7).is_err());
        assert!(stride_subsample(&x, 0).is_err());
    }

    #[test]
    fn variance_denominators() {
        // order 1 on [N/k] samples: [N/k] − 1 increments, divisor [N/k] − 2
        let x: Vec<f64> = (0..40).map(|i| ((i * i) % 7) as f64).collect();
        let e = hurst_ratio(&x, IncrementOrder::First, 2).unwrap();
        let block: Vec<f64> = x[..20].windows(2).map(|w| w[1] - w[0]).collect();
        let sub: Vec<f64> = (1..=20).map(|i| x[2 * i - 1]).collect();
        let strided: Vec<f64> = sub.windows(2).map(|w| w[1] - w[0]).collect();
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        };
        let expect = (var(&strided) / var(&block)).ln() / (2.0 * 2f64.ln());
        assert!((e.combined - expect).abs() < 1e-12);
        assert_eq!(e.per_stride.len(), 1);
        assert_eq!(e.per_stride[0].1, e.combined);
    }

    #[test]
    fn degenerate_inputs() {
        let affine: Vec<f64> = (0..100).map(|i| 3.0 + 0.5 * i as f64).collect();
        assert!(matches!(
            hurst_ratio(&affine, IncrementOrder::Second, 5),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            hurst_ratio(&[1.0; 100], IncrementOrder::First, 5),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(hurst_quadratic_variation(&affine), Err(Error::Degenerate(_))));
        assert!(hurst_ratio(&affine, IncrementOrder::First, 1).is_err());
        assert!(hurst_ratio(&affine[..19], IncrementOrder::Second, 5).is_err());
        assert!(hurst_quadratic_variation(&affine[..4]).is_err());
    }

    #[test]
    fn auto_switch_boundary() {
        // a path whose order-1 estimate is large triggers order 2
        let x: Vec<f64> = (0..2000).map(|i| (i as f64 * 0.01).sin() * 100.0 + ((i * 7919) % 13) as f64 * 1e-3).collect();
        let a = hurst_auto(&x, 5).unwrap();
        assert!(a.order1.combined >= AUTO_SWITCH);
        assert_eq!(a.selected.method, HurstMethod::RatioOrder2);
        let noise: Vec<f64> = (0..2000).map(|i| ((i * 7919) % 13) as f64).collect();
        let b = hurst_auto(&noise, 5).unwrap();
        assert!(b.order1.combined < AUTO_SWITCH);
        assert_eq!(b.selected.method, HurstMethod::RatioOrder1);
        assert!(b.order2.is_none());
    }

    #[test]
    fn method_names_round_trip() {
        for m in [HurstMethod::RatioOrder1, HurstMethod::RatioOrder2, HurstMethod::QuadraticVariation] {
            assert_eq!(m.name().parse::<HurstMethod>().unwrap(), m);
        }
        assert!("rs".parse::<HurstMethod>().is_err());
    }
}

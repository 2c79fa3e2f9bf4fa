//! Detail-coefficient thresholding.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::wavelet::WaveletDecomposition;
use crate::{Error, Result};

/// Median absolute deviation to standard deviation for Gaussian data.
pub const MAD_NORMALIZER: f64 = 0.6745;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    #[default]
    Soft,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdEstimator {
    /// `sigma * sqrt(2 ln n)`.
    #[default]
    Universal,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMethod {
    #[default]
    Mad,
    Provided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdScaling {
    /// Noise scale and threshold estimated independently on every level.
    #[default]
    PerLevel,
    /// Noise scale estimated on `d_0` and reused on every level.
    SingleLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdPolicy {
    pub rule: ThresholdRule,
    pub estimator: ThresholdEstimator,
    pub sigma_method: SigmaMethod,
    pub scaling: ThresholdScaling,
    /// Threshold for the `fixed` estimator.
    pub fixed_value: Option<f64>,
    /// Noise scale for the `provided` sigma method.
    pub provided_sigma: Option<f64>,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        Self {
            rule: ThresholdRule::Soft,
            estimator: ThresholdEstimator::Universal,
            sigma_method: SigmaMethod::Mad,
            scaling: ThresholdScaling::PerLevel,
            fixed_value: None,
            provided_sigma: None,
        }
    }
}

impl ThresholdPolicy {
    /// A fixed zero threshold: leaves every coefficient untouched.
    pub fn identity() -> Self {
        Self { estimator: ThresholdEstimator::Fixed, fixed_value: Some(0.0), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.estimator, self.fixed_value) {
            (ThresholdEstimator::Fixed, None) => {
                return Err(Error::InvalidInput("fixed estimator requires fixed_value".into()))
            }
            (ThresholdEstimator::Fixed, Some(v)) if !(v >= 0.0 && v.is_finite()) => {
                return Err(Error::InvalidInput("fixed_value must be finite and >= 0".into()))
            }
            (ThresholdEstimator::Universal, Some(_)) => {
                return Err(Error::InvalidInput(
                    "fixed_value is only allowed with the fixed estimator".into(),
                ))
            }
            _ => {}
        }
        match (self.sigma_method, self.provided_sigma) {
            (SigmaMethod::Provided, None) => {
                Err(Error::InvalidInput("provided sigma method requires provided_sigma".into()))
            }
            (SigmaMethod::Provided, Some(s)) if !(s >= 0.0 && s.is_finite()) => {
                Err(Error::InvalidInput("provided_sigma must be finite and >= 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Robust noise scale `median(|c|) / 0.6745`.
pub fn estimate_sigma(coeffs: &[f64]) -> Result<f64> {
    let abs: Vec<f64> = coeffs.iter().map(|c| c.abs()).collect();
    let med = math::median(&abs)
        .ok_or_else(|| Error::InvalidInput("cannot estimate noise scale of an empty sequence".into()))?;
    Ok(med / MAD_NORMALIZER)
}

pub fn compute_threshold(sigma: f64, n: usize, policy: &ThresholdPolicy) -> f64 {
    match policy.estimator {
        ThresholdEstimator::Universal => sigma * math::sqrt(2.0 * math::ln(n.max(1) as f64)),
        ThresholdEstimator::Fixed => policy.fixed_value.unwrap_or(0.0),
    }
}

/// Applies the rule elementwise. Hard keeps `c` where `|c| > thr`; soft
/// shrinks magnitudes by `thr` towards zero.
pub fn apply_threshold(coeffs: &[f64], thr: f64, rule: ThresholdRule) -> Vec<f64> {
    coeffs
        .iter()
        .map(|&c| match rule {
            ThresholdRule::Hard => {
                if c.abs() > thr {
                    c
                } else {
                    0.0
                }
            }
            ThresholdRule::Soft => {
                let mag = c.abs() - thr;
                if mag > 0.0 {
                    mag.copysign(c)
                } else {
                    0.0
                }
            }
        })
        .collect()
}

/// Per-level bookkeeping from [`denoise_details`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub sigma: f64,
    pub threshold: f64,
    pub nonzero_before: usize,
    pub nonzero_after: usize,
}

/// Thresholds every detail level; the approximation is passed through untouched.
pub fn denoise_details(
    dec: &WaveletDecomposition,
    policy: &ThresholdPolicy,
) -> Result<(WaveletDecomposition, Vec<LevelStats>)> {
    policy.validate()?;
    let shared_sigma = match (policy.sigma_method, policy.scaling) {
        (SigmaMethod::Provided, _) => Some(policy.provided_sigma.unwrap_or(0.0)),
        (SigmaMethod::Mad, ThresholdScaling::SingleLevel) => match dec.details.first() {
            Some(d0) if !d0.is_empty() => Some(estimate_sigma(d0)?),
            _ => Some(0.0),
        },
        (SigmaMethod::Mad, ThresholdScaling::PerLevel) => None,
    };

    let mut out = dec.clone();
    let mut stats = Vec::with_capacity(dec.levels());
    for (level, detail) in dec.details.iter().enumerate() {
        let sigma = match shared_sigma {
            Some(s) => s,
            None if detail.is_empty() => 0.0,
            None => estimate_sigma(detail)?,
        };
        let thr = compute_threshold(sigma, detail.len(), policy);
        let cleaned = apply_threshold(detail, thr, policy.rule);
        stats.push(LevelStats {
            level,
            sigma,
            threshold: thr,
            nonzero_before: count_nonzero(detail),
            nonzero_after: count_nonzero(&cleaned),
        });
        out.details[level] = cleaned;
    }
    Ok((out, stats))
}

fn count_nonzero(v: &[f64]) -> usize {
    v.iter().filter(|c| **c != 0.0).count()
}

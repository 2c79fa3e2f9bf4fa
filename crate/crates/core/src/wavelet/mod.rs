//! Multi-level discrete wavelet analysis and synthesis.
//!
//! A decomposition of depth `L` holds the detail sequences `d_0 .. d_{L-1}`
//! (finest first) and the coarsest approximation `a_{L-1}`. Level `l` is
//! sampled at `sample_rate / 2^(l+1)`.

mod bank;
mod tables;
mod transform;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use bank::WaveletFilterBank;
pub use transform::{decompose, max_level, pad_to_multiple, reconstruct};

/// How the signal is extended past its ends during filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Circular extension. Coefficient count equals input length when the
    /// length is divisible by `2^L`.
    #[default]
    Periodic,
    /// Half-sample symmetric extension; each level grows by `(taps - 2) / 2`.
    Symmetric,
}

/// Coefficients `[d_0, ..., d_{L-1}, a_{L-1}]` plus the metadata needed to invert them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletDecomposition {
    /// Detail sequences, `details[l]` is `d_l` (finest first).
    pub details: Vec<Vec<f64>>,
    /// Approximation at the coarsest level.
    pub approximation: Vec<f64>,
    pub boundary: BoundaryMode,
    pub original_length: usize,
    pub sample_rate: f64,
    /// Input length of each analysis stage, `stage_lengths[0] == original_length`.
    pub stage_lengths: Vec<usize>,
}

impl WaveletDecomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Effective sampling rate of level `level`: `sample_rate / 2^(level+1)`.
    pub fn effective_rate(&self, level: usize) -> Result<f64> {
        if level >= self.levels() {
            return Err(Error::InvalidInput(alloc::format!(
                "level {level} out of range for a {}-level decomposition",
                self.levels()
            )));
        }
        Ok(effective_rate(self.sample_rate, level))
    }

    /// Boundary between thresholded detail bands and the approximation band,
    /// `sample_rate / 2^L`.
    pub fn cutoff_frequency(&self) -> f64 {
        cutoff_frequency(self.sample_rate, self.levels())
    }

    pub fn coefficient_count(&self) -> usize {
        self.details.iter().map(Vec::len).sum::<usize>() + self.approximation.len()
    }

    pub fn energy(&self) -> f64 {
        self.details.iter().map(|d| crate::math::energy(d)).sum::<f64>()
            + crate::math::energy(&self.approximation)
    }
}

pub fn effective_rate(sample_rate: f64, level: usize) -> f64 {
    sample_rate / (1u64 << (level + 1)) as f64
}

pub fn cutoff_frequency(sample_rate: f64, levels: usize) -> f64 {
    sample_rate / (1u64 << levels) as f64
}

use alloc::vec;
use alloc::vec::Vec;

use super::{Dictionary, SparseCode};
use crate::envelope::ErrorSchedule;
use crate::{Error, Result};

/// Lower bound on any column tolerance, keeps OMP well-posed on silent columns.
pub const MIN_COLUMN_TOLERANCE: f64 = 1e-12;

/// `d x M` Hankel matrix whose column `j` is `source[j .. j + d]`, with
/// `M = len(source) - d`. Stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchMatrix {
    data: Vec<f64>,
    window: usize,
    source_length: usize,
}

impl PatchMatrix {
    pub fn build(source: &[f64], window: usize) -> Result<Self> {
        if window < 2 {
            return Err(Error::InvalidInput(alloc::format!("patch window must be >= 2, got {window}")));
        }
        if window >= source.len() {
            return Err(Error::InvalidInput(alloc::format!(
                "patch window {window} must be shorter than the source ({} samples)",
                source.len()
            )));
        }
        let columns = source.len() - window;
        let mut data = Vec::with_capacity(window * columns);
        for j in 0..columns {
            data.extend_from_slice(&source[j..j + window]);
        }
        Ok(Self { data, window, source_length: source.len() })
    }

    /// Builds a patch matrix from raw column-major data (no Hankel structure implied).
    pub fn from_columns(window: usize, data: Vec<f64>) -> Result<Self> {
        if window == 0 || data.is_empty() || data.len() % window != 0 {
            return Err(Error::InvalidInput("column data must be a non-empty multiple of the window".into()));
        }
        let columns = data.len() / window;
        Ok(Self { data, window, source_length: columns + window })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn columns(&self) -> usize {
        self.data.len() / self.window
    }

    pub fn source_length(&self) -> usize {
        self.source_length
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.window..(j + 1) * self.window]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.window + row]
    }

    pub fn column_energies(&self) -> Vec<f64> {
        (0..self.columns()).map(|j| crate::math::energy(self.column(j))).collect()
    }
}

/// Per-column absolute tolerances `max(eps[j] * ||A_j||^2, 1e-12)`, where
/// `eps[j]` is the schedule value at the column's first sample.
pub fn column_tolerances(
    schedule: &ErrorSchedule,
    window: usize,
    column_energies: &[f64],
) -> Result<Vec<f64>> {
    let needed = column_energies.len() + window;
    if schedule.len() < needed {
        return Err(Error::InvalidInput(alloc::format!(
            "error schedule has {} values, patches need {needed}",
            schedule.len()
        )));
    }
    Ok(column_energies
        .iter()
        .enumerate()
        .map(|(j, e)| (schedule.values[j] * e).max(MIN_COLUMN_TOLERANCE))
        .collect())
}

/// Forms `D Z` and averages each anti-diagonal back into a sequence.
/// Samples no column covers (the last one) are copied from `passthrough`.
pub fn reconstruct_sequence(
    dict: &Dictionary,
    code: &SparseCode,
    source_length: usize,
    passthrough: &[f64],
) -> Result<Vec<f64>> {
    let window = dict.dim();
    let columns = code.columns.len();
    if columns + window != source_length {
        return Err(Error::InvalidInput(alloc::format!(
            "{columns} columns of window {window} do not tile a source of {source_length} samples"
        )));
    }
    if passthrough.len() != source_length {
        return Err(Error::InvalidInput("passthrough length differs from source length".into()));
    }
    let mut sum = vec![0.0; source_length];
    let mut count = vec![0usize; source_length];
    let mut patch = vec![0.0; window];
    for (j, col) in code.columns.iter().enumerate() {
        dict.synthesize_into(col, &mut patch);
        for (i, v) in patch.iter().enumerate() {
            sum[j + i] += v;
            count[j + i] += 1;
        }
    }
    Ok(sum
        .into_iter()
        .zip(count)
        .zip(passthrough)
        .map(|((s, c), p)| if c > 0 { s / c as f64 } else { *p })
        .collect())
}

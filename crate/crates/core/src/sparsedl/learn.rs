use alloc::vec;
use alloc::vec::Vec;

use super::{ksvd_update, sparse_code, CodingStats, Dictionary, KsvdOptions, PatchMatrix, SparseCode};
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnOptions {
    pub iterations: usize,
    /// Upper bound on atoms per column; `None` means `min(K, d)`.
    pub max_support: Option<usize>,
    pub exact_ksvd: bool,
    /// Stop once total support and total residual both move less than this (relative).
    pub early_stop: f64,
    pub seed: u64,
}

impl Default for LearnOptions {
    fn default() -> Self {
        Self { iterations: 20, max_support: None, exact_ksvd: false, early_stop: 1e-3, seed: 0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearnStats {
    pub iterations_run: usize,
    pub total_support: usize,
    pub total_residual: f64,
    pub unmet_columns: usize,
    pub replaced_atoms: usize,
    /// Total residual after each coding pass, final pass last.
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnOutput {
    pub dictionary: Dictionary,
    pub code: SparseCode,
    pub stats: LearnStats,
}

/// Alternates sparse coding and dictionary update, then codes once more
/// against the final dictionary so the returned code matches it.
pub fn learn(patches: &PatchMatrix, atoms: usize, tolerances: &[f64], options: LearnOptions) -> Result<LearnOutput> {
    if atoms == 0 {
        return Err(Error::InvalidInput("atom count must be at least 1".into()));
    }
    if options.iterations == 0 {
        return Err(Error::InvalidInput("iterations must be at least 1".into()));
    }
    if tolerances.len() != patches.columns() {
        return Err(Error::InvalidInput(alloc::format!(
            "{} tolerances for {} columns",
            tolerances.len(),
            patches.columns()
        )));
    }
    if tolerances.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidInput("tolerances must be positive and finite".into()));
    }
    let max_support = options.max_support.unwrap_or(atoms).min(atoms).min(patches.window());
    let mut dict = initial_dictionary(patches, atoms, options.seed)?;
    let mut stats = LearnStats::default();
    let mut previous: Option<CodingStats> = None;
    for _ in 0..options.iterations {
        let (mut code, coding) = sparse_code(&dict, patches, tolerances, max_support)?;
        stats.residual_history.push(coding.total_residual);
        let report = ksvd_update(&mut dict, patches, &mut code, KsvdOptions { exact: options.exact_ksvd })?;
        stats.replaced_atoms += report.replaced_atoms.len();
        stats.iterations_run += 1;
        let converged = previous.as_ref().is_some_and(|p| {
            relative_change(p.total_support as f64, coding.total_support as f64) < options.early_stop
                && relative_change(p.total_residual, coding.total_residual) < options.early_stop
        });
        previous = Some(coding);
        if converged {
            break;
        }
    }
    let (code, coding) = sparse_code(&dict, patches, tolerances, max_support)?;
    stats.residual_history.push(coding.total_residual);
    stats.total_support = coding.total_support;
    stats.total_residual = coding.total_residual;
    stats.unmet_columns = coding.unmet_columns;
    Ok(LearnOutput { dictionary: dict, code, stats })
}

fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

// Distinct columns drawn with probability proportional to energy. If the
// patches run out of energy, the remaining atoms are canonical basis vectors.
fn initial_dictionary(patches: &PatchMatrix, atoms: usize, seed: u64) -> Result<Dictionary> {
    let dim = patches.window();
    let mut weights = patches.column_energies();
    let mut rng = rng::stream(seed, rng::STREAM_DICTIONARY);
    let mut data = vec![0.0; dim * atoms];
    for k in 0..atoms {
        let total: f64 = weights.iter().sum();
        let slot = &mut data[k * dim..(k + 1) * dim];
        if total > 0.0 {
            let target = rng::uniform(&mut rng) * total;
            let mut acc = 0.0;
            let mut pick = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
            for (j, w) in weights.iter().enumerate() {
                acc += w;
                if *w > 0.0 && acc > target {
                    pick = j;
                    break;
                }
            }
            slot.copy_from_slice(patches.column(pick));
            weights[pick] = 0.0;
        } else {
            slot[k % dim] = 1.0;
        }
    }
    Dictionary::from_columns_normalized(dim, data)
}

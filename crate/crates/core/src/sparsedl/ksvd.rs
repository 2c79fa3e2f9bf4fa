use alloc::vec;
use alloc::vec::Vec;

use super::dictionary::normalize;
use super::{Dictionary, PatchMatrix, SparseCode};
use crate::{math, Error, Result};

/// Atoms whose absolute inner product exceeds this are treated as duplicates.
pub const COHERENCE_LIMIT: f64 = 0.999;

const POWER_ITERATIONS: usize = 200;
const POWER_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KsvdOptions {
    /// Use a converged rank-1 SVD per atom instead of the single approximate step.
    pub exact: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KsvdReport {
    pub updated_atoms: usize,
    /// Atoms replaced because they were unused or nearly duplicated another one.
    pub replaced_atoms: Vec<usize>,
}

/// One dictionary-update sweep. Each used atom and its code row are refit
/// against the residual that excludes that atom; unused or duplicated atoms
/// are then swapped for the worst-reconstructed patch columns.
pub fn ksvd_update(
    dict: &mut Dictionary,
    patches: &PatchMatrix,
    code: &mut SparseCode,
    options: KsvdOptions,
) -> Result<KsvdReport> {
    let dim = dict.dim();
    if patches.window() != dim || code.columns.len() != patches.columns() || code.atoms != dict.count() {
        return Err(Error::InvalidInput("dictionary, patches and code shapes disagree".into()));
    }
    let mut report = KsvdReport::default();
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); dict.count()];
    for (j, col) in code.columns.iter().enumerate() {
        for &k in &col.support {
            users[k].push(j);
        }
    }
    let mut rec = vec![0.0; dim];
    for k in 0..dict.count() {
        let cols = &users[k];
        if cols.is_empty() {
            continue;
        }
        // Residuals with atom k removed, one per using column.
        let mut residuals = Vec::with_capacity(cols.len() * dim);
        let mut g = Vec::with_capacity(cols.len());
        for &j in cols {
            let col = &code.columns[j];
            dict.synthesize_into(col, &mut rec);
            let gk = col.coefficient(k).unwrap_or(0.0);
            for ((a, r), d) in patches.column(j).iter().zip(&rec).zip(dict.atom(k)) {
                residuals.push(a - (r - gk * d));
            }
            g.push(gk);
        }
        let mut atom = vec![0.0; dim];
        for (e, gi) in residuals.chunks_exact(dim).zip(&g) {
            for (a, v) in atom.iter_mut().zip(e) {
                *a += gi * v;
            }
        }
        if !normalize(&mut atom) {
            for &j in cols {
                code.columns[j].remove(k);
            }
            continue;
        }
        if options.exact {
            power_iterate(&residuals, dim, &mut atom);
        }
        dict.atom_mut(k).copy_from_slice(&atom);
        for (e, &j) in residuals.chunks_exact(dim).zip(cols) {
            code.columns[j].set(k, math::dot(e, &atom));
        }
        report.updated_atoms += 1;
    }
    replace_degenerate(dict, patches, code, &mut report);
    Ok(report)
}

// Leading left singular vector of the residual block, started from `v`.
fn power_iterate(residuals: &[f64], dim: usize, v: &mut [f64]) {
    let mut next = vec![0.0; dim];
    for _ in 0..POWER_ITERATIONS {
        next.iter_mut().for_each(|x| *x = 0.0);
        for e in residuals.chunks_exact(dim) {
            let p = math::dot(e, v);
            for (n, x) in next.iter_mut().zip(e) {
                *n += p * x;
            }
        }
        if !normalize(&mut next) {
            return;
        }
        let change: f64 = next.iter().zip(v.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        v.copy_from_slice(&next);
        if change < POWER_TOLERANCE {
            return;
        }
    }
}

fn replace_degenerate(dict: &mut Dictionary, patches: &PatchMatrix, code: &mut SparseCode, report: &mut KsvdReport) {
    let usage = code.usage();
    let mut errors: Option<Vec<f64>> = None;
    for k in 0..dict.count() {
        let coherent = (0..k).any(|j| math::dot(dict.atom(j), dict.atom(k)).abs() > COHERENCE_LIMIT);
        if usage[k] > 0 && !coherent {
            continue;
        }
        let errs = errors.get_or_insert_with(|| {
            (0..patches.columns()).map(|j| dict.residual_energy(patches.column(j), &code.columns[j])).collect()
        });
        let mut worst = None;
        let mut worst_err = 0.0;
        for (j, &e) in errs.iter().enumerate() {
            if e > worst_err {
                worst_err = e;
                worst = Some(j);
            }
        }
        let Some(j) = worst else { continue };
        let mut atom = patches.column(j).to_vec();
        if !normalize(&mut atom) {
            continue;
        }
        dict.atom_mut(k).copy_from_slice(&atom);
        for col in code.columns.iter_mut() {
            col.remove(k);
        }
        errs[j] = -1.0;
        report.replaced_atoms.push(k);
    }
}

use alloc::vec;
use alloc::vec::Vec;

use super::{Dictionary, PatchMatrix, SparseCode, SparseColumn};
use crate::{math, Error, Result};

// Below this the new atom is numerically inside the span of the support.
const CHOLESKY_PIVOT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OmpOutput {
    pub code: SparseColumn,
    /// `||x - D z||^2` of the returned code.
    pub residual_energy: f64,
}

/// Error-constrained OMP with a progressive Cholesky factor of the support Gram matrix.
pub fn omp_encode(dict: &Dictionary, column: &[f64], tol: f64, max_support: usize) -> Result<OmpOutput> {
    omp_run(dict, column, tol, max_support, None)
}

/// Same as [`omp_encode`], also returning the residual energy before the
/// first selection and after each one.
pub fn omp_encode_traced(
    dict: &Dictionary,
    column: &[f64],
    tol: f64,
    max_support: usize,
) -> Result<(OmpOutput, Vec<f64>)> {
    let mut trace = Vec::new();
    let out = omp_run(dict, column, tol, max_support, Some(&mut trace))?;
    Ok((out, trace))
}

fn omp_run(
    dict: &Dictionary,
    x: &[f64],
    tol: f64,
    max_support: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<OmpOutput> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(alloc::format!("OMP tolerance must be positive, got {tol}")));
    }
    if x.len() != dict.dim() {
        return Err(Error::InvalidInput(alloc::format!(
            "column length {} differs from atom length {}",
            x.len(),
            dict.dim()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let k_atoms = dict.count();
    let max_support = max_support.min(k_atoms).min(dict.dim());
    let alpha: Vec<f64> = (0..k_atoms).map(|k| math::dot(dict.atom(k), x)).collect();

    let mut residual = x.to_vec();
    let mut res_energy = math::energy(x);
    let mut support: Vec<usize> = Vec::new();
    let mut coeffs: Vec<f64> = Vec::new();
    // Lower-triangular factor, row-major, row i has i+1 entries.
    let mut chol: Vec<f64> = Vec::new();
    let mut selected = vec![false; k_atoms];
    if let Some(t) = trace.as_deref_mut() {
        t.push(res_energy);
    }

    while res_energy > tol && support.len() < max_support {
        let mut best = None;
        let mut best_corr = 0.0;
        for k in 0..k_atoms {
            if selected[k] {
                continue;
            }
            let c = math::dot(dict.atom(k), &residual).abs();
            if c > best_corr {
                best_corr = c;
                best = Some(k);
            }
        }
        let Some(k) = best else { break };
        let atom = dict.atom(k);
        let s = support.len();
        let gram_kk = math::energy(atom);
        let mut w = vec![0.0; s];
        for i in 0..s {
            let mut v = math::dot(dict.atom(support[i]), atom);
            let row = i * (i + 1) / 2;
            for j in 0..i {
                v -= chol[row + j] * w[j];
            }
            w[i] = v / chol[row + i];
        }
        let pivot = gram_kk - math::energy(&w);
        if pivot <= CHOLESKY_PIVOT_FLOOR * gram_kk.max(1.0) {
            break;
        }
        chol.extend_from_slice(&w);
        chol.push(math::sqrt(pivot));
        support.push(k);
        selected[k] = true;

        // Solve L L^T c = alpha_I.
        let n = support.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = i * (i + 1) / 2;
            let mut v = alpha[support[i]];
            for j in 0..i {
                v -= chol[row + j] * y[j];
            }
            y[i] = v / chol[row + i];
        }
        let mut c = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = y[i];
            for j in i + 1..n {
                v -= chol[j * (j + 1) / 2 + i] * c[j];
            }
            c[i] = v / chol[i * (i + 1) / 2 + i];
        }
        residual.copy_from_slice(x);
        for (&idx, &ci) in support.iter().zip(&c) {
            for (r, a) in residual.iter_mut().zip(dict.atom(idx)) {
                *r -= ci * a;
            }
        }
        res_energy = math::energy(&residual);
        coeffs = c;
        if let Some(t) = trace.as_deref_mut() {
            t.push(res_energy);
        }
    }
    Ok(OmpOutput { code: SparseColumn { support, coeffs }, residual_energy: res_energy })
}

/// Summary of one sparse-coding pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CodingStats {
    pub total_support: usize,
    pub total_residual: f64,
    /// Columns whose residual stayed above tolerance (support saturated).
    pub unmet_columns: usize,
}

/// Codes every column of `patches` against `dict` with its own tolerance.
pub fn sparse_code(
    dict: &Dictionary,
    patches: &PatchMatrix,
    tolerances: &[f64],
    max_support: usize,
) -> Result<(SparseCode, CodingStats)> {
    if tolerances.len() != patches.columns() {
        return Err(Error::InvalidInput(alloc::format!(
            "{} tolerances for {} columns",
            tolerances.len(),
            patches.columns()
        )));
    }
    let mut stats = CodingStats::default();
    let mut columns = Vec::with_capacity(patches.columns());
    for (j, &tol) in tolerances.iter().enumerate() {
        let out = omp_encode(dict, patches.column(j), tol, max_support)?;
        stats.total_support += out.code.len();
        stats.total_residual += out.residual_energy;
        if out.residual_energy > tol {
            stats.unmet_columns += 1;
        }
        columns.push(out.code);
    }
    Ok((SparseCode { columns, atoms: dict.count() }, stats))
}

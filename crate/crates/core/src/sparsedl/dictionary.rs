use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{math, Error, Result};

const NORM_SLACK: f64 = 1e-10;

/// `dim x count` matrix of atoms stored column-major; every atom has norm at most one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dictionary {
    dim: usize,
    atoms: Vec<f64>,
}

impl Dictionary {
    pub fn new(dim: usize, atoms: Vec<f64>) -> Result<Self> {
        if dim == 0 || atoms.is_empty() || atoms.len() % dim != 0 {
            return Err(Error::InvalidInput("dictionary needs at least one atom of positive length".into()));
        }
        if atoms.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let dict = Self { dim, atoms };
        for k in 0..dict.count() {
            let norm = math::sqrt(math::energy(dict.atom(k)));
            if norm > 1.0 + NORM_SLACK {
                return Err(Error::InvalidInput(alloc::format!("atom {k} has norm {norm} > 1")));
            }
        }
        Ok(dict)
    }

    /// Normalises each column to unit length; zero columns stay zero.
    pub fn from_columns_normalized(dim: usize, mut atoms: Vec<f64>) -> Result<Self> {
        if dim == 0 || atoms.len() % dim != 0 {
            return Err(Error::InvalidInput("atom data must be a multiple of the dimension".into()));
        }
        for col in atoms.chunks_exact_mut(dim) {
            normalize(col);
        }
        Self::new(dim, atoms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.atoms.len() / self.dim
    }

    pub fn atom(&self, k: usize) -> &[f64] {
        &self.atoms[k * self.dim..(k + 1) * self.dim]
    }

    pub(crate) fn atom_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.atoms[k * self.dim..(k + 1) * self.dim]
    }

    /// Column-major atom storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.atoms
    }

    /// Writes `D z` into `out`.
    pub fn synthesize_into(&self, code: &SparseColumn, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&k, &c) in code.support.iter().zip(&code.coeffs) {
            for (o, a) in out.iter_mut().zip(self.atom(k)) {
                *o += c * a;
            }
        }
    }

    pub fn synthesize(&self, code: &SparseColumn) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim];
        self.synthesize_into(code, &mut out);
        out
    }

    /// Squared error `||x - D z||^2`.
    pub fn residual_energy(&self, x: &[f64], code: &SparseColumn) -> f64 {
        let rec = self.synthesize(code);
        x.iter().zip(&rec).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

pub(crate) fn normalize(v: &mut [f64]) -> bool {
    let norm = math::sqrt(math::energy(v));
    if norm > 0.0 && norm.is_finite() {
        v.iter_mut().for_each(|x| *x /= norm);
        true
    } else {
        false
    }
}

/// One sparse column of the activation matrix: atom indices and their weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseColumn {
    pub support: Vec<usize>,
    pub coeffs: Vec<f64>,
}

impl SparseColumn {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn coefficient(&self, atom: usize) -> Option<f64> {
        self.support.iter().position(|&k| k == atom).map(|p| self.coeffs[p])
    }

    pub(crate) fn remove(&mut self, atom: usize) {
        if let Some(p) = self.support.iter().position(|&k| k == atom) {
            self.support.remove(p);
            self.coeffs.remove(p);
        }
    }

    pub(crate) fn set(&mut self, atom: usize, value: f64) {
        match self.support.iter().position(|&k| k == atom) {
            Some(p) => self.coeffs[p] = value,
            None => {
                self.support.push(atom);
                self.coeffs.push(value);
            }
        }
    }
}

/// `K x M` activation matrix stored column-sparse.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseCode {
    pub columns: Vec<SparseColumn>,
    /// Number of atoms (rows).
    pub atoms: usize,
}

impl SparseCode {
    pub fn total_support(&self) -> usize {
        self.columns.iter().map(SparseColumn::len).sum()
    }

    /// Number of columns that use each atom.
    pub fn usage(&self) -> Vec<usize> {
        let mut usage = alloc::vec![0usize; self.atoms];
        for col in &self.columns {
            for (&k, &c) in col.support.iter().zip(&col.coeffs) {
                if c != 0.0 {
                    usage[k] += 1;
                }
            }
        }
        usage
    }

    /// Frobenius error `||A - D Z||_F^2` against a patch matrix.
    pub fn reconstruction_error(&self, dict: &Dictionary, patches: &super::PatchMatrix) -> f64 {
        self.columns
            .iter()
            .enumerate()
            .map(|(j, col)| dict.residual_energy(patches.column(j), col))
            .sum()
    }
}

//! Error-constrained sparse dictionary learning on a Hankel patch matrix.
//!
//! The approximation sequence is unfolded into overlapping windows, each
//! window is coded by orthogonal matching pursuit against a small learned
//! dictionary until its own squared-error tolerance is met, and the atoms are
//! refined with approximate K-SVD. The denoised sequence is read back off the
//! anti-diagonals of the reconstructed patch matrix.

mod dictionary;
mod ksvd;
mod learn;
mod omp;
mod patch;

pub use dictionary::{Dictionary, SparseCode, SparseColumn};
pub use ksvd::{ksvd_update, KsvdOptions, KsvdReport};
pub use learn::{learn, LearnOptions, LearnOutput, LearnStats};
pub use omp::{omp_encode, omp_encode_traced, sparse_code, CodingStats, OmpOutput};
pub use patch::{column_tolerances, reconstruct_sequence, PatchMatrix, MIN_COLUMN_TOLERANCE};

//! Full-band denoising of room impulse responses.
//!
//! Detail coefficients of a multi-level discrete wavelet transform are
//! thresholded; the coarsest approximation band is re-synthesised through
//! error-constrained sparse dictionary learning whose per-sample tolerance
//! follows a fitted decay-plus-floor envelope. The crate also carries the
//! evaluation metrics (Schroeder decay curves, DT60) and the synthetic
//! modal-signal generators used to benchmark the method.
//!
//! The crate is `no_std` and only needs `alloc`. Enable the `std` feature to
//! get `std::error::Error` on [`Error`].
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod acoustics;
pub mod envelope;
mod error;
pub mod filter;
pub(crate) mod math;
pub mod pipeline;
pub mod rng;
mod signal;
pub mod sparsedl;
pub mod synth;
pub mod threshold;
pub mod wavelet;

pub use error::{Error, Result};
pub use signal::Signal;

use alloc::vec;
use alloc::vec::Vec;

use super::{BoundaryMode, WaveletDecomposition, WaveletFilterBank};
use crate::{Error, Result, Signal};

/// Deepest level a signal of `length` samples supports.
///
/// Periodic mode needs `2^L <= length`; symmetric mode follows the usual
/// `floor(log2(length / (taps - 1)))` rule so the coarsest stage still sees
/// more samples than the filter has taps.
pub fn max_level(length: usize, taps: usize, boundary: BoundaryMode) -> usize {
    match boundary {
        BoundaryMode::Periodic => {
            if length == 0 {
                0
            } else {
                (usize::BITS - 1 - length.leading_zeros()) as usize
            }
        }
        BoundaryMode::Symmetric => {
            let span = taps.saturating_sub(1).max(1);
            let ratio = length / span;
            if ratio == 0 {
                0
            } else {
                (usize::BITS - 1 - ratio.leading_zeros()) as usize
            }
        }
    }
}

/// Zero-pads the tail so the length is a multiple of `2^levels`.
/// Returns the padded samples and the number of zeros appended.
pub fn pad_to_multiple(samples: &[f64], levels: usize) -> (Vec<f64>, usize) {
    let block = 1usize << levels;
    let padded_len = samples.len().div_ceil(block) * block;
    let mut out = Vec::with_capacity(padded_len);
    out.extend_from_slice(samples);
    out.resize(padded_len, 0.0);
    (out, padded_len - samples.len())
}

/// Multi-level analysis: convolution with the analysis pair followed by
/// downsampling by two, iterated on the approximation.
pub fn decompose(
    signal: &Signal,
    bank: &WaveletFilterBank,
    levels: usize,
    boundary: BoundaryMode,
) -> Result<WaveletDecomposition> {
    if levels == 0 {
        return Err(Error::InvalidInput("decomposition needs at least one level".into()));
    }
    let n = signal.len();
    let max = max_level(n, bank.taps(), boundary);
    if levels > max {
        return Err(Error::LevelTooDeep { requested: levels, max_feasible: max, length: n });
    }
    if boundary == BoundaryMode::Periodic && n % (1usize << levels) != 0 {
        return Err(Error::LengthNotDivisible { length: n, levels });
    }

    let mut details = Vec::with_capacity(levels);
    let mut stage_lengths = Vec::with_capacity(levels);
    let mut current = signal.samples().to_vec();
    for _ in 0..levels {
        stage_lengths.push(current.len());
        let (approx, detail) = match boundary {
            BoundaryMode::Periodic => analyze_periodic(&current, bank),
            BoundaryMode::Symmetric => analyze_symmetric(&current, bank),
        };
        details.push(detail);
        current = approx;
    }
    Ok(WaveletDecomposition {
        details,
        approximation: current,
        boundary,
        original_length: n,
        sample_rate: signal.sample_rate(),
        stage_lengths,
    })
}

/// Inverse of [`decompose`]; `bank` must be the one used for analysis.
pub fn reconstruct(dec: &WaveletDecomposition, bank: &WaveletFilterBank) -> Result<Signal> {
    let levels = dec.levels();
    if levels == 0 || dec.stage_lengths.len() != levels {
        return Err(Error::Structure("stage length record does not match level count".into()));
    }
    if dec.stage_lengths[0] != dec.original_length {
        return Err(Error::Structure("first stage length differs from original length".into()));
    }
    let mut current = dec.approximation.clone();
    for level in (0..levels).rev() {
        let detail = &dec.details[level];
        let target = dec.stage_lengths[level];
        let expected = match dec.boundary {
            BoundaryMode::Periodic => target / 2,
            BoundaryMode::Symmetric => (target + bank.taps() - 1) / 2,
        };
        if detail.len() != expected || current.len() != expected {
            return Err(Error::Structure(alloc::format!(
                "level {level}: expected {expected} coefficients, found approximation {} / detail {}",
                current.len(),
                detail.len()
            )));
        }
        current = match dec.boundary {
            BoundaryMode::Periodic => synthesize_periodic(&current, detail, bank, target),
            BoundaryMode::Symmetric => synthesize_symmetric(&current, detail, bank, target),
        };
    }
    Signal::new(current, dec.sample_rate)
}

// a[n] = sum_k g[k] x[(2n + off - k) mod N], off = taps / 2 centres the filter.
fn analyze_periodic(x: &[f64], bank: &WaveletFilterBank) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let taps = bank.taps();
    let off = taps / 2;
    let half = n / 2;
    // ext[j] = x[(j - taps) mod n]; the sample index 2i + off - k maps to ext[2i + off - k + taps].
    let ext_len = n + off + taps;
    let ext: Vec<f64> = (0..ext_len).map(|j| x[(j + n * taps - taps) % n]).collect();
    let (g, h) = (&bank.analysis_low, &bank.analysis_high);
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for i in 0..half {
        let top = 2 * i + off + taps;
        let (mut a, mut d) = (0.0, 0.0);
        for k in 0..taps {
            let v = ext[top - k];
            a += g[k] * v;
            d += h[k] * v;
        }
        approx[i] = a;
        detail[i] = d;
    }
    (approx, detail)
}

// Exact adjoint of `analyze_periodic`, written with the synthesis filters
// (synthesis[j] = analysis[taps - 1 - j]).
fn synthesize_periodic(
    approx: &[f64],
    detail: &[f64],
    bank: &WaveletFilterBank,
    n: usize,
) -> Vec<f64> {
    let taps = bank.taps();
    let off = taps / 2;
    let (gs, hs) = (&bank.synthesis_low, &bank.synthesis_high);
    let ext_len = n + off + taps;
    let mut ext = vec![0.0; ext_len];
    for i in 0..approx.len() {
        let top = 2 * i + off + taps;
        let (a, d) = (approx[i], detail[i]);
        for k in 0..taps {
            ext[top - k] += gs[taps - 1 - k] * a + hs[taps - 1 - k] * d;
        }
    }
    let mut out = vec![0.0; n];
    for (j, v) in ext.into_iter().enumerate() {
        out[(j + n * taps - taps) % n] += v;
    }
    out
}

fn symmetric_index(mut i: isize, n: isize) -> usize {
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

// a[o] = sum_j g[j] x_ext[2o + 1 - j], half-sample symmetric extension,
// output length floor((N + taps - 1) / 2).
fn analyze_symmetric(x: &[f64], bank: &WaveletFilterBank) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as isize;
    let taps = bank.taps();
    let out_len = (x.len() + taps - 1) / 2;
    let (g, h) = (&bank.analysis_low, &bank.analysis_high);
    let mut approx = vec![0.0; out_len];
    let mut detail = vec![0.0; out_len];
    for o in 0..out_len {
        let (mut a, mut d) = (0.0, 0.0);
        for j in 0..taps {
            let v = x[symmetric_index(2 * o as isize + 1 - j as isize, n)];
            a += g[j] * v;
            d += h[j] * v;
        }
        approx[o] = a;
        detail[o] = d;
    }
    (approx, detail)
}

// Upsample, convolve with the synthesis filters, keep samples starting at
// taps - 2 of the full convolution.
fn synthesize_symmetric(
    approx: &[f64],
    detail: &[f64],
    bank: &WaveletFilterBank,
    n: usize,
) -> Vec<f64> {
    let taps = bank.taps();
    let (gs, hs) = (&bank.synthesis_low, &bank.synthesis_high);
    let start = taps - 2;
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let m = i + start;
        // full[m] = sum_j f[j] up[m - j], up nonzero at even positions 2o.
        let mut acc = 0.0;
        let j0 = m % 2;
        let mut j = j0;
        while j < taps && j <= m {
            let o = (m - j) / 2;
            if o < approx.len() {
                acc += gs[j] * approx[o] + hs[j] * detail[o];
            }
            j += 2;
        }
        *slot = acc;
    }
    out
}

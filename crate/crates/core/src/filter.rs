//! Butterworth design as second-order sections and zero-phase filtering.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{math, Error, Result};

/// One biquad `[b0, b1, b2, a0, a1, a2]` with `a0 = 1`.
pub type Section = [f64; 6];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ButterworthKind {
    Lowpass { cutoff_hz: f64 },
    Highpass { cutoff_hz: f64 },
    Bandpass { low_hz: f64, high_hz: f64 },
}

/// Filter description accepted wherever a shaping or band filter is configurable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "design", rename_all = "snake_case")]
pub enum FilterSpec {
    Butterworth {
        #[serde(flatten)]
        kind: ButterworthKind,
        order: usize,
    },
    /// Explicit sections, used as given.
    Sos { sections: Vec<Section> },
}

impl FilterSpec {
    pub fn lowpass(cutoff_hz: f64, order: usize) -> Self {
        Self::Butterworth { kind: ButterworthKind::Lowpass { cutoff_hz }, order }
    }

    pub fn design(&self, sample_rate: f64) -> Result<Vec<Section>> {
        match self {
            Self::Butterworth { kind, order } => butterworth(*kind, *order, sample_rate),
            Self::Sos { sections } => {
                if sections.is_empty() {
                    return Err(Error::InvalidInput("empty section list".into()));
                }
                for s in sections {
                    if s.iter().any(|v| !v.is_finite()) || s[3] == 0.0 {
                        return Err(Error::InvalidInput("malformed second-order section".into()));
                    }
                }
                Ok(sections.iter().map(|s| s.map(|v| v / s[3])).collect())
            }
        }
    }
}

/// Digital Butterworth filter via the bilinear transform with prewarped edges.
/// Band-pass designs have `2 * order` poles. Passband gain is normalised to one
/// at DC, Nyquist, or the geometric band centre respectively.
pub fn butterworth(kind: ButterworthKind, order: usize, sample_rate: f64) -> Result<Vec<Section>> {
    if order == 0 || order > 32 {
        return Err(Error::InvalidInput(alloc::format!("filter order {order} out of range 1..=32")));
    }
    if !(sample_rate > 0.0) || !sample_rate.is_finite() {
        return Err(Error::InvalidInput("sample rate must be positive".into()));
    }
    let nyquist = sample_rate / 2.0;
    let check = |f: f64| {
        if f > 0.0 && f < nyquist {
            Ok(())
        } else {
            Err(Error::InvalidInput(alloc::format!("edge {f} Hz outside (0, {nyquist}) Hz")))
        }
    };
    let fs2 = 2.0 * sample_rate;
    let warp = |f: f64| fs2 * math::tan(core::f64::consts::PI * f / sample_rate);
    let proto: Vec<Complex64> = (0..order)
        .map(|k| {
            let theta = core::f64::consts::PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            Complex64::new(libm::cos(theta), libm::sin(theta))
        })
        .collect();

    // Analog poles plus the digital zero at z = +1 / -1 paired with each.
    let (poles, zeros, reference): (Vec<Complex64>, Vec<f64>, f64) = match kind {
        ButterworthKind::Lowpass { cutoff_hz } => {
            check(cutoff_hz)?;
            let w = warp(cutoff_hz);
            (proto.iter().map(|p| p * w).collect(), alloc::vec![-1.0; order], 0.0)
        }
        ButterworthKind::Highpass { cutoff_hz } => {
            check(cutoff_hz)?;
            let w = warp(cutoff_hz);
            (proto.iter().map(|p| w / p).collect(), alloc::vec![1.0; order], core::f64::consts::PI)
        }
        ButterworthKind::Bandpass { low_hz, high_hz } => {
            check(low_hz)?;
            check(high_hz)?;
            if low_hz >= high_hz {
                return Err(Error::InvalidInput("band edges must be increasing".into()));
            }
            let (wl, wh) = (warp(low_hz), warp(high_hz));
            let bw = wh - wl;
            let w0 = math::sqrt(wl * wh);
            let mut poles = Vec::with_capacity(2 * order);
            for p in &proto {
                let half = p * (bw / 2.0);
                let root = (half * half - w0 * w0).sqrt();
                poles.push(half + root);
                poles.push(half - root);
            }
            let mut zeros = alloc::vec![1.0; order];
            zeros.extend(core::iter::repeat(-1.0).take(order));
            (poles, zeros, 2.0 * libm::atan(w0 / fs2))
        }
    };
    let digital: Vec<Complex64> = poles.iter().map(|s| (fs2 + s) / (fs2 - s)).collect();
    let mut sections = pair_sections(&digital, &zeros)?;
    let ref_z = Complex64::from_polar(1.0, reference);
    let h = response_at(&sections, ref_z);
    let gain = 1.0 / h.norm();
    for v in sections[0][..3].iter_mut() {
        *v *= gain;
    }
    Ok(sections)
}

// Groups conjugate pole pairs into biquads; a leftover real pole gets a first-order section.
fn pair_sections(poles: &[Complex64], zeros: &[f64]) -> Result<Vec<Section>> {
    let tol = 1e-9;
    let mut upper: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > tol).collect();
    let mut real: Vec<f64> = poles.iter().filter(|p| p.im.abs() <= tol).map(|p| p.re).collect();
    upper.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    real.sort_by(f64::total_cmp);
    let mut zeros: Vec<f64> = zeros.to_vec();
    let mut take_zeros = |n: usize| -> [f64; 3] {
        match n {
            1 => {
                let z = zeros.pop().unwrap_or(0.0);
                [1.0, -z, 0.0]
            }
            _ => {
                let z1 = zeros.pop().unwrap_or(0.0);
                let z2 = zeros.pop().unwrap_or(0.0);
                [1.0, -(z1 + z2), z1 * z2]
            }
        }
    };
    let mut sections = Vec::new();
    for p in &upper {
        let b = take_zeros(2);
        sections.push([b[0], b[1], b[2], 1.0, -2.0 * p.re, p.norm_sqr()]);
    }
    let mut it = real.chunks(2);
    for pair in &mut it {
        if pair.len() == 2 {
            let b = take_zeros(2);
            sections.push([b[0], b[1], b[2], 1.0, -(pair[0] + pair[1]), pair[0] * pair[1]]);
        } else {
            let b = take_zeros(1);
            sections.push([b[0], b[1], 0.0, 1.0, -pair[0], 0.0]);
        }
    }
    if sections.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite);
    }
    Ok(sections)
}

/// Complex response of the cascade at `z`.
pub fn response_at(sections: &[Section], z: Complex64) -> Complex64 {
    let zi = z.inv();
    sections.iter().fold(Complex64::new(1.0, 0.0), |acc, s| {
        let num = s[0] + zi * (s[1] + zi * s[2]);
        let den = s[3] + zi * (s[4] + zi * s[5]);
        acc * num / den
    })
}

/// Magnitude response at `freq_hz`.
pub fn magnitude(sections: &[Section], freq_hz: f64, sample_rate: f64) -> f64 {
    let w = 2.0 * core::f64::consts::PI * freq_hz / sample_rate;
    response_at(sections, Complex64::from_polar(1.0, w)).norm()
}

/// Causal cascade filter (transposed direct form II) with optional initial state.
pub fn sosfilt(sections: &[Section], x: &[f64], state: Option<&[[f64; 2]]>) -> Vec<f64> {
    let mut zs: Vec<[f64; 2]> = match state {
        Some(s) => s.to_vec(),
        None => alloc::vec![[0.0; 2]; sections.len()],
    };
    let mut y = x.to_vec();
    for (s, z) in sections.iter().zip(zs.iter_mut()) {
        for v in y.iter_mut() {
            let input = *v;
            let out = s[0] * input + z[0];
            z[0] = s[1] * input - s[4] * out + z[1];
            z[1] = s[2] * input - s[5] * out;
            *v = out;
        }
    }
    y
}

/// Steady-state section states for a unit step input.
pub fn sosfilt_zi(sections: &[Section]) -> Vec<[f64; 2]> {
    let mut scale = 1.0;
    sections
        .iter()
        .map(|s| {
            let gain = (s[0] + s[1] + s[2]) / (s[3] + s[4] + s[5]);
            let zi = [scale * (gain - s[0]), scale * (s[2] - s[5] * gain)];
            scale *= gain;
            zi
        })
        .collect()
}

/// Default odd-extension length for [`sosfiltfilt`].
pub fn default_padlen(sections: &[Section]) -> usize {
    let zero_b2 = sections.iter().filter(|s| s[2] == 0.0).count();
    let zero_a2 = sections.iter().filter(|s| s[5] == 0.0).count();
    3 * (2 * sections.len() + 1 - zero_b2.min(zero_a2))
}

/// Forward-backward filtering with odd extension and steady-state initial
/// conditions. Zero phase; squared magnitude response.
pub fn sosfiltfilt(sections: &[Section], x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::InvalidInput("zero-phase filtering needs at least two samples".into()));
    }
    let n = x.len();
    let pad = default_padlen(sections).min(n - 1);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

    let zi = sosfilt_zi(sections);
    let scaled = |v: f64| -> Vec<[f64; 2]> { zi.iter().map(|z| [z[0] * v, z[1] * v]).collect() };
    let mut y = sosfilt(sections, &ext, Some(&scaled(ext[0])));
    y.reverse();
    let mut y = sosfilt(sections, &y, Some(&scaled(y[0])));
    y.reverse();
    Ok(y[pad..pad + n].to_vec())
}

/// A third-octave band: nominal centre and exact base-two edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThirdOctaveBand {
    pub nominal_hz: f64,
    pub center_hz: f64,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl ThirdOctaveBand {
    /// Band whose exact centre `1000 * 2^(k/3)` is closest to `nominal_hz`.
    pub fn from_nominal(nominal_hz: f64) -> Self {
        let k = libm::round(3.0 * libm::log2(nominal_hz / 1000.0));
        let center_hz = 1000.0 * libm::exp2(k / 3.0);
        let edge = libm::exp2(1.0 / 6.0);
        Self { nominal_hz, center_hz, low_hz: center_hz / edge, high_hz: center_hz * edge }
    }

    pub fn filter(&self, order: usize, sample_rate: f64) -> Result<Vec<Section>> {
        butterworth(ButterworthKind::Bandpass { low_hz: self.low_hz, high_hz: self.high_hz }, order, sample_rate)
    }
}

/// Nominal third-octave centres from 25 Hz to 100 Hz.
pub const LOW_BAND_CENTERS: [f64; 7] = [25.0, 31.5, 40.0, 50.0, 63.0, 80.0, 100.0];

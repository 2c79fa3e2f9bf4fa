//! Room-acoustic metrics: Schroeder decay curves, DT60 and noise-floor improvement.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::envelope::{fit_envelope, EnvelopeOptions};
use crate::filter::{sosfiltfilt, ThirdOctaveBand};
use crate::{math, Error, Result, Signal};

/// Level reported where the remaining energy is exactly zero.
pub const EDC_FLOOR_DB: f64 = -300.0;
/// Cap on reported dynamic improvement.
pub const MAX_IMPROVEMENT_DB: f64 = 300.0;
pub const DEFAULT_FIT_RANGE_DB: (f64, f64) = (-5.0, -25.0);
/// Band-pass prototype order for per-band decay estimates.
pub const BAND_FILTER_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyDecayCurve {
    pub values_db: Vec<f64>,
    pub sample_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub dt60_seconds: f64,
    /// `(upper, lower)` in dB.
    pub fit_range_db: (f64, f64),
    pub fit_r2: f64,
}

/// Backward-integrated energy decay curve, normalised to 0 dB at the first sample.
pub fn schroeder_edc(signal: &Signal) -> Result<EnergyDecayCurve> {
    if signal.is_silent() {
        return Err(Error::ZeroSignal);
    }
    let h = signal.samples();
    let mut tail = alloc::vec![0.0; h.len()];
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for n in (0..h.len()).rev() {
        let v = h[n] * h[n];
        let t = sum + v;
        if sum >= v {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
        tail[n] = sum + comp;
    }
    let total = tail[0];
    let mut values_db = Vec::with_capacity(h.len());
    let mut last = 0.0f64;
    for (n, e) in tail.iter().enumerate() {
        let db = if *e > 0.0 { (10.0 * math::log10(e / total)).max(EDC_FLOOR_DB) } else { EDC_FLOOR_DB };
        let db = if n == 0 { 0.0 } else { db.min(last) };
        values_db.push(db);
        last = db;
    }
    Ok(EnergyDecayCurve { values_db, sample_rate: signal.sample_rate() })
}

/// Line fit to the decay curve between `upper` and `lower` dB; DT60 is the
/// time for the fitted line to fall 60 dB.
pub fn estimate_dt60(edc: &EnergyDecayCurve, range_db: (f64, f64)) -> Result<DecayEstimate> {
    let (upper, lower) = range_db;
    if !(upper > lower) || upper > 0.0 {
        return Err(Error::InvalidInput(alloc::format!("fit range ({upper}, {lower}) dB must satisfy 0 >= upper > lower")));
    }
    let v = &edc.values_db;
    let reached = v.last().copied().unwrap_or(0.0);
    let start = v.iter().position(|x| *x <= upper);
    let end = v.iter().position(|x| *x < lower);
    let (Some(start), Some(end)) = (start, end) else {
        return Err(Error::InsufficientDecay { lower_db: lower, reached_db: reached });
    };
    if end < start + 2 {
        return Err(Error::InsufficientDecay { lower_db: lower, reached_db: reached });
    }
    let seg = &v[start..end];
    let count = seg.len() as f64;
    let mean_x = (start + end - 1) as f64 / 2.0;
    let mean_y = seg.iter().sum::<f64>() / count;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (i, y) in seg.iter().enumerate() {
        let dx = (start + i) as f64 - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::InsufficientDecay { lower_db: lower, reached_db: reached });
    }
    let fit_r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    let slope_per_second = slope * edc.sample_rate;
    Ok(DecayEstimate { dt60_seconds: 60.0 / slope_per_second.abs(), fit_range_db: range_db, fit_r2 })
}

/// DT60 of one decaying mode `e^{-alpha n}`: `3 / (alpha log10 e) / rate` seconds.
pub fn exact_mode_dt60(alpha: f64, rate: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(rate > 0.0) {
        return Err(Error::InvalidInput("decay and rate must be positive".into()));
    }
    Ok(3.0 / (alpha * core::f64::consts::LOG10_E) / rate)
}

/// `20 log10 x3(before) - 20 log10 x3(after)`, capped at [`MAX_IMPROVEMENT_DB`].
pub fn dynamic_improvement(before: &Signal, after: &Signal, options: &EnvelopeOptions) -> Result<f64> {
    if before.len() != after.len() || before.sample_rate() != after.sample_rate() {
        return Err(Error::InvalidInput("signals differ in length or rate".into()));
    }
    let a = fit_envelope(before, options)?;
    let b = fit_envelope(after, options)?;
    Ok(improvement_from_floors(a.x3, b.x3))
}

/// Floor difference in dB between two floor amplitudes, with the cap applied.
pub fn improvement_from_floors(before: f64, after: f64) -> f64 {
    let db = |x: f64| if x > 0.0 { 20.0 * math::log10(x) } else { f64::NEG_INFINITY };
    let d = db(before) - db(after);
    if d.is_nan() {
        0.0
    } else {
        d.clamp(-MAX_IMPROVEMENT_DB, MAX_IMPROVEMENT_DB)
    }
}

/// Band-passes `signal` (zero phase) and returns its decay estimate.
pub fn band_dt60(signal: &Signal, band: &ThirdOctaveBand, range_db: (f64, f64)) -> Result<DecayEstimate> {
    let sos = band.filter(BAND_FILTER_ORDER, signal.sample_rate())?;
    let filtered = sosfiltfilt(&sos, signal.samples())?;
    let edc = schroeder_edc(&signal.with_samples(filtered)?)?;
    estimate_dt60(&edc, range_db)
}

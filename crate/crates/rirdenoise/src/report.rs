//! CSV tables and JSON summaries.

use std::io::Write;

use rirdenoise_core::acoustics::{DecayEstimate, EnergyDecayCurve};
use rirdenoise_core::synth::{dt60_error, ExperimentRecord, SweepPlan};
use serde::{Deserialize, Serialize};

/// Column order of the sweep records table.
pub const RECORD_HEADER: [&str; 12] = [
    "trial",
    "factor",
    "seed",
    "snr_db",
    "band_hz",
    "below_cutoff",
    "arm",
    "exact_dt60_s",
    "estimated_dt60_s",
    "relative_error",
    "improvement_db",
    "status",
];

pub const EDC_HEADER: [&str; 3] = ["sample", "time_s", "edc_db"];

pub const BAND_HEADER: [&str; 7] = ["file", "band_hz", "low_hz", "high_hz", "dt60_s", "fit_r2", "status"];

pub const ARMS: [&str; 3] = ["noisy", "baseline", "proposed"];

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One row per trial, band and arm. Failed trials still get their rows, with
/// empty estimates and `trial_failed` status.
pub fn write_records_csv<W: Write>(out: W, plan: &SweepPlan, records: &[ExperimentRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    let bands = plan.bands();
    for (i, rec) in records.iter().enumerate() {
        let exact = plan.base_spec.with_decay_factor(rec.key.factor).exact_dt60().unwrap_or_default();
        for (b, band) in bands.iter().enumerate() {
            let band_rec = rec.bands.get(b);
            for arm in ARMS {
                let (estimate, improvement) = match (band_rec, arm) {
                    (Some(r), "noisy") => (r.noisy_dt60, None),
                    (Some(r), "baseline") => (r.baseline_dt60, rec.baseline_improvement_db),
                    (Some(r), _) => (r.proposed_dt60, rec.proposed_improvement_db),
                    (None, _) => (None, None),
                };
                let exact_b = exact.get(b).copied().unwrap_or(f64::NAN);
                let status = match (&rec.error, estimate) {
                    (Some(_), _) => "trial_failed",
                    (None, Some(_)) => "ok",
                    (None, None) => "no_estimate",
                };
                let below = band.high_hz <= rec.cutoff_hz;
                w.write_record([
                    i.to_string(),
                    num(rec.key.factor),
                    rec.key.seed.to_string(),
                    num(rec.key.snr_db),
                    num(band.nominal_hz),
                    below.to_string(),
                    arm.to_string(),
                    num(exact_b),
                    opt(estimate),
                    opt(estimate.map(|e| (e / exact_b - 1.0).abs())),
                    opt(improvement),
                    status.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Median statistics of one (factor, snr, arm) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub factor: f64,
    pub snr_db: f64,
    pub arm: String,
    /// Median relative DT60 error over seeds and bands; missing estimates count
    /// as infinite. `None` when the median itself is infinite.
    pub median_dt60_error: Option<f64>,
    /// As above, restricted to bands entirely below the wavelet cutoff.
    pub median_dt60_error_below_cutoff: Option<f64>,
    /// Median dynamic improvement (not defined for the noisy arm).
    pub median_improvement_db: Option<f64>,
    pub estimates: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub succeeded: usize,
    pub cells: Vec<SummaryCell>,
}

impl Summary {
    pub fn cell(&self, factor: f64, snr_db: f64, arm: &str) -> Option<&SummaryCell> {
        self.cells.iter().find(|c| c.factor == factor && c.snr_db == snr_db && c.arm == arm)
    }

    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.succeeded as f64 / self.trials as f64
        }
    }
}

/// Median with infinities allowed; `None` for an empty slice.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

fn finite(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite())
}

pub fn summarize(records: &[ExperimentRecord]) -> Summary {
    let mut keys: Vec<(f64, f64)> = records.iter().map(|r| (r.key.factor, r.key.snr_db)).collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    let mut cells = Vec::new();
    for (factor, snr_db) in keys {
        let group: Vec<&ExperimentRecord> =
            records.iter().filter(|r| r.key.factor == factor && r.key.snr_db == snr_db).collect();
        for arm in ARMS {
            let (mut all, mut below, mut impr) = (Vec::new(), Vec::new(), Vec::new());
            let mut missing = 0;
            for rec in &group {
                for b in &rec.bands {
                    let est = match arm {
                        "noisy" => b.noisy_dt60,
                        "baseline" => b.baseline_dt60,
                        _ => b.proposed_dt60,
                    };
                    if est.is_none() {
                        missing += 1;
                    }
                    let e = dt60_error(est, b.exact_dt60);
                    all.push(e);
                    if b.below_cutoff {
                        below.push(e);
                    }
                }
                let imp = match arm {
                    "baseline" => rec.baseline_improvement_db,
                    "proposed" => rec.proposed_improvement_db,
                    _ => None,
                };
                impr.extend(imp);
            }
            cells.push(SummaryCell {
                factor,
                snr_db,
                arm: arm.to_string(),
                median_dt60_error: finite(median(&all)),
                median_dt60_error_below_cutoff: finite(median(&below)),
                median_improvement_db: median(&impr),
                estimates: all.len() - missing,
                missing,
            });
        }
    }
    Summary { trials: records.len(), succeeded: records.iter().filter(|r| r.succeeded()).count(), cells }
}

pub fn write_edc_csv<W: Write>(out: W, edc: &EnergyDecayCurve) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EDC_HEADER)?;
    for (n, v) in edc.values_db.iter().enumerate() {
        w.write_record([n.to_string(), num(n as f64 / edc.sample_rate), num(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of the per-band DT60 table.
#[derive(Debug, Clone, PartialEq)]
pub struct BandRow {
    pub file: String,
    pub band_hz: f64,
    pub low_hz: f64,
    pub high_hz: f64,
    pub estimate: Result<DecayEstimate, String>,
}

pub fn write_band_csv<W: Write>(out: W, rows: &[BandRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BAND_HEADER)?;
    for r in rows {
        let (dt, r2, status) = match &r.estimate {
            Ok(e) => (num(e.dt60_seconds), num(e.fit_r2), "ok".to_string()),
            Err(msg) => (String::new(), String::new(), msg.clone()),
        };
        w.write_record([r.file.clone(), num(r.band_hz), num(r.low_hz), num(r.high_hz), dt, r2, status])?;
    }
    w.flush()?;
    Ok(())
}

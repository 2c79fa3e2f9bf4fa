//! Synthetic modal impulse responses, shaped noise and the SNR sweep.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::acoustics::{band_dt60, exact_mode_dt60, improvement_from_floors, DEFAULT_FIT_RANGE_DB};
use crate::envelope::fit_envelope;
use crate::filter::{sosfilt, FilterSpec, ThirdOctaveBand};
use crate::pipeline::{denoise, denoise_baseline, PipelineConfig};
use crate::{math, rng, Error, Result, Signal};

/// One damped sinusoid `s e^{-alpha n} sin(2 pi f n / rate)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub amplitude: f64,
    /// Decay per sample.
    pub alpha: f64,
    pub frequency_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalSpec {
    pub modes: Vec<Mode>,
    pub length: usize,
    pub sample_rate: f64,
}

impl ModalSpec {
    /// Seven unit-amplitude modes at the third-octave centres 25..100 Hz with
    /// DT60 falling linearly from 3 s to 1 s; `2^17` samples at 48 kHz.
    pub fn default_low_band() -> Self {
        let sample_rate = 48_000.0;
        let centers = crate::filter::LOW_BAND_CENTERS;
        let last = (centers.len() - 1) as f64;
        let modes = centers
            .iter()
            .enumerate()
            .map(|(k, &f)| {
                let dt60 = 3.0 - 2.0 * k as f64 / last;
                Mode { amplitude: 1.0, alpha: alpha_for_dt60(dt60, sample_rate), frequency_hz: f }
            })
            .collect();
        Self { modes, length: 1 << 17, sample_rate }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::InvalidInput("length must be positive".into()));
        }
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return Err(Error::InvalidInput("sample_rate must be positive".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::InvalidInput("modes: at least one mode is required".into()));
        }
        for (i, m) in self.modes.iter().enumerate() {
            if !m.amplitude.is_finite() {
                return Err(Error::InvalidInput(format!("modes[{i}].amplitude must be finite")));
            }
            if !(m.alpha >= 0.0) || !m.alpha.is_finite() {
                return Err(Error::InvalidInput(format!("modes[{i}].alpha must be >= 0")));
            }
            if !(m.frequency_hz >= 0.0 && m.frequency_hz < self.sample_rate / 2.0) {
                return Err(Error::InvalidInput(format!(
                    "modes[{i}].frequency_hz must lie in [0, {})",
                    self.sample_rate / 2.0
                )));
            }
        }
        Ok(())
    }

    /// Copy with every decay multiplied by `factor`.
    pub fn with_decay_factor(&self, factor: f64) -> Self {
        let modes = self.modes.iter().map(|m| Mode { alpha: m.alpha * factor, ..*m }).collect();
        Self { modes, ..self.clone() }
    }

    /// Exact DT60 of each mode in seconds.
    pub fn exact_dt60(&self) -> Result<Vec<f64>> {
        self.modes.iter().map(|m| exact_mode_dt60(m.alpha, self.sample_rate)).collect()
    }
}

/// Decay per sample giving the requested DT60.
pub fn alpha_for_dt60(dt60_seconds: f64, sample_rate: f64) -> f64 {
    3.0 / (dt60_seconds * sample_rate * core::f64::consts::LOG10_E)
}

pub fn gen_modal(spec: &ModalSpec) -> Result<Signal> {
    spec.validate()?;
    let mut h = alloc::vec![0.0; spec.length];
    for m in &spec.modes {
        let w = 2.0 * core::f64::consts::PI * m.frequency_hz / spec.sample_rate;
        for (n, v) in h.iter_mut().enumerate() {
            let t = n as f64;
            *v += m.amplitude * math::exp(-m.alpha * t) * math::sin(w * t);
        }
    }
    if h.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidInput("modal spec produces an all-zero signal".into()));
    }
    Signal::new(h, spec.sample_rate)
}

/// Default noise shape: 4th-order Butterworth low-pass at 150 Hz.
pub fn default_noise_shape() -> FilterSpec {
    FilterSpec::lowpass(150.0, 4)
}

/// Seeded white Gaussian noise through `shape` (causal). Zero length gives
/// an empty vector.
pub fn gen_shaped_noise(length: usize, sample_rate: f64, seed: u64, shape: &FilterSpec) -> Result<Vec<f64>> {
    let sos = shape.design(sample_rate)?;
    if length == 0 {
        return Ok(Vec::new());
    }
    let mut r = rng::stream(seed, rng::STREAM_NOISE);
    let white: Vec<f64> = (0..length).map(|_| rng::standard_normal(&mut r)).collect();
    Ok(sosfilt(&sos, &white, None))
}

/// `clean + g * noise` with `g` set so the full-length SNR equals `snr_db`.
pub fn mix_at_snr(clean: &Signal, noise: &[f64], snr_db: f64) -> Result<Signal> {
    if noise.len() != clean.len() {
        return Err(Error::InvalidInput("noise and clean lengths differ".into()));
    }
    if !snr_db.is_finite() {
        return Err(Error::InvalidInput("snr_db must be finite".into()));
    }
    let ec = clean.energy();
    let en = math::energy(noise);
    if ec == 0.0 || en == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let g = math::sqrt(ec / en / libm::pow(10.0, snr_db / 10.0));
    clean.with_samples(clean.samples().iter().zip(noise).map(|(c, w)| c + g * w).collect())
}

/// Grid of synthetic trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepPlan {
    pub snr_levels_db: Vec<f64>,
    pub noise_seeds: Vec<u64>,
    pub decay_factors: Vec<f64>,
    pub base_spec: ModalSpec,
    pub noise_shape: FilterSpec,
    /// `(upper, lower)` dB range of the DT60 line fit.
    pub fit_range_db: (f64, f64),
}

impl Default for SweepPlan {
    fn default() -> Self {
        Self {
            snr_levels_db: (1..=10).map(|k| 5.0 * k as f64).collect(),
            noise_seeds: (0..10).collect(),
            decay_factors: alloc::vec![0.5, 1.0, 1.5, 2.0],
            base_spec: ModalSpec::default_low_band(),
            noise_shape: default_noise_shape(),
            fit_range_db: DEFAULT_FIT_RANGE_DB,
        }
    }
}

/// Identifies one trial of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialKey {
    pub factor: f64,
    pub seed: u64,
    pub snr_db: f64,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.snr_levels_db.is_empty() || self.noise_seeds.is_empty() || self.decay_factors.is_empty() {
            return Err(Error::InvalidInput("plan has no trials: snr, seed and factor lists must be non-empty".into()));
        }
        if let Some(s) = self.snr_levels_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!("snr_levels_db: {s} is not finite")));
        }
        if let Some(f) = self.decay_factors.iter().find(|f| !(**f > 0.0) || !f.is_finite()) {
            return Err(Error::InvalidInput(format!("decay_factors: {f} must be positive")));
        }
        self.base_spec.validate()?;
        self.noise_shape.design(self.base_spec.sample_rate)?;
        Ok(())
    }

    /// True when the grid is the full 10 x 10 x 4 layout.
    pub fn is_full_grid(&self) -> bool {
        self.snr_levels_db.len() == 10 && self.noise_seeds.len() == 10 && self.decay_factors == [0.5, 1.0, 1.5, 2.0]
    }

    /// Trials in ascending `(factor, seed, snr)` order, duplicates removed.
    pub fn trials(&self) -> Vec<TrialKey> {
        let mut factors = self.decay_factors.clone();
        let mut seeds = self.noise_seeds.clone();
        let mut snrs = self.snr_levels_db.clone();
        factors.sort_by(f64::total_cmp);
        factors.dedup();
        seeds.sort_unstable();
        seeds.dedup();
        snrs.sort_by(f64::total_cmp);
        snrs.dedup();
        let mut out = Vec::with_capacity(factors.len() * seeds.len() * snrs.len());
        for &factor in &factors {
            for &seed in &seeds {
                for &snr_db in &snrs {
                    out.push(TrialKey { factor, seed, snr_db });
                }
            }
        }
        out
    }

    /// Bands evaluated per trial: one per mode, at the mode's frequency.
    pub fn bands(&self) -> Vec<ThirdOctaveBand> {
        self.base_spec.modes.iter().map(|m| ThirdOctaveBand::from_nominal(m.frequency_hz)).collect()
    }
}

/// Per-band DT60 estimates for the three arms of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRecord {
    pub nominal_hz: f64,
    pub exact_dt60: f64,
    pub noisy_dt60: Option<f64>,
    pub baseline_dt60: Option<f64>,
    pub proposed_dt60: Option<f64>,
    pub below_cutoff: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub key: TrialKey,
    pub bands: Vec<BandRecord>,
    pub cutoff_hz: f64,
    pub baseline_improvement_db: Option<f64>,
    pub proposed_improvement_db: Option<f64>,
    pub fallback: bool,
    /// Set when the trial could not run to completion.
    pub error: Option<String>,
}

impl ExperimentRecord {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

/// Signals produced by one trial, for callers that need more than the record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSignals {
    pub clean: Signal,
    pub noisy: Signal,
    pub baseline: Signal,
    pub proposed: Signal,
}

/// Relative DT60 error `|est / exact - 1|`; a missing estimate counts as infinite.
pub fn dt60_error(estimate: Option<f64>, exact: f64) -> f64 {
    match estimate {
        Some(e) => (e / exact - 1.0).abs(),
        None => f64::INFINITY,
    }
}

/// Noisy trial input for `key`.
pub fn trial_input(plan: &SweepPlan, key: &TrialKey) -> Result<(Signal, Signal)> {
    let spec = plan.base_spec.with_decay_factor(key.factor);
    let clean = gen_modal(&spec)?;
    let noise = gen_shaped_noise(spec.length, spec.sample_rate, key.seed, &plan.noise_shape)?;
    let noisy = mix_at_snr(&clean, &noise, key.snr_db)?;
    Ok((clean, noisy))
}

/// Runs one trial; failures are captured in the record.
pub fn run_trial(plan: &SweepPlan, key: &TrialKey, config: &PipelineConfig) -> ExperimentRecord {
    match run_trial_signals(plan, key, config) {
        Ok((rec, _)) => rec,
        Err(e) => ExperimentRecord {
            key: *key,
            bands: Vec::new(),
            cutoff_hz: crate::wavelet::cutoff_frequency(plan.base_spec.sample_rate, config.levels),
            baseline_improvement_db: None,
            proposed_improvement_db: None,
            fallback: false,
            error: Some(e.to_string()),
        },
    }
}

/// As [`run_trial`], also returning the signals.
pub fn run_trial_signals(
    plan: &SweepPlan,
    key: &TrialKey,
    config: &PipelineConfig,
) -> Result<(ExperimentRecord, TrialSignals)> {
    let spec = plan.base_spec.with_decay_factor(key.factor);
    let exact = spec.exact_dt60()?;
    let (clean, noisy) = trial_input(plan, key)?;
    let (baseline, _) = denoise_baseline(&noisy, config)?;
    let (proposed, report) = denoise(&noisy, config)?;
    let cutoff_hz = report.cutoff_hz;

    let estimate = |s: &Signal, band: &ThirdOctaveBand| band_dt60(s, band, plan.fit_range_db).ok().map(|e| e.dt60_seconds);
    let bands = plan
        .bands()
        .iter()
        .zip(&exact)
        .map(|(band, &exact_dt60)| BandRecord {
            nominal_hz: band.nominal_hz,
            exact_dt60,
            noisy_dt60: estimate(&noisy, band),
            baseline_dt60: estimate(&baseline, band),
            proposed_dt60: estimate(&proposed, band),
            below_cutoff: band.high_hz <= cutoff_hz,
        })
        .collect();

    let floor = |s: &Signal| fit_envelope(s, &config.envelope).map(|m| m.x3);
    let noisy_floor = floor(&noisy).ok();
    let improvement = |s: &Signal| match (noisy_floor, floor(s).ok()) {
        (Some(a), Some(b)) => Some(improvement_from_floors(a, b)),
        _ => None,
    };
    let record = ExperimentRecord {
        key: *key,
        bands,
        cutoff_hz,
        baseline_improvement_db: improvement(&baseline),
        proposed_improvement_db: improvement(&proposed),
        fallback: report.envelope.as_ref().is_some_and(|e| e.fallback),
        error: None,
    };
    Ok((record, TrialSignals { clean, noisy, baseline, proposed }))
}

/// Serial sweep over every trial of the plan, in [`SweepPlan::trials`] order.
pub fn run_sweep(plan: &SweepPlan, config: &PipelineConfig) -> Result<Vec<ExperimentRecord>> {
    plan.validate()?;
    config.validate()?;
    Ok(plan.trials().iter().map(|k| run_trial(plan, k, config)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn one_mode(amplitude: f64, alpha: f64, f: f64, length: usize, rate: f64) -> ModalSpec {
        ModalSpec { modes: vec![Mode { amplitude, alpha, frequency_hz: f }], length, sample_rate: rate }
    }

    #[test]
    fn quarter_rate_sine() {
        let s = gen_modal(&one_mode(1.0, 0.0, 250.0, 8, 1000.0)).unwrap();
        let expect = [0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0];
        for (a, b) in s.samples().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(gen_modal(&ModalSpec::default_low_band()).unwrap().samples()[0], 0.0);
    }

    #[test]
    fn mode_energy_ratio() {
        let alpha = 1e-3;
        let m = 4000;
        let s = gen_modal(&one_mode(1.0, alpha, 100.0, 2 * m, 8000.0)).unwrap();
        let e1 = math::energy(&s.samples()[..m]);
        let e2 = math::energy(&s.samples()[m..]);
        assert!((e2 / e1 / math::exp(-2.0 * alpha * m as f64) - 1.0).abs() < 0.01);
    }

    #[test]
    fn default_spec_dt60s() {
        let spec = ModalSpec::default_low_band();
        let dt = spec.exact_dt60().unwrap();
        assert!((dt[0] - 3.0).abs() < 1e-12 && (dt[6] - 1.0).abs() < 1e-12);
        assert!(dt.windows(2).all(|w| w[1] < w[0]));
        let doubled = spec.with_decay_factor(2.0).exact_dt60().unwrap();
        for (a, b) in dt.iter().zip(&doubled) {
            assert!((b - a / 2.0).abs() < 1e-12);
        }
        assert_eq!(spec.length % 256, 0);
    }

    #[test]
    fn invalid_specs() {
        assert!(one_mode(1.0, 1e-3, 600.0, 10, 1000.0).validate().is_err());
        assert!(one_mode(1.0, -1.0, 100.0, 10, 1000.0).validate().is_err());
        assert!(ModalSpec { modes: vec![], length: 4, sample_rate: 1.0 }.validate().is_err());
    }

    #[test]
    fn shaped_noise_properties() {
        let shape = default_noise_shape();
        let a = gen_shaped_noise(1 << 16, 48000.0, 3, &shape).unwrap();
        assert_eq!(a, gen_shaped_noise(1 << 16, 48000.0, 3, &shape).unwrap());
        assert_ne!(a, gen_shaped_noise(1 << 16, 48000.0, 4, &shape).unwrap());
        assert!(gen_shaped_noise(0, 48000.0, 3, &shape).unwrap().is_empty());
        // Band-energy ratio of the shaping response: scipy sosfreqz over a dense grid gives 29.197 dB.
        let sos = shape.design(48000.0).unwrap();
        let (mut low, mut high) = (0.0, 0.0);
        for k in 0..(1 << 20) {
            let f = 24000.0 * k as f64 / (1 << 20) as f64;
            let m = crate::filter::magnitude(&sos, f, 48000.0);
            if f < 150.0 {
                low += m * m;
            } else if f > 300.0 {
                high += m * m;
            }
        }
        assert!((10.0 * math::log10(low / high) - 29.197).abs() < 0.05);
        // The realization follows the response: little energy survives a 300 Hz high-pass.
        let hp = crate::filter::butterworth(crate::filter::ButterworthKind::Highpass { cutoff_hz: 300.0 }, 8, 48000.0).unwrap();
        let above = crate::filter::sosfiltfilt(&hp, &a).unwrap();
        assert!(10.0 * math::log10(math::energy(&a) / math::energy(&above)) > 25.0);
    }

    #[test]
    fn mix_examples() {
        let clean = gen_modal(&one_mode(1.0, 1e-3, 100.0, 4000, 8000.0)).unwrap();
        let noise = gen_shaped_noise(4000, 8000.0, 1, &default_noise_shape()).unwrap();
        for snr in [0.0, 20.0] {
            let mixed = mix_at_snr(&clean, &noise, snr).unwrap();
            let added: Vec<f64> = mixed.samples().iter().zip(clean.samples()).map(|(m, c)| m - c).collect();
            let ratio = clean.energy() / math::energy(&added);
            assert!((ratio / libm::pow(10.0, snr / 10.0) - 1.0).abs() < 1e-10);
        }
        assert_eq!(mix_at_snr(&clean, &vec![0.0; 4000], 10.0).unwrap_err(), Error::ZeroSignal);
    }

    #[test]
    fn default_plan_shape() {
        let plan = SweepPlan::default();
        assert!(plan.is_full_grid());
        assert_eq!(plan.snr_levels_db, vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]);
        let trials = plan.trials();
        assert_eq!(trials.len(), 400);
        assert_eq!(trials[0], TrialKey { factor: 0.5, seed: 0, snr_db: 5.0 });
        assert_eq!(trials[399], TrialKey { factor: 2.0, seed: 9, snr_db: 50.0 });
        assert!(SweepPlan { noise_seeds: vec![], ..SweepPlan::default() }.validate().is_err());
    }

    #[test]
    fn failing_trial_is_recorded() {
        let plan = SweepPlan { base_spec: one_mode(1.0, 1e-3, 100.0, 64, 8000.0), ..SweepPlan::default() };
        let rec = run_trial(&plan, &plan.trials()[0], &PipelineConfig::default());
        assert!(!rec.succeeded());
    }

    proptest! {
        #[test]
        fn measured_snr_matches(snr in -10.0f64..60.0, seed in 0u64..50) {
            let clean = gen_modal(&one_mode(1.0, 1e-3, 50.0, 2048, 8000.0)).unwrap();
            let noise = gen_shaped_noise(2048, 8000.0, seed, &default_noise_shape()).unwrap();
            let mixed = mix_at_snr(&clean, &noise, snr).unwrap();
            let added: Vec<f64> = mixed.samples().iter().zip(clean.samples()).map(|(m, c)| m - c).collect();
            let measured = 10.0 * math::log10(clean.energy() / math::energy(&added));
            prop_assert!((measured - snr).abs() < 1e-6);
        }

        #[test]
        fn modal_is_linear_in_amplitude(a in -5.0f64..5.0, b in -5.0f64..5.0) {
            prop_assume!(a.abs() > 1e-3 && b.abs() > 1e-3);
            let mk = |s1: f64, s2: f64| ModalSpec {
                modes: vec![
                    Mode { amplitude: s1, alpha: 1e-3, frequency_hz: 40.0 },
                    Mode { amplitude: s2, alpha: 2e-3, frequency_hz: 90.0 },
                ],
                length: 512,
                sample_rate: 1000.0,
            };
            let both = gen_modal(&mk(a, b)).unwrap();
            let first = gen_modal(&mk(a, 0.0)).unwrap();
            let second = gen_modal(&mk(0.0, b)).unwrap();
            for i in 0..512 {
                let sum = first.samples()[i] + second.samples()[i];
                prop_assert!((both.samples()[i] - sum).abs() < 1e-12);
            }
        }
    }
}

//! End-to-end denoising: wavelet analysis, detail thresholding, envelope fit,
//! tolerance schedule, dictionary learning on the approximation band, synthesis.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::envelope::{
    error_schedule_at, fit_envelope, transition_time, EnvelopeModel, EnvelopeOptions, ErrorSchedule,
    PRE_TRANSITION_TOLERANCE,
};
use crate::sparsedl::{column_tolerances, learn, reconstruct_sequence, LearnOptions, PatchMatrix};
use crate::threshold::{denoise_details, LevelStats, ThresholdPolicy};
use crate::wavelet::{self, decompose, pad_to_multiple, BoundaryMode, WaveletFilterBank};
use crate::{Error, Result, Signal};

/// Where the envelope behind the tolerance schedule is fitted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonDomain {
    /// On the approximation sequence itself.
    #[default]
    Approximation,
    /// On the full-rate signal, then decimated by index `n_a = n_h / 2^L`.
    Fullrate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub wavelet: String,
    pub levels: usize,
    pub boundary: BoundaryMode,
    pub threshold: ThresholdPolicy,
    pub atoms: usize,
    /// Patch length as a fraction of the approximation length.
    pub window_ratio: f64,
    pub dl_iterations: usize,
    pub dl_enabled: bool,
    pub exact_ksvd: bool,
    pub envelope: EnvelopeOptions,
    pub epsilon_domain: EpsilonDomain,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            wavelet: "dmey".into(),
            levels: 8,
            boundary: BoundaryMode::Periodic,
            threshold: ThresholdPolicy::default(),
            atoms: 8,
            window_ratio: 0.5,
            dl_iterations: 20,
            dl_enabled: true,
            exact_ksvd: false,
            envelope: EnvelopeOptions::default(),
            epsilon_domain: EpsilonDomain::Approximation,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.levels > 30 {
            return Err(Error::InvalidInput(alloc::format!("levels must be in 1..=30, got {}", self.levels)));
        }
        if self.atoms == 0 {
            return Err(Error::InvalidInput("atoms must be at least 1".into()));
        }
        if !(self.window_ratio > 0.0 && self.window_ratio < 1.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "window_ratio must lie in (0, 1), got {}",
                self.window_ratio
            )));
        }
        if self.dl_iterations == 0 {
            return Err(Error::InvalidInput("dl_iterations must be at least 1".into()));
        }
        self.threshold.validate()?;
        if let Some(b) = &self.envelope.bounds {
            b.validate()?;
        }
        Ok(())
    }

    /// Minimum input length accepted by [`denoise`].
    pub fn min_length(&self) -> usize {
        1usize << (self.levels + 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Decompose,
    Threshold,
    EnvelopeFit,
    Schedule,
    DictionaryLearning,
    Synthesis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub micros: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Proposed,
    Baseline,
}

/// Monotonic microsecond source for stage timings.
pub trait Clock {
    fn now_micros(&self) -> u64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub model: EnvelopeModel,
    /// Transition time in approximation samples, if the fit has one.
    pub transition_time: Option<f64>,
    pub nsr: f64,
    /// Constant `1e-4` tolerance used because no decay was detected.
    pub fallback: bool,
    pub epsilon_first: f64,
    pub epsilon_last: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryReport {
    pub window: usize,
    pub columns: usize,
    pub atoms: usize,
    pub iterations_run: usize,
    pub total_support: usize,
    pub mean_support: f64,
    /// Columns whose tolerance was not met at full support.
    pub unmet_columns: usize,
    pub replaced_atoms: usize,
    pub total_residual: f64,
    /// Tolerances are `epsilon * column energy`.
    pub tolerance_semantics: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseReport {
    pub arm: Arm,
    pub config: PipelineConfig,
    pub wavelet_taps: usize,
    pub input_length: usize,
    pub padding: usize,
    pub sample_rate: f64,
    pub cutoff_hz: f64,
    pub approximation_length: usize,
    pub approximation_rate: f64,
    pub levels: Vec<LevelStats>,
    pub envelope: Option<EnvelopeReport>,
    pub dictionary: Option<DictionaryReport>,
    /// Set when the approximation band was silent and left untouched.
    pub approximation_silent: bool,
    pub stages: Vec<StageRecord>,
}

/// Full method with the bank named in `config`.
pub fn denoise(signal: &Signal, config: &PipelineConfig) -> Result<(Signal, DenoiseReport)> {
    let bank = WaveletFilterBank::by_name(&config.wavelet)?;
    denoise_with_bank(signal, config, &bank, None)
}

/// Thresholding only; the approximation band passes through untouched.
pub fn denoise_baseline(signal: &Signal, config: &PipelineConfig) -> Result<(Signal, DenoiseReport)> {
    let cfg = PipelineConfig { dl_enabled: false, ..config.clone() };
    denoise(signal, &cfg)
}

/// As [`denoise`] with an explicit filter bank and optional stage timing.
pub fn denoise_with_bank(
    signal: &Signal,
    config: &PipelineConfig,
    bank: &WaveletFilterBank,
    clock: Option<&dyn Clock>,
) -> Result<(Signal, DenoiseReport)> {
    config.validate()?;
    bank.validate()?;
    if signal.len() < config.min_length() {
        return Err(Error::InvalidInput(alloc::format!(
            "signal has {} samples, {} levels need at least {}",
            signal.len(),
            config.levels,
            config.min_length()
        )));
    }
    if signal.is_silent() {
        return Err(Error::ZeroSignal);
    }
    let mut timer = Timer::new(clock);
    let arm = if config.dl_enabled { Arm::Proposed } else { Arm::Baseline };

    let (padded, padding) = match config.boundary {
        BoundaryMode::Periodic => pad_to_multiple(signal.samples(), config.levels),
        BoundaryMode::Symmetric => (signal.samples().to_vec(), 0),
    };
    let padded = signal.with_samples(padded)?;
    let dec = decompose(&padded, bank, config.levels, config.boundary)?;
    timer.mark(Stage::Decompose);

    let (mut dec, levels) = denoise_details(&dec, &config.threshold)?;
    timer.mark(Stage::Threshold);

    let approx_rate = wavelet::cutoff_frequency(signal.sample_rate(), config.levels);
    let mut report = DenoiseReport {
        arm,
        config: config.clone(),
        wavelet_taps: bank.taps(),
        input_length: signal.len(),
        padding,
        sample_rate: signal.sample_rate(),
        cutoff_hz: dec.cutoff_frequency(),
        approximation_length: dec.approximation.len(),
        approximation_rate: approx_rate,
        levels,
        envelope: None,
        dictionary: None,
        approximation_silent: false,
        stages: Vec::new(),
    };

    if config.dl_enabled {
        let approx = &dec.approximation;
        if approx.iter().all(|v| *v == 0.0) {
            report.approximation_silent = true;
        } else {
            let (schedule, env) = tolerance_schedule(&padded, approx, approx_rate, config, &mut timer)?;
            report.envelope = Some(env);
            let (new_approx, dl) = learn_approximation(approx, &schedule, config)?;
            dec.approximation = new_approx;
            report.dictionary = Some(dl);
            timer.mark(Stage::DictionaryLearning);
        }
    }

    let out = wavelet::reconstruct(&dec, bank)?;
    let mut samples = out.into_samples();
    samples.truncate(signal.len());
    timer.mark(Stage::Synthesis);
    report.stages = timer.records;
    Ok((signal.with_samples(samples)?, report))
}

fn tolerance_schedule(
    padded: &Signal,
    approx: &[f64],
    approx_rate: f64,
    config: &PipelineConfig,
    timer: &mut Timer<'_>,
) -> Result<(ErrorSchedule, EnvelopeReport)> {
    let len = approx.len();
    let (model, rate, full_len) = match config.epsilon_domain {
        EpsilonDomain::Approximation => {
            let sig = Signal::new(approx.to_vec(), approx_rate)?;
            (fit_envelope(&sig, &config.envelope)?, approx_rate, len)
        }
        EpsilonDomain::Fullrate => (fit_envelope(padded, &config.envelope)?, padded.sample_rate(), padded.len()),
    };
    timer.mark(Stage::EnvelopeFit);

    let (schedule, tt, fallback) = if model.no_decay_detected {
        (ErrorSchedule::constant(full_len, PRE_TRANSITION_TOLERANCE), None, true)
    } else {
        let tt = if model.x3 == 0.0 { full_len as f64 } else { transition_time(&model)? };
        (error_schedule_at(&model, tt, rate, full_len)?, Some(tt), false)
    };
    let schedule = match config.epsilon_domain {
        EpsilonDomain::Approximation => schedule,
        EpsilonDomain::Fullrate => {
            let step = 1usize << config.levels;
            ErrorSchedule {
                values: (0..len).map(|n| schedule.values[(n * step).min(full_len - 1)]).collect(),
                transition_index: schedule.transition_index / step,
                nsr: schedule.nsr,
            }
        }
    };
    timer.mark(Stage::Schedule);
    let env = EnvelopeReport {
        model,
        transition_time: tt.map(|t| match config.epsilon_domain {
            EpsilonDomain::Approximation => t,
            EpsilonDomain::Fullrate => t / (1u64 << config.levels) as f64,
        }),
        nsr: schedule.nsr,
        fallback,
        epsilon_first: schedule.values[0],
        epsilon_last: schedule.values[len - 1],
    };
    Ok((schedule, env))
}

fn learn_approximation(
    approx: &[f64],
    schedule: &ErrorSchedule,
    config: &PipelineConfig,
) -> Result<(Vec<f64>, DictionaryReport)> {
    let n = approx.len();
    let window = libm::floor(config.window_ratio * n as f64) as usize;
    if window < 2 || window >= n {
        return Err(Error::InvalidInput(alloc::format!(
            "patch window {window} is unusable for an approximation of {n} samples"
        )));
    }
    let patches = PatchMatrix::build(approx, window)?;
    let tol = column_tolerances(schedule, window, &patches.column_energies())?;
    let options = LearnOptions {
        iterations: config.dl_iterations,
        exact_ksvd: config.exact_ksvd,
        seed: config.seed,
        ..LearnOptions::default()
    };
    let out = learn(&patches, config.atoms, &tol, options)?;
    let rebuilt = reconstruct_sequence(&out.dictionary, &out.code, n, approx)?;
    let columns = patches.columns();
    let report = DictionaryReport {
        window,
        columns,
        atoms: config.atoms,
        iterations_run: out.stats.iterations_run,
        total_support: out.stats.total_support,
        mean_support: out.stats.total_support as f64 / columns as f64,
        unmet_columns: out.stats.unmet_columns,
        replaced_atoms: out.stats.replaced_atoms,
        total_residual: out.stats.total_residual,
        tolerance_semantics: "relative".into(),
    };
    Ok((rebuilt, report))
}

struct Timer<'a> {
    clock: Option<&'a dyn Clock>,
    last: u64,
    records: Vec<StageRecord>,
}

impl<'a> Timer<'a> {
    fn new(clock: Option<&'a dyn Clock>) -> Self {
        let last = clock.map_or(0, |c| c.now_micros());
        Self { clock, last, records: Vec::new() }
    }

    fn mark(&mut self, stage: Stage) {
        let micros = self.clock.map(|c| {
            let now = c.now_micros();
            let d = now.saturating_sub(self.last);
            self.last = now;
            d
        });
        self.records.push(StageRecord { stage, micros });
    }
}

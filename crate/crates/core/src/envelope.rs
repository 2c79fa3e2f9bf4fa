//! Decay-plus-floor envelope model and the time-varying error tolerance it drives.
//!
//! The model is `x1 * exp(-x2 * n) + x3`, fitted in the power/log domain:
//! the objective is the sum over envelope blocks of
//! `(log10(env^2) - log10(x1^2 exp(-2 x2 n) + x3^2))^2`, minimised with a
//! projected Levenberg–Marquardt iteration inside box bounds.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::{Error, Result, Signal};

/// Envelope block length and hop, in samples.
pub const BLOCK_SIZE: usize = 16;
/// RMS values are clamped here before taking logarithms.
pub const ENVELOPE_FLOOR: f64 = 1e-12;
/// Relative squared-error tolerance before the transition time.
pub const PRE_TRANSITION_TOLERANCE: f64 = 1e-4;
pub const MAX_ITERATIONS: usize = 200;
pub const STATIONARITY_TOLERANCE: f64 = 1e-8;
// Largest change of any ln(parameter) in one step; keeps a parameter from
// being thrown onto a bound where its gradient vanishes.
const MAX_LOG_STEP: f64 = 1.0;

/// Minimum number of blocks for a 16-sample block envelope; shorter inputs
/// are fitted sample by sample.
const MIN_BLOCKS: usize = 8;
/// Total modelled decay (nepers) over the observed span below which the
/// exponential term is treated as absent.
const MIN_OBSERVABLE_DECAY: f64 = 1e-2;

/// Box constraints on `(x1, x2, x3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeBounds {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl EnvelopeBounds {
    /// `x1 in [1e-6, 1e3] * peak`, `x2 in [1e-7, 1]` per sample, `x3 in [0, peak]`.
    pub fn default_for_peak(peak: f64) -> Self {
        Self { lower: [1e-6 * peak, 1e-7, 0.0], upper: [1e3 * peak, 1.0, peak] }
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..3 {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::InvalidInput("envelope bounds must be finite".into()));
            }
            if lo >= hi {
                return Err(Error::InvalidInput(alloc::format!(
                    "envelope bound {i}: lower {lo} must be below upper {hi}"
                )));
            }
        }
        if self.lower[0] <= 0.0 || self.lower[1] <= 0.0 || self.lower[2] < 0.0 {
            return Err(Error::InvalidInput(
                "envelope bounds need x1 > 0, x2 > 0 and x3 >= 0".into(),
            ));
        }
        Ok(())
    }

    fn clamp(&self, p: [f64; 3]) -> [f64; 3] {
        core::array::from_fn(|i| p[i].clamp(self.lower[i], self.upper[i]))
    }
}

/// Fitted parameters. `x2` is a decay per sample of the fitted sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeModel {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    /// Final objective value.
    pub fit_residual: f64,
    /// Sample rate of the sequence the model was fitted on.
    pub domain_rate: f64,
    /// Set when the floor dominates from the start or no decay is visible.
    pub no_decay_detected: bool,
    pub iterations: usize,
}

impl EnvelopeModel {
    /// Noise-to-signal ratio `x3 / x1`.
    pub fn nsr(&self) -> f64 {
        nsr(self)
    }

    pub fn transition_time(&self) -> Result<f64> {
        transition_time(self)
    }

    /// Model envelope amplitude at sample `n`, `sqrt(x1^2 e^{-2 x2 n} + x3^2)`.
    pub fn amplitude(&self, n: f64) -> f64 {
        let decay = self.x1 * math::exp(-self.x2 * n);
        math::sqrt(decay * decay + self.x3 * self.x3)
    }

    /// Floor level in dB (`20 log10 x3`).
    pub fn floor_db(&self) -> f64 {
        20.0 * math::log10(self.x3)
    }
}

/// Caller overrides for [`fit_envelope`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvelopeOptions {
    pub bounds: Option<EnvelopeBounds>,
    pub init: Option<[f64; 3]>,
}

/// Blockwise RMS envelope, clamped at [`ENVELOPE_FLOOR`]. A trailing partial
/// block is dropped.
pub fn block_rms(samples: &[f64], block: usize) -> Vec<f64> {
    samples
        .chunks_exact(block)
        .map(|c| math::sqrt(math::energy(c) / block as f64).max(ENVELOPE_FLOOR))
        .collect()
}

fn block_size_for(len: usize) -> usize {
    if len / BLOCK_SIZE >= MIN_BLOCKS {
        BLOCK_SIZE
    } else {
        1
    }
}

/// Per-iteration record of a fit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitTrace {
    /// Objective after each accepted step, starting with the initial point.
    pub objective: Vec<f64>,
    pub parameters: Vec<[f64; 3]>,
}

struct Problem<'a> {
    log_power: &'a [f64],
    block: usize,
}

impl Problem<'_> {
    // Block-averaged model power and its parameter derivatives. Averaging
    // the model over each block matches the block mean-square exactly for
    // noise-free envelopes.
    fn model(&self, p: &[f64; 3], b: usize) -> (f64, [f64; 3]) {
        let s = self.block as f64;
        let mut c = 0.0;
        let mut dc = 0.0;
        for j in 0..self.block {
            let e = math::exp(-2.0 * p[1] * j as f64);
            c += e;
            dc -= 2.0 * j as f64 * e;
        }
        c /= s;
        dc /= s;
        let t = s * b as f64;
        let decay = math::exp(-2.0 * p[1] * t);
        let m = p[0] * p[0] * decay * c + p[2] * p[2];
        let dm = [
            2.0 * p[0] * decay * c,
            p[0] * p[0] * decay * (-2.0 * t * c + dc),
            2.0 * p[2],
        ];
        (m, dm)
    }

    fn residuals(&self, p: &[f64; 3]) -> Vec<f64> {
        (0..self.log_power.len())
            .map(|b| {
                let (m, _) = self.model(p, b);
                self.log_power[b] - math::log10(m.max(ENVELOPE_FLOOR * ENVELOPE_FLOOR))
            })
            .collect()
    }

    fn objective(&self, p: &[f64; 3]) -> f64 {
        self.residuals(p).iter().map(|r| r * r).sum()
    }

    // Returns (J^T J, J^T r, objective) with r = y - log10(m), derivatives
    // taken with respect to ln(x).
    fn normal_equations_log(&self, p: &[f64; 3]) -> ([[f64; 3]; 3], [f64; 3], f64) {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        let mut f = 0.0;
        let floor = ENVELOPE_FLOOR * ENVELOPE_FLOOR;
        for b in 0..self.log_power.len() {
            let (m, dm) = self.model(p, b);
            let (r, jac) = if m > floor {
                let scale = -1.0 / (m * core::f64::consts::LN_10);
                (
                    self.log_power[b] - math::log10(m),
                    [scale * dm[0] * p[0], scale * dm[1] * p[1], scale * dm[2] * p[2]],
                )
            } else {
                (self.log_power[b] - math::log10(floor), [0.0; 3])
            };
            f += r * r;
            for i in 0..3 {
                jtr[i] += jac[i] * r;
                for k in 0..3 {
                    jtj[i][k] += jac[i] * jac[k];
                }
            }
        }
        (jtj, jtr, f)
    }
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    // Gaussian elimination with partial pivoting.
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut acc = m[i][3];
        for k in i + 1..3 {
            acc -= m[i][k] * x[k];
        }
        x[i] = acc / m[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn head_tail(env: &[f64]) -> (usize, usize, f64, f64) {
    let nb = env.len();
    let head = (nb / 20).max(1);
    let tail = (nb / 10).max(1);
    let x1 = env[..head].iter().copied().fold(0.0, f64::max);
    let x3 = math::median(&env[nb - tail..]).unwrap_or(ENVELOPE_FLOOR);
    (head, tail, x1, x3)
}

// Least-squares slope of ln(env) over blocks `start..end`, as a decay per sample.
fn log_slope_decay(env: &[f64], start: usize, end: usize, block: usize) -> f64 {
    let count = (end - start) as f64;
    let mean_b = (start..end).map(|b| b as f64).sum::<f64>() / count;
    let mean_y = (start..end).map(|b| math::ln(env[b])).sum::<f64>() / count;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for b in start..end {
        let dx = b as f64 - mean_b;
        sxy += dx * (math::ln(env[b]) - mean_y);
        sxx += dx * dx;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (-slope / block as f64).max(0.0)
}

// Slope fitted up to the first block within 6 dB of the floor estimate.
fn default_init(env: &[f64], block: usize) -> [f64; 3] {
    let nb = env.len();
    let (head, tail, x1, x3) = head_tail(env);
    let reach = (head..nb).find(|&b| env[b] <= 2.0 * x3).unwrap_or(nb - tail);
    let end = if reach > head + 1 { reach } else { nb };
    [x1, log_slope_decay(env, 0, end, block), x3]
}

// Slope fitted over everything before the tail region.
fn whole_span_init(env: &[f64], block: usize) -> [f64; 3] {
    let nb = env.len();
    let (_, tail, x1, x3) = head_tail(env);
    let end = if nb - tail >= 2 { nb - tail } else { nb };
    [x1, log_slope_decay(env, 0, end, block), x3]
}

/// Fits the decay-plus-floor model to `signal` (see module docs).
pub fn fit_envelope(signal: &Signal, options: &EnvelopeOptions) -> Result<EnvelopeModel> {
    fit_envelope_traced(signal, options).map(|(m, _)| m)
}

/// As [`fit_envelope`], also returning the accepted-iterate history.
pub fn fit_envelope_traced(
    signal: &Signal,
    options: &EnvelopeOptions,
) -> Result<(EnvelopeModel, FitTrace)> {
    let samples = signal.samples();
    if samples.len() < BLOCK_SIZE {
        return Err(Error::InvalidInput(alloc::format!(
            "envelope fit needs at least {BLOCK_SIZE} samples, got {}",
            samples.len()
        )));
    }
    if signal.is_silent() {
        return Err(Error::ZeroSignal);
    }
    let peak = signal.peak();
    let bounds = options.bounds.unwrap_or_else(|| EnvelopeBounds::default_for_peak(peak));
    bounds.validate()?;

    let block = block_size_for(samples.len());
    let env = block_rms(samples, block);
    let log_power: Vec<f64> = env.iter().map(|e| math::log10(e * e)).collect();
    let problem = Problem { log_power: &log_power, block };

    let inits = match options.init {
        Some(init) => alloc::vec![init],
        None => alloc::vec![default_init(&env, block), whole_span_init(&env, block)],
    };
    if inits.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    // Several starts guard against the rugged objective of oscillating
    // envelopes; the lowest final objective wins, earlier starts on ties.
    let mut best: Option<LmRun> = None;
    for init in inits {
        let run = run_lm(&problem, &bounds, init);
        if best.as_ref().map_or(true, |b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let LmRun { mut p, objective: f, iterations, trace } = best.expect("at least one start");
    if p[2] <= ENVELOPE_FLOOR * 1e-3 * (1.0 + 1e-12) && bounds.lower[2] == 0.0 {
        p[2] = 0.0;
    }

    let span = (env.len() * block) as f64;
    let mut model = EnvelopeModel {
        x1: p[0],
        x2: p[1],
        x3: p[2],
        fit_residual: f,
        domain_rate: signal.sample_rate(),
        no_decay_detected: false,
        iterations,
    };
    if p[2] >= p[0] || p[1] * span < MIN_OBSERVABLE_DECAY {
        // No identifiable decay: describe the sequence as a pure floor.
        let mean_log = log_power.iter().sum::<f64>() / log_power.len() as f64;
        let floor = math::sqrt(libm::pow(10.0, mean_log)).clamp(bounds.lower[2], bounds.upper[2]);
        let degenerate = [bounds.lower[0], p[1], floor];
        model.x1 = degenerate[0];
        model.x3 = degenerate[2];
        model.fit_residual = problem.objective(&degenerate);
        model.no_decay_detected = true;
    }
    Ok((model, trace))
}

struct LmRun {
    p: [f64; 3],
    objective: f64,
    iterations: usize,
    trace: FitTrace,
}

fn run_lm(problem: &Problem<'_>, bounds: &EnvelopeBounds, init: [f64; 3]) -> LmRun {
    // Iterate on q = ln(x); clamping q to ln(bounds) is the same projection
    // as clamping x. A zero lower bound on x3 is lifted to the envelope floor.
    let log_lower: [f64; 3] =
        core::array::from_fn(|i| math::ln(bounds.lower[i].max(ENVELOPE_FLOOR * 1e-3)));
    let log_upper: [f64; 3] = core::array::from_fn(|i| math::ln(bounds.upper[i]));
    let project = |q: [f64; 3]| -> [f64; 3] { core::array::from_fn(|i| q[i].clamp(log_lower[i], log_upper[i])) };
    let to_x = |q: &[f64; 3]| -> [f64; 3] { core::array::from_fn(|i| math::exp(q[i])) };

    let start = bounds.clamp(init);
    let mut q = project(core::array::from_fn(|i| math::ln(start[i].max(ENVELOPE_FLOOR * 1e-3))));
    let mut p = to_x(&q);
    let mut trace = FitTrace::default();
    let (mut jtj, mut jtr, mut f) = problem.normal_equations_log(&p);
    trace.objective.push(f);
    trace.parameters.push(p);

    let mut lambda = 1e-2;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        if projected_gradient_norm(&q, &jtr, &jtj, &log_lower, &log_upper)
            <= STATIONARITY_TOLERANCE * (1.0 + f)
        {
            break;
        }
        iterations += 1;
        let max_diag = (0..3).map(|i| jtj[i][i]).fold(0.0, f64::max).max(1e-300);
        let mut a = jtj;
        for i in 0..3 {
            a[i][i] += lambda * jtj[i][i].max(1e-12 * max_diag);
        }
        // Gauss-Newton direction for r(q + d) ~ r + J d.
        let step = solve3(a, [-jtr[0], -jtr[1], -jtr[2]]);
        let accepted = match step {
            Some(mut d) => {
                let longest = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if longest > MAX_LOG_STEP {
                    d.iter_mut().for_each(|v| *v *= MAX_LOG_STEP / longest);
                }
                let trial_q = project([q[0] + d[0], q[1] + d[1], q[2] + d[2]]);
                let trial = to_x(&trial_q);
                let f_trial = problem.objective(&trial);
                if f_trial < f {
                    let rel_change = (f - f_trial) / f.max(1e-300);
                    q = trial_q;
                    p = trial;
                    (jtj, jtr, f) = problem.normal_equations_log(&p);
                    trace.objective.push(f);
                    trace.parameters.push(p);
                    lambda = (lambda / 3.0).max(1e-12);
                    if rel_change < 1e-15 {
                        break;
                    }
                    true
                } else {
                    false
                }
            }
            None => false,
        };
        if !accepted {
            lambda *= 4.0;
            if lambda > 1e16 {
                break;
            }
        }
    }
    LmRun { p, objective: f, iterations, trace }
}

// Infinity norm of the gradient restricted to directions that stay feasible,
// scaled by the curvature so the test is invariant to parameter units.
fn projected_gradient_norm(
    q: &[f64; 3],
    jtr: &[f64; 3],
    jtj: &[[f64; 3]; 3],
    lower: &[f64; 3],
    upper: &[f64; 3],
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        // Objective gradient is 2 J^T r; descent direction is -gradient.
        let g = 2.0 * jtr[i];
        let at_lower = q[i] <= lower[i] && g > 0.0;
        let at_upper = q[i] >= upper[i] && g < 0.0;
        if at_lower || at_upper {
            continue;
        }
        let scale = math::sqrt(jtj[i][i]);
        if scale > 0.0 {
            worst = worst.max(g.abs() / scale);
        }
    }
    worst
}

/// `x3 / x1`.
pub fn nsr(model: &EnvelopeModel) -> f64 {
    model.x3 / model.x1
}

/// Sample index where the decay meets the floor, `ln(x1 / x3) / x2`.
pub fn transition_time(model: &EnvelopeModel) -> Result<f64> {
    if model.x3 <= 0.0 || model.x3 >= model.x1 || model.x2 <= 0.0 {
        return Err(Error::NoTransition);
    }
    Ok(math::ln(model.x1 / model.x3) / model.x2)
}

/// Per-sample relative reconstruction tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSchedule {
    pub values: Vec<f64>,
    /// `floor(T_t)`; values up to and including this index are `1e-4`.
    pub transition_index: usize,
    pub nsr: f64,
}

impl ErrorSchedule {
    /// A flat schedule, used when no decay is detected.
    pub fn constant(length: usize, value: f64) -> Self {
        Self { values: alloc::vec![value; length], transition_index: length, nsr: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Tolerance schedule from the model's own transition time.
pub fn error_schedule(model: &EnvelopeModel, rate: f64, length: usize) -> Result<ErrorSchedule> {
    let tt = transition_time(model)?;
    error_schedule_at(model, tt, rate, length)
}

/// Tolerance schedule with a caller-supplied transition time (in samples).
///
/// `1e-4` up to `floor(T_t)`, then `1 - exp(-(x2 / rate) (n - floor(T_t)) nsr)`
/// clamped below at `1e-4` so the schedule is nondecreasing.
pub fn error_schedule_at(
    model: &EnvelopeModel,
    transition: f64,
    rate: f64,
    length: usize,
) -> Result<ErrorSchedule> {
    if length == 0 {
        return Err(Error::InvalidInput("error schedule length must be positive".into()));
    }
    if !(rate > 0.0 && rate.is_finite()) || !(transition >= 0.0) {
        return Err(Error::InvalidInput("schedule needs a positive rate and transition time".into()));
    }
    let c_nsr = nsr(model);
    let tt_floor = math::floor(transition);
    let transition_index = if tt_floor >= usize::MAX as f64 { usize::MAX } else { tt_floor as usize };
    let growth = model.x2 / rate * c_nsr;
    let values = (0..length)
        .map(|n| {
            if n <= transition_index {
                PRE_TRANSITION_TOLERANCE
            } else {
                let t = (n - transition_index) as f64;
                (-math::expm1(-growth * t)).max(PRE_TRANSITION_TOLERANCE)
            }
        })
        .collect();
    Ok(ErrorSchedule { values, transition_index, nsr: c_nsr })
}

//! Parallel sweep execution with deterministic record order.

use rayon::prelude::*;
use rirdenoise_core::pipeline::PipelineConfig;
use rirdenoise_core::synth::{run_trial, ExperimentRecord, SweepPlan};

use crate::CliError;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "RIRDENOISE_THREADS";

/// `--threads` wins over the environment; zero or unset means one worker per core.
pub fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok())).unwrap_or(0)
}

/// Runs every trial of `plan` on `threads` workers (0 = one per core).
/// Records come back in trial order whatever the worker count.
pub fn run_sweep_parallel(
    plan: &SweepPlan,
    config: &PipelineConfig,
    threads: usize,
) -> Result<Vec<ExperimentRecord>, CliError> {
    plan.validate().map_err(|e| CliError::invalid("plan", e))?;
    config.validate().map_err(|e| CliError::invalid("config", e))?;
    let trials = plan.trials();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::invalid("threads", e))?;
    Ok(pool.install(|| trials.par_iter().map(|k| run_trial(plan, k, config)).collect()))
}

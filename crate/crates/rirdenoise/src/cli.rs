//! The `rirdenoise` command line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rirdenoise_core::acoustics::{band_dt60, dynamic_improvement, schroeder_edc};
use rirdenoise_core::filter::{ThirdOctaveBand, LOW_BAND_CENTERS};
use rirdenoise_core::pipeline::{denoise_with_bank, Clock};
use rirdenoise_core::synth::{gen_modal, trial_input, ModalSpec};
use rirdenoise_core::Signal;
use serde::{Deserialize, Serialize};

use crate::config::{load_config, load_plan, ConfigFile, PlanFile, SCHEMA_VERSION};
use crate::manifest::{write_json, write_manifest, RunManifest};
use crate::report::{summarize, write_band_csv, write_edc_csv, write_records_csv, BandRow};
use crate::sweep::{resolve_threads, run_sweep_parallel};
use crate::wav::{read_wav, write_wav, WavFormat};
use crate::{CliError, ExitStatus};

/// Minimum fraction of successful trials for a sweep to exit cleanly.
pub const SWEEP_SUCCESS_FRACTION: f64 = 0.95;

#[derive(Debug, Parser)]
#[command(name = "rirdenoise", version, about = "Room impulse response denoising and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Denoise a mono WAV file.
    Denoise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Pipeline config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Thresholding only, approximation band untouched.
        #[arg(long)]
        baseline: bool,
    },
    /// Decay curve, per-band DT60 and (with two files) dynamic improvement.
    Evaluate {
        input: PathBuf,
        /// Processed version of INPUT to compare against.
        compare: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
        fit_upper_db: f64,
        #[arg(long, default_value_t = -25.0, allow_hyphen_values = true)]
        fit_lower_db: f64,
    },
    /// Write synthetic modal impulse responses.
    Synth {
        /// Single modal spec JSON.
        #[arg(long, conflicts_with = "plan", required_unless_present = "plan")]
        spec: Option<PathBuf>,
        /// Sweep plan JSON: one clean file per decay factor.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// With --plan, also write every noisy trial input.
        #[arg(long, requires = "plan")]
        noisy: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run a sweep plan and write per-band records plus a summary.
    Sweep {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Worker threads (overrides RIRDENOISE_THREADS; 0 = one per core).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print a default config, plan or spec file.
    Defaults {
        #[arg(value_enum)]
        kind: DefaultsKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DefaultsKind {
    Config,
    Plan,
    Spec,
}

/// Modal spec file for `synth --spec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub spec: ModalSpec,
}

struct WallClock(Instant);

impl Clock for WallClock {
    fn now_micros(&self) -> u64 {
        self.0.elapsed().as_micros() as u64
    }
}

/// Parses `args` and runs the command, printing diagnostics to stderr.
pub fn main_with_args<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::InputError } else { ExitStatus::Success };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitStatus::Success,
        Err(e) => {
            eprintln!("rirdenoise: {e}");
            e.exit_status()
        }
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Denoise { input, output, config, baseline } => cmd_denoise(&input, &output, config.as_deref(), baseline),
        Command::Evaluate { input, compare, out_dir, fit_upper_db, fit_lower_db } => {
            cmd_evaluate(&input, compare.as_deref(), &out_dir, (fit_upper_db, fit_lower_db))
        }
        Command::Synth { spec, plan, noisy, out_dir } => cmd_synth(spec.as_deref(), plan.as_deref(), noisy, &out_dir),
        Command::Sweep { plan, out_dir, threads } => cmd_sweep(&plan, &out_dir, resolve_threads(threads)),
        Command::Defaults { kind } => {
            let text = match kind {
                DefaultsKind::Config => serde_json::to_string_pretty(&ConfigFile::default()),
                DefaultsKind::Plan => serde_json::to_string_pretty(&PlanFile::default()),
                DefaultsKind::Spec => serde_json::to_string_pretty(&SpecFile {
                    schema_version: SCHEMA_VERSION,
                    spec: ModalSpec::default_low_band(),
                }),
            };
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", text.expect("default structures serialise"));
            Ok(())
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn report_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".report.json");
    output.with_file_name(name)
}

pub fn cmd_denoise(input: &Path, output: &Path, config: Option<&Path>, baseline: bool) -> Result<(), CliError> {
    let (signal, format) = read_wav(input)?;
    let mut resolved = load_config(config)?;
    if baseline {
        resolved.pipeline.dl_enabled = false;
    }
    let clock = WallClock(Instant::now());
    let (out, report) = denoise_with_bank(&signal, &resolved.pipeline, &resolved.bank, Some(&clock))?;
    write_wav(output, &out, format)?;
    let report_file = report_path(output);
    write_json(&report_file, &report)?;
    let mut manifest = RunManifest::new("denoise", resolved.pipeline.seed, to_value(&resolved.pipeline));
    manifest.inputs.push(input.to_path_buf());
    manifest.inputs.extend(config.map(Path::to_path_buf));
    manifest.outputs = vec![output.to_path_buf(), report_file];
    write_manifest(output, &manifest)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ImprovementReport {
    before: PathBuf,
    after: PathBuf,
    dynamic_improvement_db: f64,
    floor_source: &'static str,
}

pub fn cmd_evaluate(
    input: &Path,
    compare: Option<&Path>,
    out_dir: &Path,
    fit_range_db: (f64, f64),
) -> Result<(), CliError> {
    let (first, _) = read_wav(input)?;
    let second = compare.map(read_wav).transpose()?.map(|(s, _)| s);
    if let Some(s) = &second {
        if s.len() != first.len() || s.sample_rate() != first.sample_rate() {
            return Err(CliError::input(compare.unwrap(), "length or sample rate differs from the first file"));
        }
    }
    create_dir(out_dir)?;
    let mut outputs = Vec::new();
    let mut files: Vec<(&Path, &Signal)> = vec![(input, &first)];
    if let (Some(p), Some(s)) = (compare, second.as_ref()) {
        files.push((p, s));
    }

    let mut rows = Vec::new();
    for (i, (path, sig)) in files.iter().enumerate() {
        let edc = schroeder_edc(sig)?;
        let edc_path = out_dir.join(if i == 0 { "edc.csv" } else { "edc_compare.csv" });
        let f = File::create(&edc_path).map_err(|e| CliError::output(&edc_path, e))?;
        write_edc_csv(BufWriter::new(f), &edc).map_err(|e| CliError::output(&edc_path, e))?;
        outputs.push(edc_path);
        for &nominal in &LOW_BAND_CENTERS {
            let band = ThirdOctaveBand::from_nominal(nominal);
            if band.high_hz >= sig.sample_rate() / 2.0 {
                continue;
            }
            rows.push(BandRow {
                file: path.display().to_string(),
                band_hz: nominal,
                low_hz: band.low_hz,
                high_hz: band.high_hz,
                estimate: band_dt60(sig, &band, fit_range_db).map_err(|e| e.to_string()),
            });
        }
    }
    let band_path = out_dir.join("bands.csv");
    let f = File::create(&band_path).map_err(|e| CliError::output(&band_path, e))?;
    write_band_csv(BufWriter::new(f), &rows).map_err(|e| CliError::output(&band_path, e))?;
    outputs.push(band_path);

    if let (Some(p), Some(s)) = (compare, second.as_ref()) {
        let value = dynamic_improvement(&first, s, &Default::default())?;
        let path = out_dir.join("improvement.json");
        write_json(
            &path,
            &ImprovementReport {
                before: input.to_path_buf(),
                after: p.to_path_buf(),
                dynamic_improvement_db: value,
                floor_source: "envelope_fit_x3",
            },
        )?;
        outputs.push(path);
    }
    let config = serde_json::json!({ "fit_range_db": [fit_range_db.0, fit_range_db.1], "bands_hz": LOW_BAND_CENTERS });
    for out in &outputs {
        let mut m = RunManifest::new("evaluate", 0, config.clone());
        m.inputs = files.iter().map(|(p, _)| p.to_path_buf()).collect();
        m.outputs = vec![out.clone()];
        write_manifest(out, &m)?;
    }
    Ok(())
}

fn read_spec(path: &Path) -> Result<ModalSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(path, e))?;
    let file: SpecFile =
        serde_json::from_str(&text).map_err(|e| CliError::invalid("spec", format!("{}: {e}", path.display())))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::invalid("spec", format!("schema_version {} is not supported", file.schema_version)));
    }
    file.spec.validate().map_err(|e| CliError::invalid("spec", e))?;
    Ok(file.spec)
}

fn write_synth(path: &Path, signal: &Signal, manifest: &RunManifest) -> Result<(), CliError> {
    write_wav(path, signal, WavFormat::Float32)?;
    let mut m = manifest.clone();
    m.outputs = vec![path.to_path_buf()];
    write_manifest(path, &m).map(|_| ())
}

pub fn cmd_synth(spec: Option<&Path>, plan: Option<&Path>, noisy: bool, out_dir: &Path) -> Result<(), CliError> {
    match (spec, plan) {
        (Some(spec_path), _) => {
            let spec = read_spec(spec_path)?;
            create_dir(out_dir)?;
            let mut m = RunManifest::new("synth", 0, to_value(&spec));
            m.inputs.push(spec_path.to_path_buf());
            write_synth(&out_dir.join("modal.wav"), &gen_modal(&spec)?, &m)
        }
        (None, Some(plan_path)) => {
            let file = load_plan(plan_path)?;
            create_dir(out_dir)?;
            let mut m = RunManifest::new("synth", 0, to_value(&file));
            m.inputs.push(plan_path.to_path_buf());
            let mut factors = file.plan.decay_factors.clone();
            factors.sort_by(f64::total_cmp);
            factors.dedup();
            for f in factors {
                let clean = gen_modal(&file.plan.base_spec.with_decay_factor(f))?;
                write_synth(&out_dir.join(format!("clean_f{f}.wav")), &clean, &m)?;
            }
            if noisy {
                for key in file.plan.trials() {
                    let (_, x) = trial_input(&file.plan, &key)?;
                    let mut mk = m.clone();
                    mk.seed = key.seed;
                    let name = format!("noisy_f{}_seed{}_snr{}.wav", key.factor, key.seed, key.snr_db);
                    write_synth(&out_dir.join(name), &x, &mk)?;
                }
            }
            Ok(())
        }
        (None, None) => Err(CliError::invalid("arguments", "one of --spec or --plan is required")),
    }
}

pub fn cmd_sweep(plan_path: &Path, out_dir: &Path, threads: usize) -> Result<(), CliError> {
    let file = load_plan(plan_path)?;
    create_dir(out_dir)?;
    let records = run_sweep_parallel(&file.plan, &file.pipeline, threads)?;
    let csv_path = out_dir.join("records.csv");
    let f = File::create(&csv_path).map_err(|e| CliError::output(&csv_path, e))?;
    write_records_csv(BufWriter::new(f), &file.plan, &records).map_err(|e| CliError::output(&csv_path, e))?;
    let summary = summarize(&records);
    let summary_path = out_dir.join("summary.json");
    write_json(&summary_path, &summary)?;
    for out in [&csv_path, &summary_path] {
        let mut m = RunManifest::new("sweep", file.pipeline.seed, to_value(&file));
        m.inputs.push(plan_path.to_path_buf());
        m.outputs = vec![out.clone()];
        write_manifest(out, &m)?;
    }
    if summary.success_rate() < SWEEP_SUCCESS_FRACTION {
        return Err(CliError::Degraded { succeeded: summary.succeeded, total: summary.trials });
    }
    Ok(())
}

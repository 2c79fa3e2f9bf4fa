use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rirdenoise::core::synth::{gen_modal, ModalSpec, Mode};
use rirdenoise::core::Signal;
use rirdenoise::report::{BAND_HEADER, EDC_HEADER, RECORD_HEADER};
use rirdenoise::wav::{read_wav, write_wav, WavFormat};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rirdenoise"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_spec() -> ModalSpec {
    ModalSpec {
        modes: vec![
            Mode { amplitude: 1.0, alpha: 1e-3, frequency_hz: 60.0 },
            Mode { amplitude: 0.5, alpha: 4e-4, frequency_hz: 400.0 },
        ],
        length: 8192,
        sample_rate: 8000.0,
    }
}

fn write_json(path: &Path, value: serde_json::Value) {
    std::fs::write(path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
}

fn small_plan(dir: &Path, length: usize) -> PathBuf {
    let mut spec = serde_json::to_value(small_spec()).unwrap();
    spec["length"] = length.into();
    let path = dir.join("plan.json");
    write_json(
        &path,
        serde_json::json!({
            "schema_version": 1,
            "snr_levels_db": [20.0, 40.0],
            "noise_seeds": [1],
            "decay_factors": [1.0],
            "base_spec": spec,
            "pipeline": {"levels": 4, "dl_iterations": 3},
        }),
    );
    path
}

fn csv_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn identity_denoise_round_trips_within_one_lsb() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.wav");
    let sig = gen_modal(&small_spec()).unwrap();
    let scaled = sig.with_samples(sig.samples().iter().map(|v| 0.5 * v).collect()).unwrap();
    write_wav(&input, &scaled, WavFormat::Int16).unwrap();
    let cfg = dir.path().join("cfg.json");
    write_json(
        &cfg,
        serde_json::json!({
            "schema_version": 1, "levels": 4, "dl_enabled": false,
            "threshold": {"estimator": "fixed", "fixed_value": 0.0}
        }),
    );
    let output = dir.path().join("out.wav");
    let out = run(&["denoise", "--input", s(&input), "--output", s(&output), "--config", s(&cfg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (a, fa) = read_wav(&input).unwrap();
    let (b, fb) = read_wav(&output).unwrap();
    assert_eq!(fa, fb);
    for (x, y) in a.samples().iter().zip(b.samples()) {
        assert!((x - y).abs() <= WavFormat::Int16.lsb() + 1e-12);
    }
    assert!(dir.path().join("out.wav.manifest.json").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.wav.report.json")).unwrap()).unwrap();
    assert_eq!(report["arm"], "baseline");
    assert!(report["stages"][0]["micros"].is_u64());
}

#[test]
fn full_denoise_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.wav");
    write_wav(&input, &gen_modal(&small_spec()).unwrap(), WavFormat::Float32).unwrap();
    let cfg = dir.path().join("cfg.json");
    write_json(&cfg, serde_json::json!({"schema_version": 1, "levels": 4, "dl_iterations": 3}));
    let output = dir.path().join("out.wav");
    let out = run(&["denoise", "--input", s(&input), "--output", s(&output), "--config", s(&cfg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("out.wav.report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["arm"], "proposed");
    assert!(report["envelope"]["model"]["x1"].is_f64());
    assert_eq!(report["dictionary"]["tolerance_semantics"], "relative");
    assert_eq!(report["config"]["seed"], 0);
}

#[test]
fn missing_input_is_exit_2_and_names_path() {
    let out = run(&["denoise", "--input", "/nonexistent/x.wav", "--output", "/tmp/never.wav"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/x.wav"));
}

#[test]
fn stereo_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("st.wav");
    let spec = hound_spec();
    let mut w = hound::WavWriter::create(&path, spec).unwrap();
    for i in 0..200 {
        w.write_sample(i as i16).unwrap();
    }
    w.finalize().unwrap();
    let out = run(&["denoise", "--input", s(&path), "--output", s(&dir.path().join("o.wav"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mono required"));
}

fn hound_spec() -> hound::WavSpec {
    hound::WavSpec { channels: 2, sample_rate: 8000, bits_per_sample: 16, sample_format: hound::SampleFormat::Int }
}

#[test]
fn pipeline_failure_is_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("short.wav");
    write_wav(&input, &Signal::new(vec![0.1; 64], 8000.0).unwrap(), WavFormat::Float32).unwrap();
    let out = run(&["denoise", "--input", s(&input), "--output", s(&dir.path().join("o.wav"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn evaluate_single_and_pair() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.wav");
    let spec = ModalSpec { length: 48000, sample_rate: 48000.0, ..ModalSpec::default_low_band() };
    let sig = gen_modal(&spec.with_decay_factor(6.0)).unwrap();
    write_wav(&a, &sig, WavFormat::Float32).unwrap();

    let one = dir.path().join("one");
    let out = run(&["evaluate", s(&a), "--out-dir", s(&one)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bands = csv_lines(&one.join("bands.csv"));
    assert_eq!(bands[0], BAND_HEADER.join(","));
    assert_eq!(bands.len(), 1 + 7);
    let edc = csv_lines(&one.join("edc.csv"));
    assert_eq!(edc[0], EDC_HEADER.join(","));
    assert_eq!(edc.len(), 1 + 48000);
    assert!(one.join("bands.csv.manifest.json").exists());

    let two = dir.path().join("two");
    let out = run(&["evaluate", s(&a), s(&a), "--out-dir", s(&two)]);
    assert!(out.status.success());
    let imp: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(two.join("improvement.json")).unwrap()).unwrap();
    assert_eq!(imp["dynamic_improvement_db"], 0.0);
    assert_eq!(csv_lines(&two.join("bands.csv")).len(), 1 + 14);
}

#[test]
fn evaluate_known_floor_difference() {
    use rirdenoise::core::rng;
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec();
    for m in &mut spec.modes {
        m.alpha = 3e-3;
    }
    let clean = gen_modal(&spec).unwrap();
    let mut r = rng::stream(4, 0);
    let noise: Vec<f64> = (0..clean.len()).map(|_| rng::standard_normal(&mut r)).collect();
    let mk = |g: f64| clean.with_samples(clean.samples().iter().zip(&noise).map(|(c, w)| c + g * w).collect()).unwrap();
    let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
    write_wav(&a, &mk(1e-2), WavFormat::Float32).unwrap();
    write_wav(&b, &mk(1e-3), WavFormat::Float32).unwrap();
    let out = run(&["evaluate", s(&a), s(&b), "--out-dir", s(dir.path())]);
    assert!(out.status.success());
    let imp: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("improvement.json")).unwrap()).unwrap();
    let v = imp["dynamic_improvement_db"].as_f64().unwrap();
    assert!((v - 20.0).abs() < 1.0, "{v}");
}

#[test]
fn synth_spec_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let mut v = serde_json::to_value(small_spec()).unwrap();
    v["schema_version"] = 1.into();
    write_json(&spec, v);
    for sub in ["a", "b"] {
        let out = run(&["synth", "--spec", s(&spec), "--out-dir", s(&dir.path().join(sub))]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a/modal.wav")).unwrap();
    let b = std::fs::read(dir.path().join("b/modal.wav")).unwrap();
    assert_eq!(a, b);
    assert_eq!(std::fs::read_dir(dir.path().join("a")).unwrap().count(), 2);
}

#[test]
fn synth_invalid_spec_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let mut bad = small_spec();
    bad.modes[0].frequency_hz = 5000.0;
    let mut v = serde_json::to_value(bad).unwrap();
    v["schema_version"] = 1.into();
    write_json(&spec, v);
    let out = run(&["synth", "--spec", s(&spec), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modes[0].frequency_hz"));
}

#[test]
fn synth_plan_writes_noisy_trials() {
    let dir = tempfile::tempdir().unwrap();
    let plan = small_plan(dir.path(), 8192);
    let out_dir = dir.path().join("w");
    let out = run(&["synth", "--plan", s(&plan), "--noisy", "--out-dir", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let wavs = std::fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "wav"))
        .count();
    assert_eq!(wavs, 1 + 2);
}

#[test]
fn sweep_outputs_and_thread_independence() {
    let dir = tempfile::tempdir().unwrap();
    let plan = small_plan(dir.path(), 8192);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let out = run(&["sweep", "--plan", s(&plan), "--out-dir", s(&a), "--threads", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin()
        .args(["sweep", "--plan", s(&plan), "--out-dir", s(&b)])
        .env("RIRDENOISE_THREADS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = csv_lines(&a.join("records.csv"));
    assert_eq!(rows[0], RECORD_HEADER.join(","));
    assert_eq!(rows.len(), 1 + 2 * 2 * 3);
    assert_eq!(std::fs::read(a.join("records.csv")).unwrap(), std::fs::read(b.join("records.csv")).unwrap());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["trials"], 2);
    assert!(a.join("records.csv.manifest.json").exists());
}

#[test]
fn sweep_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    write_json(&empty, serde_json::json!({"schema_version": 1, "noise_seeds": []}));
    let out = run(&["sweep", "--plan", s(&empty), "--out-dir", s(&dir.path().join("e"))]);
    assert_eq!(out.status.code(), Some(2));

    // Signals too short for the configured levels: every trial fails.
    let failing = small_plan(dir.path(), 40);
    let out = run(&["sweep", "--plan", s(&failing), "--out-dir", s(&dir.path().join("f"))]);
    assert_eq!(out.status.code(), Some(4));
    let rows = csv_lines(&dir.path().join("f/records.csv"));
    assert_eq!(rows.len(), 1 + 2 * 2 * 3);
    assert!(rows[1].ends_with("trial_failed"));
}

#[test]
fn defaults_are_loadable() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["config", "plan", "spec"] {
        let out = run(&["defaults", kind]);
        assert!(out.status.success());
        let path = dir.path().join(format!("{kind}.json"));
        std::fs::write(&path, &out.stdout).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["schema_version"], 1);
    }
    rirdenoise::config::load_config(Some(&dir.path().join("config.json"))).unwrap();
    let plan = rirdenoise::config::load_plan(&dir.path().join("plan.json")).unwrap();
    assert!(plan.plan.is_full_grid());
    assert_eq!(plan.plan.trials().len(), 400);
}

#[test]
fn golden_headers() {
    assert_eq!(
        RECORD_HEADER.join(","),
        "trial,factor,seed,snr_db,band_hz,below_cutoff,arm,exact_dt60_s,estimated_dt60_s,relative_error,improvement_db,status"
    );
    assert_eq!(EDC_HEADER.join(","), "sample,time_s,edc_db");
    assert_eq!(BAND_HEADER.join(","), "file,band_hz,low_hz,high_hz,dt60_s,fit_r2,status");
}

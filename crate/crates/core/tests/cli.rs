use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use rand_distr::{Distribution, Normal};
use serde_json::Value;

use cyborg_sim::config::{ConfigError, RunConfig};
use cyborg_sim::neurosignal::{run_pipeline, write_trace_binary, write_trace_csv, PipelineParams, Trace};
use cyborg_sim::rng::seeded;
use cyborg_sim::vision::{write_pgm, Mask};

fn cyborg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyborg"))
        .env_remove("CYBORG_OUTPUT_DIR")
        .env_remove("CYBORG_SEED")
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn assemble_reports_the_single_insect_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyborg(dir.path(), &["assemble"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("total: 68.0 s"));
    let events = fs::read_to_string(dir.path().join("assembly_events.csv")).unwrap();
    assert_eq!(events.lines().count(), 1 + 7);
    assert!(dir.path().join("assembly_plan.json").exists());
}

#[test]
fn batched_assembly_hides_handling_behind_curing() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyborg(dir.path(), &["assemble", "--batch", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("468.0 s"));
}

#[test]
fn collapsed_rig_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::from_str(&RunConfig::default().to_json()).unwrap();
    cfg["rig"]["lowered_distance_d"] = Value::from(0.0);
    let path = dir.path().join("rig.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let o = cyborg(dir.path(), &["--config", path.to_str().unwrap(), "assemble"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("exposure"), "{}", stderr(&o));
}

const RATE: f64 = 25_000.0;

fn noise(seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    let n = Normal::new(0.0, 10e-6).unwrap();
    (0..RATE as usize).map(|_| n.sample(&mut rng)).collect()
}

/// Seven derivative-of-Gaussian spikes, 10 ms apart, at twice the detection
/// threshold of the noise alone.
fn planted_trace() -> Trace {
    let mut samples = noise(11);
    let params = PipelineParams { edges: vec![], ..PipelineParams::default() };
    let thr = run_pipeline(&Trace::new(RATE, samples.clone()), &params).unwrap().threshold_used;
    let sigma = 0.15e-3;
    for k in 0..7 {
        let c = 0.3 + 0.01 * k as f64;
        for (i, s) in samples.iter_mut().enumerate() {
            let u = (i as f64 / RATE - c) / sigma;
            if u.abs() < 6.0 {
                *s += 2.0 * thr * -u * (0.5 - 0.5 * u * u).exp();
            }
        }
    }
    Trace::new(RATE, samples)
}

fn no_edges_config(dir: &Path) -> String {
    let mut cfg: Value = serde_json::from_str(&RunConfig::default().to_json()).unwrap();
    cfg["neurosignal"]["pipeline"]["edges"] = Value::Array(vec![]);
    let path = dir.join("no_edges.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn spikes_counts_planted_events_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = no_edges_config(dir.path());
    let trace = planted_trace();
    let csv = dir.path().join("planted.csv");
    let bin = dir.path().join("planted.bin");
    fs::write(&csv, write_trace_csv(&trace)).unwrap();
    fs::write(&bin, write_trace_binary(&trace)).unwrap();
    for input in [&csv, &bin] {
        let o = cyborg(dir.path(), &["--config", &cfg, "spikes", "--input", input.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let report = json(&dir.path().join("spikes.json"));
        assert_eq!(report["n_spikes"], 7, "{input:?}");
    }
}

#[test]
fn silent_trace_has_no_spikes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeros.csv");
    fs::write(&path, write_trace_csv(&Trace::new(RATE, vec![0.0; 25_000]))).unwrap();
    let o = cyborg(dir.path(), &["spikes", "--input", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&dir.path().join("spikes.json"))["n_spikes"], 0);
}

#[test]
fn unreadable_trace_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("bad.csv");
    fs::write(&garbage, "voltage_v\nnot-a-number\n").unwrap();
    for input in [garbage, dir.path().join("missing.bin")] {
        let o = cyborg(dir.path(), &["spikes", "--input", input.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    }
}

#[test]
fn sweep_plateaus_then_drops() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyborg(dir.path(), &["spikes", "--sweep"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("spike_sweep.csv")).unwrap();
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[0], f[1])
        })
        .collect();
    assert_eq!(rows.len(), 8);
    let at = |v: f64| rows.iter().find(|r| (r.0 - v).abs() < 1e-9).unwrap().1;
    assert!(at(1.0) > at(0.5));
    assert!(at(3.0) > at(2.5));
    assert!(((at(3.5) - at(3.0)) / at(3.0)).abs() < 0.1);
    assert!(at(4.0) < 0.9 * at(3.5));
}

#[test]
fn coverage_writes_monotone_union_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyborg(dir.path(), &["--seed", "7", "coverage"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("coverage.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "union").unwrap();
    let union: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert!(union.windows(2).all(|w| w[1] >= w[0]));
    let summary = json(&dir.path().join("coverage_summary.json"));
    assert_eq!(summary["seed"], 7);
    assert!(summary["coverage_rate_cm2_s"].as_f64().unwrap() > 0.0);
    assert!((summary["final_union_percent"].as_f64().unwrap() - union.last().unwrap()).abs() < 1e-9);
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn coverage_batch_reports_spread() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyborg(dir.path(), &["coverage", "--seeds", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let batch = &json(&dir.path().join("coverage_summary.json"))["batch"];
    assert!(batch.is_object(), "{batch}");
    let csv = fs::read_to_string(dir.path().join("coverage.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.contains("union_mean") && header.contains("union_sd"));
}

#[test]
fn single_agent_covers_less_than_four() {
    let final_of = |agents: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = cyborg(dir.path(), &["--seed", "3", "coverage", "--agents", agents]);
        assert!(o.status.success(), "{}", stderr(&o));
        json(&dir.path().join("coverage_summary.json"))["final_union_percent"].as_f64().unwrap()
    };
    assert!(final_of("1") < final_of("4"));
}

fn square(x0: usize, y0: usize) -> Mask {
    Mask::from_fn(32, 32, |x, y| (x0..x0 + 10).contains(&x) && (y0..y0 + 10).contains(&y))
}

fn write_masks(dir: &Path, masks: &[(String, Mask)]) {
    fs::create_dir_all(dir).unwrap();
    for (name, m) in masks {
        fs::write(dir.join(name), write_pgm(m)).unwrap();
    }
}

fn metric_rows(dir: &Path) -> Vec<Vec<String>> {
    let csv = fs::read_to_string(dir.join("metrics.csv")).unwrap();
    csv.lines().map(|l| l.split(',').map(str::to_owned).collect()).collect()
}


#[test]
fn metrics_on_identical_and_shifted_masks() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred");
    let truth = dir.path().join("truth");
    let same: Vec<(String, Mask)> = (0..20).map(|i| (format!("m{i:02}.pgm"), square(5 + i % 7, 8))).collect();
    write_masks(&truth, &same);
    write_masks(&pred, &same);
    let run = || cyborg(dir.path(), &["metrics", "--pred", pred.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    let o = run();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("mIoU: 1.0000") && text.contains("mDSC: 1.0000") && text.contains("MSE(p_R): 0.0000"), "{text}");

    let shifted: Vec<(String, Mask)> = (0..20).map(|i| (format!("m{i:02}.pgm"), square(6 + i % 7, 8))).collect();
    write_masks(&pred, &shifted);
    let o = run();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("MSE(p_R): 1.0000"), "{}", stdout(&o));
    let rows = metric_rows(dir.path());
    assert!(rows.len() >= 21);
}

#[test]
fn metrics_rejects_empty_and_unmatched_sets() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred");
    let truth = dir.path().join("truth");
    fs::create_dir_all(&pred).unwrap();
    fs::create_dir_all(&truth).unwrap();
    let args = ["metrics", "--pred", pred.to_str().unwrap(), "--truth", truth.to_str().unwrap()];
    let o = cyborg(dir.path(), &args);
    assert_eq!(o.status.code(), Some(3));

    write_masks(&pred, &[("a.pgm".into(), square(1, 1)), ("only_pred.pgm".into(), square(2, 2))]);
    write_masks(&truth, &[("a.pgm".into(), square(1, 1)), ("only_truth.pgm".into(), square(2, 2))]);
    let o = cyborg(dir.path(), &args);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("only_pred.pgm") && err.contains("only_truth.pgm"), "{err}");
}

#[test]
fn fixation_prints_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyborg(dir.path(), &["fixation", "--points", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("fixation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("d_mm,h_mm,exposure_sufficient,safety_margin"));
}

#[test]
fn unknown_config_key_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    fs::write(&path, "{\n  \"seed\": 1,\n  \"sede\": 2\n}\n").unwrap();
    let o = cyborg(dir.path(), &["--config", path.to_str().unwrap(), "fixation"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("sede"), "{err}");
}

#[test]
fn usage_errors_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cyborg(dir.path(), &["nonsense"]).status.code(), Some(2));
    assert_eq!(cyborg(dir.path(), &["spikes"]).status.code(), Some(2));
}

#[test]
fn environment_overrides_output_dir_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_cyborg"))
        .env("CYBORG_OUTPUT_DIR", &out)
        .env("CYBORG_SEED", "42")
        .args(["coverage"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&out.join("coverage_summary.json"))["seed"], 42);

    let flag = dir.path().join("from_flag");
    let o = Command::new(env!("CARGO_BIN_EXE_cyborg"))
        .env("CYBORG_OUTPUT_DIR", &out)
        .env("CYBORG_SEED", "42")
        .args(["--seed", "5", "--output-dir", flag.to_str().unwrap(), "coverage"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&flag.join("coverage_summary.json"))["seed"], 5);

    let o = Command::new(env!("CARGO_BIN_EXE_cyborg")).env("CYBORG_SEED", "many").arg("fixation").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

/// Paths of every object in the default config, with the keys each holds.
fn object_paths(v: &Value, path: Vec<String>, out: &mut Vec<(Vec<String>, Vec<String>)>) {
    if let Value::Object(map) = v {
        out.push((path.clone(), map.keys().cloned().collect()));
        for (k, child) in map {
            let mut p = path.clone();
            p.push(k.clone());
            object_paths(child, p, out);
        }
    }
}

fn object_at<'a>(v: &'a mut Value, path: &[String]) -> &'a mut serde_json::Map<String, Value> {
    path.iter().fold(v, |v, k| &mut v[k.as_str()]).as_object_mut().unwrap()
}

fn default_value() -> Value {
    serde_json::from_str(&RunConfig::default().to_json()).unwrap()
}

fn rejected_as_unknown(v: &Value, key: &str) -> bool {
    matches!(RunConfig::from_json(&serde_json::to_string_pretty(v).unwrap()),
        Err(ConfigError::Parse { message, .. }) if message.contains(key))
}

#[test]
fn default_config_round_trips() {
    let cfg = RunConfig::from_json(&RunConfig::default().to_json()).unwrap();
    assert_eq!(cfg.to_json(), RunConfig::default().to_json());
}

#[test]
fn every_misspelled_or_extra_key_is_rejected() {
    let base = default_value();
    let mut paths = Vec::new();
    object_paths(&base, vec![], &mut paths);
    assert!(paths.len() > 5);
    for (path, keys) in &paths {
        let mut extra = base.clone();
        object_at(&mut extra, path).insert("zz_unknown".into(), Value::from(1));
        assert!(rejected_as_unknown(&extra, "zz_unknown"), "extra key accepted at {path:?}");
        for key in keys {
            let mut typo = base.clone();
            let obj = object_at(&mut typo, path);
            let value = obj.remove(key).unwrap();
            let bad = format!("{key}_x");
            obj.insert(bad.clone(), value);
            assert!(rejected_as_unknown(&typo, &bad), "misspelled {key} accepted at {path:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_keys_are_rejected(key in "[a-z_]{1,12}", depth in 0usize..8) {
        let base = default_value();
        let mut paths = Vec::new();
        object_paths(&base, vec![], &mut paths);
        let (path, keys) = &paths[depth % paths.len()];
        prop_assume!(!keys.contains(&key));
        let mut v = base.clone();
        object_at(&mut v, path).insert(key.clone(), Value::Null);
        prop_assert!(rejected_as_unknown(&v, &key));
    }
}

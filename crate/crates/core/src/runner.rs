//! Subcommand implementations behind the `cyborg` binary.
//!
//! Each `run_*` function takes a validated [`RunConfig`], writes its
//! artifacts into `output_dir` atomically and returns what it would print.
//! Failures carry the process exit code they map to.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::assembly::{batch_assemble_with, check_payload, check_workspace, plan_assembly, AssemblyError};
use crate::config::{ConfigError, RunConfig};
use crate::io::write_atomic;
use crate::morphology::{exposure_sufficient, lifting_height};
use crate::neurosignal::{self, read_trace_binary, read_trace_csv, run_pipeline, Trace};
use crate::rng;
use crate::swarm::{self, coverage_rate, simulate, simulate_batch, SwarmRun};
use crate::vision::{self, evaluate_pairs, extract_reference_point, metrics_csv, read_pgm, synth_pronotum};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Input(_) => 3,
            RunError::Runtime(_) => 4,
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.to_string())
    }
}

/// Text for stdout plus the files written, in write order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn write(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<(), RunError> {
        let path = dir.join(name);
        write_atomic(&path, contents).map_err(|e| RunError::Runtime(format!("writing {}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.stdout.push_str(line.as_ref());
        self.stdout.push('\n');
    }
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// Read the config file (or defaults), apply environment overrides, then
/// validate again.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig, RunError> {
    let mut cfg = match path {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_env()?;
    cfg.validate()?;
    Ok(cfg)
}

fn assembly_error(e: AssemblyError) -> RunError {
    match e {
        AssemblyError::InsufficientExposure { .. } | AssemblyError::Morphology(_) | AssemblyError::InfeasibleCorridor { .. } => {
            RunError::Config(e.to_string())
        }
        other => RunError::Runtime(other.to_string()),
    }
}

/// Plan one implantation from a synthetic top view, walk the assembly state
/// machine and write `assembly_events.csv` and `assembly_plan.json`. With
/// `batch`, also time a line of that many insects.
pub fn run_assemble(cfg: &RunConfig, batch: Option<usize>) -> Result<Outcome, RunError> {
    let a = &cfg.assembly;
    let (mask, _) = synth_pronotum(&a.shield, rng::child_seed(cfg.seed, "assembly-view", 0));
    let p_r = extract_reference_point(&mask, a.posterior).map_err(|e| RunError::Runtime(e.to_string()))?;
    let (pose, process) = plan_assembly(&cfg.morphology, &p_r, &cfg.rig, &a.plan).map_err(assembly_error)?;
    let done = process.run_to_completion();

    let mut out = Outcome::default();
    let plan = json!({
        "reference_point_px": p_r,
        "pose": pose,
        "payload_ok": check_payload(&a.payload),
        "workspace_ok": check_workspace(&pose, &a.workspace, a.approach_envelope),
        "total_time_s": done.elapsed(),
    });
    out.write(&cfg.output_dir, "assembly_events.csv", done.event_log_csv().as_bytes())?;
    out.write(&cfg.output_dir, "assembly_plan.json", &to_json(&plan))?;
    out.say(format!("reference point: ({}, {}) px", p_r.x, p_r.y));
    out.say(format!("pitch: {:.1} deg", pose.pitch_alpha));
    for r in done.log() {
        out.say(format!("{:<8} {:>5.1} -> {:>5.1} s", r.step.name(), r.t_start_s, r.t_end_s));
    }
    match batch {
        None => out.say(format!("total: {:.1} s", done.elapsed())),
        Some(n) => {
            let total = batch_assemble_with(n, a.handling_gap, &a.plan.durations).map_err(assembly_error)?;
            let summary = json!({ "insects": n, "handling_gap_s": a.handling_gap, "total_time_s": total });
            out.write(&cfg.output_dir, "assembly_batch.json", &to_json(&summary))?;
            out.say(format!("total for {n} insects: {total:.1} s"));
        }
    }
    Ok(out)
}

/// Where `run_spikes` gets its trace.
#[derive(Debug, Clone, PartialEq)]
pub enum SpikeSource {
    /// Recorded trace, CSV or binary (chosen by extension, `.bin` is binary).
    File(PathBuf),
    /// Synthetic response at this stimulation voltage.
    Synth(f64),
}

pub fn read_trace_file(path: &Path) -> Result<Trace, RunError> {
    let input = |e: String| RunError::Input(format!("{}: {e}", path.display()));
    let bytes = fs::read(path).map_err(|e| input(e.to_string()))?;
    if path.extension().is_some_and(|e| e == "bin") {
        read_trace_binary(&bytes).map_err(|e| input(e.to_string()))
    } else {
        let text = String::from_utf8(bytes).map_err(|e| input(e.to_string()))?;
        read_trace_csv(&text).map_err(|e| input(e.to_string()))
    }
}

/// Spike counts for one trace, written to `spikes.json`. With `sweep`, also
/// the mean count per voltage over the configured seeds in `spike_sweep.csv`.
pub fn run_spikes(cfg: &RunConfig, source: Option<SpikeSource>, sweep: bool) -> Result<Outcome, RunError> {
    let n = &cfg.neurosignal;
    let mut out = Outcome::default();
    if let Some(source) = source {
        let trace = match &source {
            SpikeSource::File(p) => read_trace_file(p)?,
            SpikeSource::Synth(v) => n
                .model
                .generate(*v, rng::child_seed(cfg.seed, "spikes", 0), n.sample_rate)
                .map_err(|e| RunError::Config(e.to_string()))?,
        };
        let train = run_pipeline(&trace, &n.pipeline).map_err(|e| match source {
            SpikeSource::File(_) => RunError::Input(e.to_string()),
            SpikeSource::Synth(_) => RunError::Config(e.to_string()),
        })?;
        let times: Vec<f64> = train.indices.iter().map(|&i| i as f64 / trace.sample_rate).collect();
        let report = json!({
            "n_spikes": train.count(),
            "threshold": train.threshold_used,
            "params": n.pipeline,
            "sample_rate_hz": trace.sample_rate,
            "spike_times_s": times,
        });
        out.write(&cfg.output_dir, "spikes.json", &to_json(&report))?;
        out.say(format!("n_spikes: {}", train.count()));
        out.say(format!("threshold: {:.3e} V", train.threshold_used));
    }
    if sweep {
        let csv = sweep_csv(cfg)?;
        out.write(&cfg.output_dir, "spike_sweep.csv", csv.as_bytes())?;
        out.say(format!("sweep: {} voltages x {} seeds", n.sweep.voltages().len(), n.sweep.seeds));
    }
    if out.files.is_empty() {
        return Err(RunError::Config("spikes needs --input, --synth or --sweep".into()));
    }
    Ok(out)
}

/// Mean and SD of detected spikes per voltage. Seed `i` is shared across
/// voltages so the curve compares like with like.
fn sweep_csv(cfg: &RunConfig) -> Result<String, RunError> {
    let n = &cfg.neurosignal;
    let seeds: Vec<u64> = (0..n.sweep.seeds as u64).map(|i| rng::child_seed(cfg.seed, "sweep", i)).collect();
    let mut csv = String::from("voltage_v,mean_spikes,sd_spikes,mean_rate_hz\n");
    for v in n.sweep.voltages() {
        let counts = seeds
            .par_iter()
            .map(|&s| {
                let t = n.model.generate(v, s, n.sample_rate)?;
                Ok(run_pipeline(&t, &n.pipeline)?.count() as f64)
            })
            .collect::<Result<Vec<f64>, neurosignal::SignalError>>()
            .map_err(|e| RunError::Config(e.to_string()))?;
        let (mean, sd) = mean_sd(&counts);
        let _ = writeln!(csv, "{v},{mean},{sd},{}", mean / n.model.duration);
    }
    Ok(csv)
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

#[derive(Serialize)]
struct CoverageSummary<'a> {
    seed: u64,
    config_hash: String,
    agents: usize,
    duration_s: f64,
    final_union_percent: f64,
    coverage_rate_cm2_s: f64,
    per_agent: &'a [swarm::AgentSummary],
    #[serde(skip_serializing_if = "Option::is_none")]
    batch: Option<BatchSummary>,
}

#[derive(Serialize)]
struct BatchSummary {
    seeds: Vec<u64>,
    final_union_percent: Vec<f64>,
    final_union_mean: f64,
    final_union_sd: f64,
}

/// Run the dispersion mission and write `trajectory.csv`, `coverage.csv`
/// and `coverage_summary.json`. With `seeds > 1` the batch mean and SD of
/// union coverage are appended to the coverage series.
pub fn run_coverage(cfg: &RunConfig, seeds: Option<usize>, agents: Option<usize>) -> Result<Outcome, RunError> {
    let base = cfg.swarm_config(agents);
    base.validate().map_err(|e| RunError::Config(e.to_string()))?;
    let runtime = |e: swarm::SwarmError| RunError::Runtime(e.to_string());
    let n = seeds.unwrap_or(1);
    if n == 0 {
        return Err(RunError::Config("--seeds must be at least 1".into()));
    }
    let (run, batch): (SwarmRun, Option<Vec<SwarmRun>>) = if n == 1 {
        (simulate(&base).map_err(runtime)?, None)
    } else {
        let list: Vec<u64> = (0..n as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
        let runs = simulate_batch(&base, &list, cfg.swarm.arena.is_some()).map_err(runtime)?;
        (runs[0].clone(), Some(runs))
    };

    let mut coverage = run.coverage_csv();
    if let Some(runs) = &batch {
        coverage = String::new();
        let mut lines = run.coverage_csv().lines().map(str::to_owned).collect::<Vec<_>>();
        lines[0].push_str(",union_mean,union_sd");
        for (k, line) in lines.iter_mut().enumerate().skip(1) {
            let col: Vec<f64> = runs.iter().map(|r| r.coverage[k - 1].union).collect();
            let (m, sd) = mean_sd(&col);
            let _ = write!(line, ",{m},{sd}");
        }
        for line in lines {
            coverage.push_str(&line);
            coverage.push('\n');
        }
    }

    let rate = coverage_rate(&run);
    let summary = CoverageSummary {
        seed: run.config.seed,
        config_hash: cfg.hash(),
        agents: run.config.agents.len(),
        duration_s: run.elapsed,
        final_union_percent: run.final_union_percent(),
        coverage_rate_cm2_s: rate,
        per_agent: &run.agents,
        batch: batch.as_ref().map(|runs| {
            let finals: Vec<f64> = runs.iter().map(SwarmRun::final_union_percent).collect();
            let (m, sd) = mean_sd(&finals);
            BatchSummary {
                seeds: runs.iter().map(|r| r.config.seed).collect(),
                final_union_percent: finals,
                final_union_mean: m,
                final_union_sd: sd,
            }
        }),
    };

    let mut out = Outcome::default();
    out.write(&cfg.output_dir, "trajectory.csv", run.trajectory_csv().as_bytes())?;
    out.write(&cfg.output_dir, "coverage.csv", coverage.as_bytes())?;
    out.write(&cfg.output_dir, "coverage_summary.json", &to_json(&summary))?;
    for a in &run.agents {
        out.say(format!("agent {}: {:.2}%", a.agent_id, a.final_coverage_percent));
    }
    out.say(format!("union at {:.1} s: {:.2}%, rate {:.2} cm^2/s", run.elapsed, run.final_union_percent(), rate));
    if let Some(b) = &summary.batch {
        out.say(format!("batch of {n}: {:.2}% +- {:.2}", b.final_union_mean, b.final_union_sd));
    }
    Ok(out)
}

fn pgm_names(dir: &Path) -> Result<BTreeSet<String>, RunError> {
    let entries = fs::read_dir(dir).map_err(|e| RunError::Input(format!("{}: {e}", dir.display())))?;
    let mut names = BTreeSet::new();
    for entry in entries {
        let entry = entry.map_err(|e| RunError::Input(format!("{}: {e}", dir.display())))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".pgm") {
            names.insert(name);
        }
    }
    Ok(names)
}

fn load_mask(path: &Path) -> Result<vision::Mask, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
    read_pgm(&text).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))
}

/// Compare predicted and ground-truth PGM masks matched by file name and
/// write `metrics.csv`.
pub fn run_metrics(cfg: &RunConfig, pred_dir: &Path, truth_dir: &Path) -> Result<Outcome, RunError> {
    let pred = pgm_names(pred_dir)?;
    let truth = pgm_names(truth_dir)?;
    if pred.is_empty() && truth.is_empty() {
        return Err(RunError::Input("no .pgm masks found".into()));
    }
    if pred != truth {
        let only_pred: Vec<_> = pred.difference(&truth).cloned().collect();
        let only_truth: Vec<_> = truth.difference(&pred).cloned().collect();
        return Err(RunError::Input(format!(
            "mask sets differ; only in predictions: [{}]; only in truth: [{}]",
            only_pred.join(", "),
            only_truth.join(", ")
        )));
    }
    let pairs = pred
        .iter()
        .map(|name| {
            let id = name.trim_end_matches(".pgm").to_string();
            Ok((id, load_mask(&pred_dir.join(name))?, load_mask(&truth_dir.join(name))?))
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let (rows, summary) =
        evaluate_pairs(&pairs, cfg.assembly.posterior).map_err(|e| RunError::Input(e.to_string()))?;
    let mut out = Outcome::default();
    out.write(&cfg.output_dir, "metrics.csv", metrics_csv(&rows, &summary).as_bytes())?;
    out.say(format!("pairs: {}", rows.len()));
    out.say(format!("mIoU: {:.4}", summary.miou));
    out.say(format!("mDSC: {:.4}", summary.mdsc));
    out.say(format!("MSE(p_R): {:.4} px^2", summary.mse_pr));
    Ok(out)
}

/// Tabulate lift height against lowered distance from 0 to the rod's
/// initial clearance and write `fixation.csv`.
pub fn run_fixation(cfg: &RunConfig, points: usize) -> Result<Outcome, RunError> {
    if points < 2 {
        return Err(RunError::Config("fixation table needs at least 2 points".into()));
    }
    let rig = &cfg.rig;
    let mut csv = String::from("d_mm,h_mm,exposure_sufficient,safety_margin\n");
    let mut table = String::from("  d (mm)   h (mm)  exposed\n");
    for i in 0..points {
        let d = rig.rod_a_initial_clearance * i as f64 / (points - 1) as f64;
        let h = lifting_height(rig, d).map_err(|e| RunError::Config(e.to_string()))?;
        let ex = exposure_sufficient(rig, h).map_err(|e| RunError::Config(e.to_string()))?;
        let _ = writeln!(csv, "{},{},{},{}", d * 1e3, h * 1e3, ex.sufficient, ex.safety_margin);
        let _ = writeln!(table, "{:>8.3} {:>8.3}  {}", d * 1e3, h * 1e3, if ex.sufficient { "yes" } else { "no" });
    }
    let mut out = Outcome::default();
    out.write(&cfg.output_dir, "fixation.csv", csv.as_bytes())?;
    out.stdout.push_str(&table);
    Ok(out)
}

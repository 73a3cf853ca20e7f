//! Command-line front end. All work happens in `cyborg_sim::runner`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cyborg_sim::runner::{self, RunError, SpikeSource};

#[derive(Parser)]
#[command(name = "cyborg", version, about = "Insect-machine hybrid robot simulations")]
struct Cli {
    /// JSON run config; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config and CYBORG_OUTPUT_DIR.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Overrides the config and CYBORG_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan an implantation and walk the assembly sequence.
    Assemble {
        /// Time a line of this many insects.
        #[arg(long)]
        batch: Option<usize>,
    },
    /// Detect spikes in a recorded or synthetic trace.
    Spikes {
        /// Trace file (.csv or .bin).
        #[arg(long, conflicts_with = "synth")]
        input: Option<PathBuf>,
        /// Synthesize a response at this stimulation voltage.
        #[arg(long)]
        synth: Option<f64>,
        /// Also write the spike-count versus voltage curve.
        #[arg(long)]
        sweep: bool,
    },
    /// Run the multi-robot dispersion mission.
    Coverage {
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        agents: Option<usize>,
    },
    /// Score predicted masks against ground truth.
    Metrics {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Print the lift height table of the fixation rig.
    Fixation {
        #[arg(long, default_value_t = 15)]
        points: usize,
    },
}

fn run(cli: Cli) -> Result<String, RunError> {
    let mut cfg = runner::load_config(cli.config.as_deref())?;
    if let Some(dir) = cli.output_dir {
        cfg.output_dir = dir;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = match cli.command {
        Command::Assemble { batch } => runner::run_assemble(&cfg, batch)?,
        Command::Spikes { input, synth, sweep } => {
            let source = input.map(SpikeSource::File).or(synth.map(SpikeSource::Synth));
            runner::run_spikes(&cfg, source, sweep)?
        }
        Command::Coverage { seeds, agents } => runner::run_coverage(&cfg, seeds, agents)?,
        Command::Metrics { pred, truth } => runner::run_metrics(&cfg, &pred, &truth)?,
        Command::Fixation { points } => runner::run_fixation(&cfg, points)?,
    };
    Ok(out.stdout)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

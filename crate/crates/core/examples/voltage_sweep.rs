//! Mean spike count against stimulation voltage.

use cyborg_sim::neurosignal::{run_pipeline, synth_neural_response, PipelineParams};
use cyborg_sim::rng::child_seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = PipelineParams::default();
    for step in 1..=8 {
        let v = step as f64 * 0.5;
        let counts: Vec<f64> = (0..20)
            .map(|i| {
                let t = synth_neural_response(v, child_seed(0, "example-sweep", i), 25_000.0)?;
                Ok(run_pipeline(&t, &p)?.count() as f64)
            })
            .collect::<Result<_, cyborg_sim::neurosignal::SignalError>>()?;
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        println!("{v:.1} V  {mean:>6.1}  {}", "#".repeat((mean / 2.0) as usize));
    }
    Ok(())
}

//! Blank, filter, threshold and detect on a synthetic neck recording.

use cyborg_sim::neurosignal::{
    bandpass, blank_artifacts, detect_spikes, synth_neural_response, threshold, PipelineParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let raw = synth_neural_response(3.0, 1, 25_000.0)?;
    let p = PipelineParams::default();
    let blanked = blank_artifacts(&raw, &p.edges, p.blank_window)?;
    let filtered = bandpass(&blanked, p.low, p.high, p.order)?;
    let t = threshold(&filtered)?;
    let spikes = detect_spikes(&filtered, t, p.refractory)?;
    println!("{} samples at {} Hz", raw.len(), raw.sample_rate);
    println!("threshold {:.2} uV, {} spikes", t * 1e6, spikes.count());
    for &i in spikes.indices.iter().take(10) {
        println!("  {:.4} s  {:+.1} uV", i as f64 / raw.sample_rate, filtered.samples[i] * 1e6);
    }
    Ok(())
}

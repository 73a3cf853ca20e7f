//! Plan one implantation from a segmented pronotum and run the assembly
//! sequence, then time a batch of insects.

use cyborg_sim::assembly::{batch_assemble, plan_assembly, PlanConfig};
use cyborg_sim::morphology::{sample_morphology, FixationRig};
use cyborg_sim::vision::{synth_pronotum, ShieldParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let morph = sample_morphology(3);
    let (_, p_r) = synth_pronotum(&ShieldParams::default(), 3);
    let (pose, process) = plan_assembly(&morph, &p_r, &FixationRig::default(), &PlanConfig::default())?;
    println!(
        "p_R = ({:.4}, {:.4}, {:.4}) m, pitch {:.1} deg in ({:.1}, {:.1})",
        pose.reference_point_xyz[0],
        pose.reference_point_xyz[1],
        pose.reference_point_xyz[2],
        pose.pitch_alpha,
        pose.alpha_lower,
        pose.alpha_upper
    );
    let done = process.run_to_completion();
    print!("{}", done.event_log_csv());
    println!("one insect: {:.1} s", done.elapsed());
    for n in [1, 2, 4, 8] {
        println!("{n} insects: {:.1} s", batch_assemble(n, 49.0)?);
    }
    Ok(())
}

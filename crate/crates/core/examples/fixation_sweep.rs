//! Lift height of the pronotum as the fixation rods are lowered.

use cyborg_sim::morphology::{exposure_sufficient, lifting_height, FixationRig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rig = FixationRig::default();
    println!("{:>6} {:>6} {:>9} {:>7}", "d_mm", "h_mm", "exposed", "margin");
    for i in 0..=8 {
        let d = i as f64 * 0.5e-3;
        let h = lifting_height(&rig, d)?;
        let e = exposure_sufficient(&rig, h)?;
        println!("{:>6.1} {:>6.2} {:>9} {:>7}", d * 1e3, h * 1e3, e.sufficient, e.safety_margin);
    }
    Ok(())
}

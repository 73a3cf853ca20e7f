//! Posterior reference point on synthetic pronotum masks, and how well it
//! survives a mirror and a small rotation.

use cyborg_sim::vision::{augment, extract_reference_point, synth_pronotum, PosteriorDirection, ShieldParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = ShieldParams::default();
    for seed in 0..5 {
        let (mask, truth) = synth_pronotum(&params, seed);
        let p = extract_reference_point(&mask, PosteriorDirection::PlusY)?;
        let m = extract_reference_point(&mask.mirror_horizontal(), PosteriorDirection::PlusY)?;
        let rotated = augment(&mask, 1.0, 1.0, 10.0)?;
        let r = extract_reference_point(&rotated, PosteriorDirection::PlusY)?;
        println!(
            "seed {seed}: area {:>5}  p_R ({:>3},{:>3})  truth ({:>3},{:>3})  mirrored x {:>3}  rotated ({:>3},{:>3})",
            mask.area(),
            p.x,
            p.y,
            truth.x,
            truth.y,
            m.x,
            r.x,
            r.y
        );
    }
    Ok(())
}

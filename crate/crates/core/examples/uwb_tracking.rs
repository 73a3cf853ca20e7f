//! Range noise against multilateration error for a tag crossing the arena.

use cyborg_sim::rng::seeded;
use cyborg_sim::swarm::{multilaterate, simulate_ranges, Arena, UwbSystem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arena = Arena::empty(2.0, 2.0);
    for noise in [0.0, 0.01, 0.05, 0.1] {
        let mut uwb = UwbSystem::around(&arena);
        uwb.range_noise_sd = noise;
        let mut rng = seeded(9);
        let mut sq = 0.0;
        let n = 200;
        for i in 0..n {
            let f = i as f64 / n as f64;
            let truth = [0.1 + 1.8 * f, 0.2 + 1.6 * f * f];
            let fix = multilaterate(&simulate_ranges(truth, &uwb, &mut rng), &uwb, None)?;
            sq += (fix.position[0] - truth[0]).powi(2) + (fix.position[1] - truth[1]).powi(2);
        }
        println!("range sd {:.2} m  position rmse {:.4} m", noise, (sq / n as f64).sqrt());
    }
    Ok(())
}

//! Coverage of random obstructed arenas by teams of one to six robots,
//! averaged over a few seeds.

use cyborg_sim::swarm::{coverage_rate, simulate, SwarmConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seeds = 0..8u64;
    for n in 1..=6 {
        let (mut cover, mut rate) = (0.0, 0.0);
        for seed in seeds.clone() {
            let mut cfg = SwarmConfig::with_seed(seed);
            let template = cfg.agents[0];
            cfg.agents = vec![template; n];
            let run = simulate(&cfg)?;
            cover += run.final_union_percent();
            rate += coverage_rate(&run);
        }
        let k = seeds.clone().count() as f64;
        println!("{n} robots: {:>5.1}% covered, {:>5.1} cm^2/s", cover / k, rate / k);
    }
    Ok(())
}

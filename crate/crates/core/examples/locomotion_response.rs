//! Heading and speed of one insect through a left turn, a right turn and a
//! deceleration, with the individual noise switched off.

use cyborg_sim::locomotion::{step, AgentParams, AgentState, CommandKind, StimCommand};
use cyborg_sim::rng::seeded;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = AgentParams::manual().deterministic();
    let mut rng = seeded(5);
    let mut s = AgentState::spawn(&p, [1.0, 1.0], 90.0, &mut rng);
    for kind in CommandKind::ALL {
        let before = s.heading;
        s = s.issue(StimCommand::new(kind), &p, &mut rng)?;
        for k in 0..100 {
            s = step(&s, &p, 0.01, &mut rng)?;
            if k % 20 == 19 {
                println!(
                    "{:<10} t={:.1}s heading {:>6.1} speed {:.3} m/s",
                    kind.name(),
                    (k + 1) as f64 * 0.01,
                    s.heading,
                    s.speed
                );
            }
        }
        println!("{:<10} net turn {:+.1} deg", kind.name(), cyborg_sim::locomotion::heading_delta(before, s.heading));
    }
    Ok(())
}

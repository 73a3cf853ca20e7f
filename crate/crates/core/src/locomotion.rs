//! Kinematic model of one hybrid robot under stimulation.
//!
//! Headings are degrees, counterclockwise positive, so a left turn adds to
//! the heading. A turn command tracks a sampled target angle at a capped
//! angular speed for the duration of the stimulus. A deceleration command
//! ramps speed linearly to a sampled minimum and, once the stimulus ends,
//! speed relaxes back to the agent's cruise speed with time constant
//! `recovery_tau`. Between commands the heading diffuses.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest integration step accepted by [`step`].
pub const MAX_DT: f64 = 0.05;
pub const DEFAULT_DT: f64 = 0.01;
/// Stimulus length used for steering and deceleration.
pub const DEFAULT_STIM_DURATION: f64 = 0.4;

const EXPIRY_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocomotionError {
    #[error("time step {0} s outside (0, {MAX_DT}] s")]
    InvalidStep(f64),
    #[error("invalid agent parameters: {0}")]
    InvalidParams(&'static str),
    #[error("stimulus duration must be positive, got {0} s")]
    InvalidDuration(f64),
    #[error("unknown locomotion preset {0:?} (expected \"manual\" or \"auto\")")]
    UnknownPreset(String),
}

/// Response parameters of one assembly population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentParams {
    pub mean_turn_left: f64,
    pub mean_turn_right: f64,
    /// Calibration value, not a measured spread.
    pub sd_turn: f64,
    /// deg/s.
    pub max_ang_speed_left: f64,
    pub max_ang_speed_right: f64,
    /// m/s.
    pub walk_speed_mean: f64,
    pub walk_speed_sd: f64,
    pub decel_min_speed_mean: f64,
    pub decel_min_speed_sd: f64,
    /// Onset-to-minimum time of a deceleration, seconds.
    pub decel_time: f64,
    /// Post-stimulus speed recovery time constant, seconds.
    pub recovery_tau: f64,
    /// deg^2/s.
    pub heading_diffusion: f64,
    pub body_length: f64,
}

/// Heading diffusion used by both presets, calibrated so that a four-robot
/// team covers about 80% of the arena in 631 s (about 78% averaged over
/// 120 seeds).
pub const DEFAULT_HEADING_DIFFUSION: f64 = 4500.0;

impl AgentParams {
    /// Manually assembled robots.
    pub fn manual() -> Self {
        Self {
            mean_turn_left: 68.0,
            mean_turn_right: 82.6,
            sd_turn: 15.0,
            max_ang_speed_left: 275.8,
            max_ang_speed_right: 298.2,
            walk_speed_mean: 0.062,
            walk_speed_sd: 0.026,
            decel_min_speed_mean: 0.015,
            decel_min_speed_sd: 0.013,
            decel_time: 0.33,
            recovery_tau: 1.0,
            heading_diffusion: DEFAULT_HEADING_DIFFUSION,
            body_length: 0.055,
        }
    }

    /// Automatically assembled robots. Spreads not reported for this group
    /// reuse the manual values.
    pub fn auto() -> Self {
        Self {
            mean_turn_left: 70.9,
            mean_turn_right: 79.5,
            max_ang_speed_left: 240.0,
            max_ang_speed_right: 273.5,
            walk_speed_mean: 0.063,
            decel_min_speed_mean: 0.020,
            ..Self::manual()
        }
    }

    pub fn preset(name: &str) -> Result<Self, LocomotionError> {
        match name {
            "manual" => Ok(Self::manual()),
            "auto" => Ok(Self::auto()),
            other => Err(LocomotionError::UnknownPreset(other.to_string())),
        }
    }

    /// Same means with every spread and the heading diffusion set to zero.
    pub fn deterministic(self) -> Self {
        Self { sd_turn: 0.0, walk_speed_sd: 0.0, decel_min_speed_sd: 0.0, heading_diffusion: 0.0, ..self }
    }

    pub fn validate(&self) -> Result<(), LocomotionError> {
        let non_negative = [
            self.sd_turn,
            self.max_ang_speed_left,
            self.max_ang_speed_right,
            self.walk_speed_mean,
            self.walk_speed_sd,
            self.decel_min_speed_mean,
            self.decel_min_speed_sd,
            self.heading_diffusion,
        ];
        if non_negative.iter().any(|v| !(*v >= 0.0)) {
            return Err(LocomotionError::InvalidParams("speeds, rates and spreads must be >= 0"));
        }
        if !(self.decel_min_speed_mean < self.walk_speed_mean) {
            return Err(LocomotionError::InvalidParams("decel_min_speed_mean must be below walk_speed_mean"));
        }
        if !(self.decel_time > 0.0 && self.recovery_tau > 0.0 && self.body_length > 0.0) {
            return Err(LocomotionError::InvalidParams("decel_time, recovery_tau and body_length must be > 0"));
        }
        Ok(())
    }

    pub fn max_ang_speed(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.max_ang_speed_left,
            Side::Right => self.max_ang_speed_right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    TurnLeft,
    TurnRight,
    Decelerate,
}

impl CommandKind {
    pub const ALL: [CommandKind; 3] = [CommandKind::TurnLeft, CommandKind::TurnRight, CommandKind::Decelerate];

    pub fn name(self) -> &'static str {
        match self {
            CommandKind::TurnLeft => "turn_left",
            CommandKind::TurnRight => "turn_right",
            CommandKind::Decelerate => "decelerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimCommand {
    pub kind: CommandKind,
    pub duration: f64,
}

impl StimCommand {
    pub fn new(kind: CommandKind) -> Self {
        Self { kind, duration: DEFAULT_STIM_DURATION }
    }
}

/// Command currently being executed and its progress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActiveCommand {
    Turn {
        side: Side,
        /// Sampled turn magnitude, degrees.
        target: f64,
        turned: f64,
        remaining: f64,
    },
    Decelerate {
        start_speed: f64,
        target_speed: f64,
        elapsed: f64,
        remaining: f64,
    },
}

impl ActiveCommand {
    pub fn kind(&self) -> CommandKind {
        match self {
            ActiveCommand::Turn { side: Side::Left, .. } => CommandKind::TurnLeft,
            ActiveCommand::Turn { side: Side::Right, .. } => CommandKind::TurnRight,
            ActiveCommand::Decelerate { .. } => CommandKind::Decelerate,
        }
    }

    pub fn time_remaining(&self) -> f64 {
        match *self {
            ActiveCommand::Turn { remaining, .. } | ActiveCommand::Decelerate { remaining, .. } => remaining,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    /// Meters.
    pub position: [f64; 2],
    /// Degrees in `[0, 360)`.
    pub heading: f64,
    /// m/s.
    pub speed: f64,
    /// Speed this individual walks at when unstimulated.
    pub cruise_speed: f64,
    pub active: Option<ActiveCommand>,
}

pub fn normalize_heading(deg: f64) -> f64 {
    let h = deg.rem_euclid(360.0);
    // rem_euclid can return 360.0 for tiny negative inputs.
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

/// Signed heading change from `from` to `to`, in `(-180, 180]`.
pub fn heading_delta(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

impl AgentState {
    /// New agent walking at an individual cruise speed drawn from the walk
    /// speed distribution, limited to `[0.25, 2] x walk_speed_mean`.
    pub fn spawn<R: Rng + ?Sized>(params: &AgentParams, position: [f64; 2], heading: f64, rng: &mut R) -> Self {
        let mean = params.walk_speed_mean;
        let cruise = if params.walk_speed_sd > 0.0 {
            let n = Normal::new(mean, params.walk_speed_sd).expect("finite sd");
            n.sample(rng).clamp(0.25 * mean, 2.0 * mean)
        } else {
            mean
        };
        Self { position, heading: normalize_heading(heading), speed: cruise, cruise_speed: cruise, active: None }
    }

    /// Start a stimulus, replacing any command still running.
    pub fn issue<R: Rng + ?Sized>(
        &self,
        cmd: StimCommand,
        params: &AgentParams,
        rng: &mut R,
    ) -> Result<AgentState, LocomotionError> {
        if !(cmd.duration > 0.0) {
            return Err(LocomotionError::InvalidDuration(cmd.duration));
        }
        let active = match cmd.kind {
            CommandKind::TurnLeft | CommandKind::TurnRight => {
                let side = if cmd.kind == CommandKind::TurnLeft { Side::Left } else { Side::Right };
                ActiveCommand::Turn {
                    side,
                    target: sample_turn(params, side, rng).abs(),
                    turned: 0.0,
                    remaining: cmd.duration,
                }
            }
            CommandKind::Decelerate => ActiveCommand::Decelerate {
                start_speed: self.speed,
                target_speed: sample_decel(params, rng).min(self.speed),
                elapsed: 0.0,
                remaining: cmd.duration,
            },
        };
        Ok(AgentState { active: Some(active), ..*self })
    }
}

/// Signed turn angle, left positive, magnitude within `[0, 180]`.
pub fn sample_turn<R: Rng + ?Sized>(params: &AgentParams, side: Side, rng: &mut R) -> f64 {
    let mean = match side {
        Side::Left => params.mean_turn_left,
        Side::Right => params.mean_turn_right,
    };
    let angle = if params.sd_turn > 0.0 {
        Normal::new(mean, params.sd_turn).expect("finite sd").sample(rng)
    } else {
        mean
    };
    side.sign() * angle.clamp(0.0, 180.0)
}

/// Minimum speed reached during a deceleration, within `[0, walk_speed_mean)`.
pub fn sample_decel<R: Rng + ?Sized>(params: &AgentParams, rng: &mut R) -> f64 {
    let mean = params.decel_min_speed_mean;
    let v = if params.decel_min_speed_sd > 0.0 {
        Normal::new(mean, params.decel_min_speed_sd).expect("finite sd").sample(rng)
    } else {
        mean
    };
    let ceiling = params.walk_speed_mean * (1.0 - f64::EPSILON);
    v.clamp(0.0, ceiling)
}

/// Advance one agent by `dt` seconds (explicit Euler).
pub fn step<R: Rng + ?Sized>(
    state: &AgentState,
    params: &AgentParams,
    dt: f64,
    rng: &mut R,
) -> Result<AgentState, LocomotionError> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(LocomotionError::InvalidStep(dt));
    }
    let mut next = *state;
    let recovery = 1.0 - (-dt / params.recovery_tau).exp();
    let mut diffuse = true;

    match state.active {
        Some(ActiveCommand::Turn { side, target, turned, remaining }) => {
            diffuse = false;
            let delta = (params.max_ang_speed(side) * dt).min(target - turned).max(0.0);
            next.heading = state.heading + side.sign() * delta;
            next.speed += (state.cruise_speed - state.speed) * recovery;
            let remaining = remaining - dt;
            next.active = (remaining > EXPIRY_EPS).then_some(ActiveCommand::Turn {
                side,
                target,
                turned: turned + delta,
                remaining,
            });
        }
        Some(ActiveCommand::Decelerate { start_speed, target_speed, elapsed, remaining }) => {
            let elapsed = elapsed + dt;
            let frac = (elapsed / params.decel_time).min(1.0);
            next.speed = start_speed + (target_speed - start_speed) * frac;
            let remaining = remaining - dt;
            next.active = (remaining > EXPIRY_EPS).then_some(ActiveCommand::Decelerate {
                start_speed,
                target_speed,
                elapsed,
                remaining,
            });
        }
        None => {
            next.speed += (state.cruise_speed - state.speed) * recovery;
        }
    }

    if diffuse && params.heading_diffusion > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        next.heading += z * (params.heading_diffusion * dt).sqrt();
    }
    next.heading = normalize_heading(next.heading);
    next.speed = next.speed.max(0.0);

    let (sin, cos) = next.heading.to_radians().sin_cos();
    next.position = [
        state.position[0] + next.speed * cos * dt,
        state.position[1] + next.speed * sin * dt,
    ];
    Ok(next)
}

/// Speed in body lengths per second.
pub fn body_lengths_per_second(speed: f64, params: &AgentParams) -> Result<f64, LocomotionError> {
    if !(params.body_length > 0.0) {
        return Err(LocomotionError::InvalidParams("body_length must be > 0"));
    }
    Ok(speed / params.body_length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn run(state: AgentState, params: &AgentParams, secs: f64, dt: f64, seed: u64) -> Vec<AgentState> {
        let mut rng = seeded(seed);
        let n = (secs / dt).round() as usize;
        let mut out = vec![state];
        for _ in 0..n {
            let s = step(out.last().unwrap(), params, dt, &mut rng).unwrap();
            out.push(s);
        }
        out
    }

    #[test]
    fn presets_validate_and_carry_measured_means() {
        let m = AgentParams::manual();
        let a = AgentParams::auto();
        m.validate().unwrap();
        a.validate().unwrap();
        assert_eq!(AgentParams::preset("auto").unwrap(), a);
        assert!(matches!(AgentParams::preset("x"), Err(LocomotionError::UnknownPreset(_))));
        let mut rng = seeded(0);
        assert_eq!(sample_turn(&a.deterministic(), Side::Left, &mut rng), 70.9);
        assert_eq!(sample_turn(&m.deterministic(), Side::Right, &mut rng), -82.6);
        assert_eq!(sample_decel(&m.deterministic(), &mut rng), 0.015);
        assert_eq!(sample_decel(&a.deterministic(), &mut rng), 0.020);
    }

    #[test]
    fn turn_samples_follow_configured_mean() {
        let p = AgentParams::auto();
        let mut rng = seeded(9);
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| sample_turn(&p, Side::Left, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 70.9).abs() < 0.5, "{mean}");
    }

    #[test]
    fn decel_samples_stay_below_walk_speed() {
        let p = AgentParams { decel_min_speed_sd: 0.2, ..AgentParams::manual() };
        let mut rng = seeded(1);
        for _ in 0..5000 {
            let v = sample_decel(&p, &mut rng);
            assert!((0.0..p.walk_speed_mean).contains(&v));
        }
    }

    #[test]
    fn free_walk_is_a_straight_line() {
        let p = AgentParams::auto().deterministic();
        let mut rng = seeded(0);
        let s0 = AgentState::spawn(&p, [0.0, 0.0], 30.0, &mut rng);
        let s1 = step(&s0, &p, 0.01, &mut rng).unwrap();
        let d = ((s1.position[0]).powi(2) + (s1.position[1]).powi(2)).sqrt();
        assert!((d - 0.063 * 0.01).abs() < 1e-15);
        assert_eq!(s1.heading, 30.0);
    }

    #[test]
    fn left_turn_reaches_target_under_rate_cap() {
        let p = AgentParams::auto().deterministic();
        let mut rng = seeded(0);
        let s0 = AgentState::spawn(&p, [0.0, 0.0], 350.0, &mut rng)
            .issue(StimCommand::new(CommandKind::TurnLeft), &p, &mut rng)
            .unwrap();
        let states = run(s0, &p, 0.4, 0.01, 0);
        let total = heading_delta(350.0, states.last().unwrap().heading);
        assert!((total - 70.9).abs() < 1e-9, "{total}");
        for w in states.windows(2) {
            let rate = heading_delta(w[0].heading, w[1].heading).abs() / 0.01;
            assert!(rate <= 240.0 + 1e-9);
        }
        assert!(states.last().unwrap().active.is_none());
    }

    #[test]
    fn rate_cap_limits_large_turns() {
        let p = AgentParams { mean_turn_right: 170.0, ..AgentParams::auto().deterministic() };
        let mut rng = seeded(0);
        let s0 = AgentState::spawn(&p, [0.0, 0.0], 0.0, &mut rng)
            .issue(StimCommand::new(CommandKind::TurnRight), &p, &mut rng)
            .unwrap();
        let states = run(s0, &p, 1.0, 0.01, 0);
        let total = heading_delta(0.0, states.last().unwrap().heading);
        assert!((total + 273.5 * 0.4).abs() < 1e-6, "{total}");
    }

    #[test]
    fn deceleration_profile() {
        let p = AgentParams::manual().deterministic();
        let mut rng = seeded(0);
        let s0 = AgentState::spawn(&p, [0.0, 0.0], 0.0, &mut rng)
            .issue(StimCommand::new(CommandKind::Decelerate), &p, &mut rng)
            .unwrap();
        let states = run(s0, &p, 3.0, 0.01, 0);
        assert!((states[33].speed - 0.015).abs() < 1e-12);
        assert!((states[16].speed - (0.062 + (0.015 - 0.062) * 0.16 / 0.33)).abs() < 1e-12);
        assert!((states[40].speed - 0.015).abs() < 1e-12);
        // One recovery time constant after the stimulus ends.
        let expected = 0.062 + (0.015 - 0.062) * (-1.0f64).exp();
        assert!((states[140].speed - expected).abs() < 1e-9);
        assert!(states.iter().all(|s| s.speed >= 0.0 && (0.0..360.0).contains(&s.heading)));
    }

    #[test]
    fn step_rejects_bad_dt() {
        let p = AgentParams::auto();
        let mut rng = seeded(0);
        let s = AgentState::spawn(&p, [0.0, 0.0], 0.0, &mut rng);
        assert!(step(&s, &p, 0.0, &mut rng).is_err());
        assert!(step(&s, &p, 0.051, &mut rng).is_err());
        assert!(step(&s, &p, 0.05, &mut rng).is_ok());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let p = AgentParams::auto();
        let s0 = AgentState::spawn(&p, [1.0, 1.0], 45.0, &mut seeded(3));
        assert_eq!(run(s0, &p, 5.0, 0.01, 8), run(s0, &p, 5.0, 0.01, 8));
    }

    #[test]
    fn body_length_rates() {
        let p = AgentParams::manual();
        assert!((body_lengths_per_second(0.062, &p).unwrap() - 1.127_272_7).abs() < 1e-6);
        assert!((body_lengths_per_second(0.015, &p).unwrap() - 0.272_727_3).abs() < 1e-6);
        assert_eq!(body_lengths_per_second(0.0, &p).unwrap(), 0.0);
        let bad = AgentParams { body_length: 0.0, ..p };
        assert!(body_lengths_per_second(0.01, &bad).is_err());
    }

    #[test]
    fn heading_helpers() {
        assert_eq!(normalize_heading(-10.0), 350.0);
        assert_eq!(normalize_heading(720.0), 0.0);
        assert_eq!(normalize_heading(-1e-20), 0.0);
        assert_eq!(heading_delta(350.0, 10.0), 20.0);
        assert_eq!(heading_delta(10.0, 350.0), -20.0);
    }
}

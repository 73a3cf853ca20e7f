use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{multilaterate, simulate_ranges, Arena, CoverageGrid, SwarmError, UwbSystem, DEFAULT_CELL_SIZE};
use crate::locomotion::{
    normalize_heading, step, AgentParams, AgentState, CommandKind, StimCommand, DEFAULT_DT, DEFAULT_STIM_DURATION,
};
use crate::rng;

/// Which positions feed the coverage grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageSource {
    /// Every integration step, from ground truth.
    #[default]
    True,
    /// At the UWB update rate, from the multilaterated estimate.
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmConfig {
    pub arena: Arena,
    pub uwb: UwbSystem,
    /// One entry per robot.
    pub agents: Vec<AgentParams>,
    /// Seconds between random stimuli.
    pub stim_period: f64,
    pub stim_duration: f64,
    pub duration: f64,
    pub dt: f64,
    /// UWB update and logging rate, Hz.
    pub log_rate_hz: f64,
    pub cell_size: f64,
    pub coverage_source: CoverageSource,
    pub seed: u64,
}

impl Default for SwarmConfig {
    /// Four automatically assembled robots for 10 min 31 s.
    fn default() -> Self {
        Self::with_seed(0)
    }
}

impl SwarmConfig {
    pub fn with_seed(seed: u64) -> Self {
        let arena = Arena::random(seed);
        let uwb = UwbSystem::around(&arena);
        Self {
            arena,
            uwb,
            agents: vec![AgentParams::auto(); 4],
            stim_period: 10.0,
            stim_duration: DEFAULT_STIM_DURATION,
            duration: 631.0,
            dt: DEFAULT_DT,
            log_rate_hz: 10.0,
            cell_size: DEFAULT_CELL_SIZE,
            coverage_source: CoverageSource::True,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SwarmError> {
        let bad = |m: &str| Err(SwarmError::InvalidConfig(m.to_string()));
        if !(self.duration > 0.0) {
            return bad("duration must be > 0");
        }
        if !(self.stim_period > 0.0 && self.stim_duration > 0.0) {
            return bad("stim_period and stim_duration must be > 0");
        }
        if !(self.log_rate_hz > 0.0 && self.cell_size > 0.0) {
            return bad("log_rate_hz and cell_size must be > 0");
        }
        if self.agents.is_empty() {
            return bad("at least one agent is required");
        }
        for a in &self.agents {
            a.validate()?;
        }
        self.uwb.validate()?;
        self.arena.validate(self.cell_size)?;
        self.arena.validate_release(self.agents.len(), self.cell_size)?;
        if !(self.dt > 0.0 && self.dt <= crate::locomotion::MAX_DT) {
            return bad("dt must be in (0, 0.05]");
        }
        Ok(())
    }

    fn steps_per(&self, period: f64) -> usize {
        ((period / self.dt).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t_s: f64,
    pub agent_id: usize,
    pub true_pos: [f64; 2],
    pub est_pos: [f64; 2],
    /// Active stimulus, if any.
    pub command: Option<CommandKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    pub t_s: f64,
    /// Percent per agent.
    pub agents: Vec<f64>,
    pub union: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentSummary {
    pub agent_id: usize,
    pub final_coverage_percent: f64,
    pub path_length_m: f64,
    pub mean_speed_m_s: f64,
    pub stimuli: usize,
    /// RMS distance between logged true and estimated positions.
    pub localization_rmse_m: f64,
    pub unconverged_fixes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmRun {
    pub config: SwarmConfig,
    pub trajectory: Vec<TrajectoryRow>,
    pub coverage: Vec<CoverageRow>,
    pub agent_grids: Vec<CoverageGrid>,
    pub union_grid: CoverageGrid,
    pub agents: Vec<AgentSummary>,
    /// Simulated seconds.
    pub elapsed: f64,
}

impl SwarmRun {
    pub fn final_union_percent(&self) -> f64 {
        self.union_grid.percent()
    }

    /// CSV: `t_s,agent_id,x_true_m,y_true_m,x_est_m,y_est_m,command`.
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("t_s,agent_id,x_true_m,y_true_m,x_est_m,y_est_m,command\n");
        for r in &self.trajectory {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.t_s,
                r.agent_id,
                r.true_pos[0],
                r.true_pos[1],
                r.est_pos[0],
                r.est_pos[1],
                r.command.map_or("none", CommandKind::name)
            ));
        }
        out
    }

    /// CSV: `t_s,agent0..agentN,union`, all in percent.
    pub fn coverage_csv(&self) -> String {
        let mut out = String::from("t_s");
        for i in 0..self.config.agents.len() {
            out.push_str(&format!(",agent{i}"));
        }
        out.push_str(",union\n");
        for r in &self.coverage {
            out.push_str(&r.t_s.to_string());
            for a in &r.agents {
                out.push_str(&format!(",{a}"));
            }
            out.push_str(&format!(",{}\n", r.union));
        }
        out
    }
}

/// Covered area per second, cm^2/s.
pub fn coverage_rate_for(cells: usize, cell_size: f64, seconds: f64) -> f64 {
    let cell_cm2 = (cell_size * 100.0).powi(2);
    cells as f64 * cell_cm2 / seconds
}

/// Union coverage rate of a run over its simulated duration, cm^2/s.
pub fn coverage_rate(run: &SwarmRun) -> f64 {
    coverage_rate_for(run.union_grid.visited_count(), run.union_grid.cell_size(), run.elapsed)
}

/// Move from `prev` to `next`, reflecting specularly off walls and obstacle
/// faces. If a reflection still lands in a blocked spot the agent stays put
/// and turns around.
fn resolve_contacts(prev: &AgentState, mut next: AgentState, arena: &Arena) -> AgentState {
    let [mut x, mut y] = next.position;
    let mut heading = next.heading;
    if x < 0.0 {
        x = -x;
        heading = 180.0 - heading;
    } else if x > arena.width {
        x = 2.0 * arena.width - x;
        heading = 180.0 - heading;
    }
    if y < 0.0 {
        y = -y;
        heading = -heading;
    } else if y > arena.height {
        y = 2.0 * arena.height - y;
        heading = -heading;
    }
    let [px, py] = prev.position;
    for o in &arena.obstacles {
        if !o.contains([x, y]) {
            continue;
        }
        if px <= o.x_min {
            x = 2.0 * o.x_min - x;
            heading = 180.0 - heading;
        } else if px >= o.x_max {
            x = 2.0 * o.x_max - x;
            heading = 180.0 - heading;
        } else if py <= o.y_min {
            y = 2.0 * o.y_min - y;
            heading = -heading;
        } else {
            y = 2.0 * o.y_max - y;
            heading = -heading;
        }
    }
    if arena.is_free([x, y]) {
        next.position = [x, y];
        next.heading = normalize_heading(heading);
    } else {
        next.position = prev.position;
        next.heading = normalize_heading(next.heading + 180.0);
    }
    next
}

struct Agent {
    params: AgentParams,
    state: AgentState,
    motion_rng: rng::SimRng,
    stim_rng: rng::SimRng,
    uwb_rng: rng::SimRng,
    grid: CoverageGrid,
    path: f64,
    stimuli: usize,
    sq_err: f64,
    fixes: usize,
    unconverged: usize,
}

/// Run one dispersion mission. Deterministic for a given config.
pub fn simulate(cfg: &SwarmConfig) -> Result<SwarmRun, SwarmError> {
    cfg.validate()?;
    let arena = &cfg.arena;
    let release = arena.release_points(cfg.agents.len(), cfg.cell_size);
    let fresh_grid = CoverageGrid::new(arena.width, arena.height, cfg.cell_size);

    let mut agents: Vec<Agent> = cfg
        .agents
        .iter()
        .enumerate()
        .map(|(i, params)| {
            let i = i as u64;
            let mut motion_rng = rng::child_rng(cfg.seed, "agent-motion", i);
            // Released facing into the arena, within 45 degrees of the diagonal.
            let heading = arena.release_heading() + motion_rng.random_range(-45.0..=45.0);
            let start = release[i as usize];
            let state = AgentState::spawn(params, start, heading, &mut motion_rng);
            let mut grid = fresh_grid.clone();
            grid.mark(start);
            Agent {
                params: *params,
                state,
                motion_rng,
                stim_rng: rng::child_rng(cfg.seed, "agent-stim", i),
                uwb_rng: rng::child_rng(cfg.seed, "agent-uwb", i),
                grid,
                path: 0.0,
                stimuli: 0,
                sq_err: 0.0,
                fixes: 0,
                unconverged: 0,
            }
        })
        .collect();

    let steps = (cfg.duration / cfg.dt).round() as usize;
    let log_every = cfg.steps_per(1.0 / cfg.log_rate_hz);
    let stim_every = cfg.steps_per(cfg.stim_period);
    let mut union = fresh_grid.clone();
    for &p in &release {
        union.mark(p);
    }

    let mut trajectory = Vec::new();
    let mut coverage = Vec::new();
    let mut log = |t_s: f64, agents: &mut [Agent], union: &mut CoverageGrid| -> Result<(), SwarmError> {
        for (id, a) in agents.iter_mut().enumerate() {
            let ranges = simulate_ranges(a.state.position, &cfg.uwb, &mut a.uwb_rng);
            let fix = multilaterate(&ranges, &cfg.uwb, None)?;
            let [tx, ty] = a.state.position;
            a.sq_err += (fix.position[0] - tx).powi(2) + (fix.position[1] - ty).powi(2);
            a.fixes += 1;
            a.unconverged += usize::from(!fix.converged);
            if cfg.coverage_source == CoverageSource::Estimated {
                a.grid.mark(fix.position);
                union.mark(fix.position);
            }
            trajectory.push(TrajectoryRow {
                t_s,
                agent_id: id,
                true_pos: a.state.position,
                est_pos: fix.position,
                command: a.state.active.map(|c| c.kind()),
            });
        }
        coverage.push(CoverageRow {
            t_s,
            agents: agents.iter().map(|a| a.grid.percent()).collect(),
            union: union.percent(),
        });
        Ok(())
    };

    log(0.0, &mut agents, &mut union)?;
    for k in 1..=steps {
        for a in agents.iter_mut() {
            let moved = step(&a.state, &a.params, cfg.dt, &mut a.motion_rng)?;
            let next = resolve_contacts(&a.state, moved, arena);
            a.path += (next.position[0] - a.state.position[0]).hypot(next.position[1] - a.state.position[1]);
            a.state = next;
            if cfg.coverage_source == CoverageSource::True {
                a.grid.mark(a.state.position);
                union.mark(a.state.position);
            }
            if k % stim_every == 0 {
                let kind = CommandKind::ALL[a.stim_rng.random_range(0..CommandKind::ALL.len())];
                let cmd = StimCommand { kind, duration: cfg.stim_duration };
                a.state = a.state.issue(cmd, &a.params, &mut a.motion_rng)?;
                a.stimuli += 1;
            }
        }
        if k % log_every == 0 {
            let t_s = (k / log_every) as f64 / cfg.log_rate_hz;
            log(t_s, &mut agents, &mut union)?;
        }
    }
    if !steps.is_multiple_of(log_every) {
        log(steps as f64 * cfg.dt, &mut agents, &mut union)?;
    }

    let elapsed = if steps == 0 { cfg.duration } else { steps as f64 * cfg.dt };
    let summaries = agents
        .iter()
        .enumerate()
        .map(|(id, a)| AgentSummary {
            agent_id: id,
            final_coverage_percent: a.grid.percent(),
            path_length_m: a.path,
            mean_speed_m_s: a.path / elapsed,
            stimuli: a.stimuli,
            localization_rmse_m: (a.sq_err / a.fixes as f64).sqrt(),
            unconverged_fixes: a.unconverged,
        })
        .collect();

    Ok(SwarmRun {
        config: cfg.clone(),
        trajectory,
        coverage,
        agent_grids: agents.into_iter().map(|a| a.grid).collect(),
        union_grid: union,
        agents: summaries,
        elapsed,
    })
}

/// Run the same mission under several seeds in parallel. Each seed gets its
/// own arena layout unless `keep_arena` is set.
pub fn simulate_batch(base: &SwarmConfig, seeds: &[u64], keep_arena: bool) -> Result<Vec<SwarmRun>, SwarmError> {
    seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = base.clone();
            cfg.seed = seed;
            if !keep_arena {
                cfg.arena = Arena { release_corner: base.arena.release_corner, ..Arena::random(seed) };
            }
            simulate(&cfg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swarm::Rect;

    fn open_config(seed: u64) -> SwarmConfig {
        let arena = Arena::empty(2.0, 2.0);
        SwarmConfig { uwb: UwbSystem::around(&arena), arena, ..SwarmConfig::with_seed(seed) }
    }

    #[test]
    fn tiny_duration_covers_only_release_cells() {
        let cfg = SwarmConfig { duration: 0.001, ..SwarmConfig::with_seed(1) };
        let run = simulate(&cfg).unwrap();
        assert_eq!(run.union_grid.visited_count(), 4);
        assert_eq!(run.final_union_percent(), 1.0);
        assert!(run.agents.iter().all(|a| a.final_coverage_percent == 0.25));
        assert!((coverage_rate(&run) - 400.0 / 0.001).abs() < 1e-6);
    }

    #[test]
    fn wall_reflection_mirrors_heading() {
        let arena = Arena::empty(2.0, 2.0);
        let prev = AgentState { position: [1.999, 1.0], heading: 10.0, speed: 0.1, cruise_speed: 0.1, active: None };
        let next = AgentState { position: [2.001, 1.01], ..prev };
        let r = resolve_contacts(&prev, next, &arena);
        assert!((r.position[0] - 1.999).abs() < 1e-12);
        assert_eq!(r.heading, 170.0);
    }

    #[test]
    fn obstacle_reflection_uses_crossed_face() {
        let mut arena = Arena::empty(2.0, 2.0);
        arena.obstacles.push(Rect::new(1.0, 1.0, 1.5, 1.5));
        let prev = AgentState { position: [1.2, 0.999], heading: 80.0, speed: 0.1, cruise_speed: 0.1, active: None };
        let next = AgentState { position: [1.2, 1.002], ..prev };
        let r = resolve_contacts(&prev, next, &arena);
        assert!((r.position[1] - 0.998).abs() < 1e-12);
        assert_eq!(r.heading, 280.0);
    }

    #[test]
    fn deterministic_logs_and_invariants() {
        let cfg = SwarmConfig { duration: 60.0, ..SwarmConfig::with_seed(5) };
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.trajectory_csv(), b.trajectory_csv());
        assert_eq!(a.coverage_csv(), b.coverage_csv());
        assert_eq!(a.coverage.len(), 601);
        for w in a.coverage.windows(2) {
            assert!(w[1].t_s > w[0].t_s);
            assert!(w[1].union >= w[0].union);
            for (x, y) in w[0].agents.iter().zip(&w[1].agents) {
                assert!(y >= x);
            }
        }
        for row in &a.coverage {
            assert!(row.agents.iter().all(|&p| p < row.union));
        }
        for r in &a.trajectory {
            assert!(cfg.arena.is_free(r.true_pos));
        }
        assert!(a.agents.iter().all(|s| s.stimuli == 6));
    }

    #[test]
    fn straight_walk_matches_line_cells() {
        let params = AgentParams::auto().deterministic();
        let cfg = SwarmConfig {
            agents: vec![params],
            stim_period: 1e6,
            duration: 20.0,
            ..open_config(2)
        };
        let run = simulate(&cfg).unwrap();
        let first = &run.trajectory[0];
        let last = run.trajectory.last().unwrap();
        // Heading never changes, so the path is the segment first -> last.
        let (dx, dy) = (last.true_pos[0] - first.true_pos[0], last.true_pos[1] - first.true_pos[1]);
        assert!((dx.hypot(dy) - 0.063 * 20.0).abs() < 1e-9);
        let mut expected = CoverageGrid::default_arena();
        let n = 100_000;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            expected.mark([first.true_pos[0] + t * dx, first.true_pos[1] + t * dy]);
        }
        assert_eq!(run.union_grid, expected);
    }

    #[test]
    fn zero_noise_tracking_is_exact() {
        let mut cfg = SwarmConfig { duration: 30.0, ..SwarmConfig::with_seed(3) };
        cfg.uwb.range_noise_sd = 0.0;
        let run = simulate(&cfg).unwrap();
        for r in &run.trajectory {
            let err = (r.true_pos[0] - r.est_pos[0]).hypot(r.true_pos[1] - r.est_pos[1]);
            assert!(err < 1e-6, "{err}");
        }
    }

    #[test]
    fn estimated_source_still_monotone() {
        let cfg = SwarmConfig {
            duration: 30.0,
            coverage_source: CoverageSource::Estimated,
            ..SwarmConfig::with_seed(4)
        };
        let run = simulate(&cfg).unwrap();
        for w in run.coverage.windows(2) {
            assert!(w[1].union >= w[0].union);
        }
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = SwarmConfig::with_seed(1);
        cfg.arena.obstacles.push(Rect::new(0.0, 0.0, 0.3, 0.3));
        assert!(matches!(simulate(&cfg), Err(SwarmError::InvalidArena(_))));
        let cfg = SwarmConfig { duration: 0.0, ..SwarmConfig::with_seed(1) };
        assert!(simulate(&cfg).is_err());
        let cfg = SwarmConfig { agents: vec![], ..SwarmConfig::with_seed(1) };
        assert!(simulate(&cfg).is_err());
    }

    #[test]
    fn rate_anchor() {
        assert!((coverage_rate_for(321, 0.1, 631.0) - 50.871_632).abs() < 1e-5);
    }
}

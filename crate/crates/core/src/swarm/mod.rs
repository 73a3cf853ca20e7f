//! Multi-robot dispersion over an obstructed arena.
//!
//! Robots are released together from one corner and stimulated at random
//! every few seconds. The arena is split into square cells; a cell counts
//! as covered once any robot has been inside it. Positions are also
//! estimated from simulated UWB ranges, as the tracking system would.

mod arena;
mod coverage;
mod sim;
mod uwb;

pub use arena::{Arena, Corner, Rect};
pub use coverage::{coverage_percent, update_coverage, CoverageGrid, DEFAULT_CELL_SIZE};
pub use sim::{
    coverage_rate, coverage_rate_for, simulate, simulate_batch, AgentSummary, CoverageRow, CoverageSource,
    SwarmConfig, SwarmRun, TrajectoryRow,
};
pub use uwb::{multilaterate, simulate_ranges, Fix, UwbSystem, MAX_ITERATIONS, STEP_TOLERANCE};

use thiserror::Error;

use crate::locomotion::LocomotionError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwarmError {
    #[error("invalid arena: {0}")]
    InvalidArena(String),
    #[error("invalid swarm configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least 3 finite ranges matching the anchors, got {ranges} ranges for {anchors} anchors")]
    TooFewRanges { ranges: usize, anchors: usize },
    #[error(transparent)]
    Locomotion(#[from] LocomotionError),
}

//! Implantation planning and the seven-step assembly sequence.
//!
//! The gripper approaches the exposed membrane at a single pitch angle.
//! Below `alpha_lower` the backpack hits the fixation structure, above
//! `alpha_upper` its branches touch the insect's dorsal cuticle, so the
//! planner aims for the middle of that corridor.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morphology::{exposure_sufficient, FixationRig, InsectMorphology, MorphologyError};
use crate::vision::ReferencePoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("infeasible pitch corridor: lower {lower} deg >= upper {upper} deg")]
    InfeasibleCorridor { lower: f64, upper: f64 },
    #[error("illegal transition from {state}: expected {expected}, received {received}")]
    IllegalTransition {
        state: AssemblyState,
        expected: ExpectedStep,
        received: AssemblyStep,
    },
    #[error("membrane exposure insufficient: lift {lift} m does not clear electrode thickness {thickness} m")]
    InsufficientExposure { lift: f64, thickness: f64 },
    #[error("batch size must be at least 1")]
    EmptyBatch,
    #[error(transparent)]
    Morphology(#[from] MorphologyError),
}

/// The next step a process accepts, or none once retracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpectedStep(pub Option<AssemblyStep>);

impl fmt::Display for ExpectedStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(step) => write!(f, "{step}"),
            None => f.write_str("nothing (sequence complete)"),
        }
    }
}

/// Measured collision thresholds of the pitch corridor, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PitchThresholds {
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    /// Spread of `alpha_lower` across individuals.
    pub alpha_lower_sd: f64,
    pub alpha_upper_sd: f64,
}

impl Default for PitchThresholds {
    fn default() -> Self {
        Self { alpha_lower: 157.8, alpha_upper: 167.5, alpha_lower_sd: 1.5, alpha_upper_sd: 2.2 }
    }
}

impl PitchThresholds {
    /// Draw one individual's thresholds from the measured spreads.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let lower = Normal::new(self.alpha_lower, self.alpha_lower_sd).expect("finite sd");
        let upper = Normal::new(self.alpha_upper, self.alpha_upper_sd).expect("finite sd");
        (lower.sample(rng), upper.sample(rng))
    }
}

/// Midpoint of the collision-free pitch corridor.
pub fn solve_pitch(alpha_lower: f64, alpha_upper: f64) -> Result<f64, AssemblyError> {
    if !(alpha_lower < alpha_upper) {
        return Err(AssemblyError::InfeasibleCorridor { lower: alpha_lower, upper: alpha_upper });
    }
    Ok(0.5 * (alpha_lower + alpha_upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImplantPose {
    /// `p_R` in the arm base frame, meters.
    pub reference_point_xyz: [f64; 3],
    pub pitch_alpha: f64,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
}

/// Arm payload and camera reach. Masses in kg, lengths in m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PayloadSpec {
    pub gripper_mass: f64,
    pub camera_mass: f64,
    pub backpack_mass: f64,
    pub arm_payload_limit: f64,
    pub arm_reach: f64,
    pub camera_min_depth: f64,
}

impl Default for PayloadSpec {
    fn default() -> Self {
        Self {
            gripper_mass: 1.0,
            camera_mass: 0.075,
            backpack_mass: 0.0023,
            arm_payload_limit: 3.0,
            arm_reach: 0.5,
            camera_min_depth: 0.28,
        }
    }
}

impl PayloadSpec {
    pub fn total_mass(&self) -> f64 {
        self.gripper_mass + self.camera_mass + self.backpack_mass
    }
}

pub fn check_payload(spec: &PayloadSpec) -> bool {
    spec.total_mass() <= spec.arm_payload_limit && spec.camera_min_depth < spec.arm_reach
}

/// Free box between the insect and the fixation structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Workspace {
    pub box_dimensions: [f64; 3],
    /// Box center in the arm base frame.
    pub center: [f64; 3],
}

impl Default for Workspace {
    fn default() -> Self {
        Self { box_dimensions: [0.065, 0.035, 0.025], center: [0.0; 3] }
    }
}

const CONTAINMENT_TOLERANCE: f64 = 1e-12;

/// Whether an axis-aligned approach envelope centered on the pose's
/// reference point fits inside the workspace box. Touching faces count as
/// inside.
pub fn check_workspace(pose: &ImplantPose, ws: &Workspace, approach_envelope: [f64; 3]) -> bool {
    (0..3).all(|i| {
        let offset = (pose.reference_point_xyz[i] - ws.center[i]).abs();
        offset + 0.5 * approach_envelope[i] <= 0.5 * ws.box_dimensions[i] + CONTAINMENT_TOLERANCE
    })
}

/// One assembly action, in the only order the line accepts them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyStep {
    Fix,
    Locate,
    Grasp,
    Implant,
    Press,
    Release,
    Retract,
}

impl AssemblyStep {
    pub const ALL: [AssemblyStep; 7] = [
        AssemblyStep::Fix,
        AssemblyStep::Locate,
        AssemblyStep::Grasp,
        AssemblyStep::Implant,
        AssemblyStep::Press,
        AssemblyStep::Release,
        AssemblyStep::Retract,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AssemblyStep::Fix => "fix",
            AssemblyStep::Locate => "locate",
            AssemblyStep::Grasp => "grasp",
            AssemblyStep::Implant => "implant",
            AssemblyStep::Press => "press",
            AssemblyStep::Release => "release",
            AssemblyStep::Retract => "retract",
        }
    }
}

impl fmt::Display for AssemblyStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssemblyState {
    Idle,
    Fixed,
    Located,
    Grasped,
    Implanted,
    Pressed,
    Released,
    Retracted,
}

impl AssemblyState {
    pub fn next_step(self) -> Option<AssemblyStep> {
        use AssemblyState::*;
        use AssemblyStep as S;
        match self {
            Idle => Some(S::Fix),
            Fixed => Some(S::Locate),
            Located => Some(S::Grasp),
            Grasped => Some(S::Implant),
            Implanted => Some(S::Press),
            Pressed => Some(S::Release),
            Released => Some(S::Retract),
            Retracted => None,
        }
    }

    fn after(step: AssemblyStep) -> Self {
        use AssemblyState::*;
        match step {
            AssemblyStep::Fix => Fixed,
            AssemblyStep::Locate => Located,
            AssemblyStep::Grasp => Grasped,
            AssemblyStep::Implant => Implanted,
            AssemblyStep::Press => Pressed,
            AssemblyStep::Release => Released,
            AssemblyStep::Retract => Retracted,
        }
    }
}

impl fmt::Display for AssemblyState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Seconds spent on each step. Only the 68 s total is measured; the split
/// is an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepDurations {
    pub fix: f64,
    pub locate: f64,
    pub grasp: f64,
    pub implant: f64,
    pub press: f64,
    pub release: f64,
    pub retract: f64,
}

impl Default for StepDurations {
    fn default() -> Self {
        Self { fix: 8.0, locate: 6.0, grasp: 12.0, implant: 16.0, press: 10.0, release: 6.0, retract: 10.0 }
    }
}

impl StepDurations {
    pub fn of(&self, step: AssemblyStep) -> f64 {
        match step {
            AssemblyStep::Fix => self.fix,
            AssemblyStep::Locate => self.locate,
            AssemblyStep::Grasp => self.grasp,
            AssemblyStep::Implant => self.implant,
            AssemblyStep::Press => self.press,
            AssemblyStep::Release => self.release,
            AssemblyStep::Retract => self.retract,
        }
    }

    pub fn total(&self) -> f64 {
        AssemblyStep::ALL.iter().map(|&s| self.of(s)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: AssemblyStep,
    pub t_start_s: f64,
    pub t_end_s: f64,
}

/// Assembly sequence as a value: every transition returns a new process.
#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyProcess {
    state: AssemblyState,
    elapsed: f64,
    durations: StepDurations,
    log: Vec<StepRecord>,
}

impl AssemblyProcess {
    pub fn new(durations: StepDurations) -> Self {
        Self { state: AssemblyState::Idle, elapsed: 0.0, durations, log: Vec::new() }
    }

    pub fn state(&self) -> AssemblyState {
        self.state
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn durations(&self) -> &StepDurations {
        &self.durations
    }

    pub fn log(&self) -> &[StepRecord] {
        &self.log
    }

    pub fn advance(&self, step: AssemblyStep) -> Result<AssemblyProcess, AssemblyError> {
        let expected = self.state.next_step();
        if expected != Some(step) {
            return Err(AssemblyError::IllegalTransition {
                state: self.state,
                expected: ExpectedStep(expected),
                received: step,
            });
        }
        let t_start_s = self.elapsed;
        let t_end_s = t_start_s + self.durations.of(step);
        let mut log = self.log.clone();
        log.push(StepRecord { step, t_start_s, t_end_s });
        Ok(AssemblyProcess { state: AssemblyState::after(step), elapsed: t_end_s, durations: self.durations, log })
    }

    /// Apply every remaining step in order.
    pub fn run_to_completion(&self) -> AssemblyProcess {
        let mut proc = self.clone();
        while let Some(step) = proc.state.next_step() {
            proc = proc.advance(step).expect("next_step is always legal");
        }
        proc
    }

    /// Event log as CSV: `step_name,t_start_s,t_end_s`.
    pub fn event_log_csv(&self) -> String {
        let mut out = String::from("step_name,t_start_s,t_end_s\n");
        for r in &self.log {
            out.push_str(&format!("{},{},{}\n", r.step, r.t_start_s, r.t_end_s));
        }
        out
    }
}

/// Pixel to arm-frame map: `xy = matrix * [col, row] + offset_xy`. The
/// reference point height is `platform_z` plus the pronotum thickness plus
/// the current lift, since the depth camera is not simulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Calibration {
    pub matrix: [[f64; 2]; 2],
    pub offset_xy: [f64; 2],
    pub platform_z: f64,
}

impl Default for Calibration {
    /// 0.1 mm pixels, axis-aligned with the arm frame.
    fn default() -> Self {
        Self { matrix: [[1e-4, 0.0], [0.0, 1e-4]], offset_xy: [0.25, 0.0], platform_z: 0.0 }
    }
}

impl Calibration {
    pub fn pixel_to_arm(&self, p: &ReferencePoint) -> [f64; 2] {
        let (u, v) = (p.x as f64, p.y as f64);
        [
            self.matrix[0][0] * u + self.matrix[0][1] * v + self.offset_xy[0],
            self.matrix[1][0] * u + self.matrix[1][1] * v + self.offset_xy[1],
        ]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanConfig {
    pub calibration: Calibration,
    pub thresholds: PitchThresholds,
    pub durations: StepDurations,
}

/// Plan the implantation pose for one fixed insect and start its process.
pub fn plan_assembly(
    morph: &InsectMorphology,
    p_r: &ReferencePoint,
    rig: &FixationRig,
    plan: &PlanConfig,
) -> Result<(ImplantPose, AssemblyProcess), AssemblyError> {
    let lift = rig.configured_lift()?;
    if !exposure_sufficient(rig, lift)?.sufficient {
        return Err(AssemblyError::InsufficientExposure { lift, thickness: rig.electrode_thickness });
    }
    let t = &plan.thresholds;
    let pitch_alpha = solve_pitch(t.alpha_lower, t.alpha_upper)?;
    let [x, y] = plan.calibration.pixel_to_arm(p_r);
    let z = plan.calibration.platform_z + morph.pronotum_thickness + lift;
    let pose = ImplantPose {
        reference_point_xyz: [x, y, z],
        pitch_alpha,
        alpha_lower: t.alpha_lower,
        alpha_upper: t.alpha_upper,
    };
    Ok((pose, AssemblyProcess::new(plan.durations)))
}

/// Default gap between consecutive insects, derived from the measured
/// 7 min 48 s for four robots.
pub const DEFAULT_HANDLING_GAP: f64 = 49.0;

/// Total line time for `n` insects with the default step durations.
pub fn batch_assemble(n: usize, handling_gap: f64) -> Result<f64, AssemblyError> {
    batch_assemble_with(n, handling_gap, &StepDurations::default())
}

pub fn batch_assemble_with(n: usize, handling_gap: f64, durations: &StepDurations) -> Result<f64, AssemblyError> {
    if n == 0 {
        return Err(AssemblyError::EmptyBatch);
    }
    Ok(n as f64 * (durations.total() + handling_gap))
}

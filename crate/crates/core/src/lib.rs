//! Desk-scale simulator for automatically assembled insect-computer hybrid
//! robots.
//!
//! The crate covers the whole pipeline from a fixed cockroach on the
//! assembly platform to a team of hybrid robots dispersing over an
//! obstructed arena:
//!
//! - [`morphology`]: body dimensions and the rod fixation rig that lifts the
//!   pronotum to expose the intersegmental membrane.
//! - [`vision`]: binary pronotum masks, the posterior reference point,
//!   segmentation metrics, augmentation and a synthetic mask generator.
//! - [`assembly`]: implantation pitch, payload and workspace checks, and the
//!   seven-step assembly state machine.
//! - [`neurosignal`]: stimulus waveforms, artifact blanking, Butterworth
//!   bandpass, robust spike threshold and detection, synthetic recordings.
//! - [`locomotion`]: stochastic kinematic response to steering and
//!   deceleration stimulation.
//! - [`swarm`]: multi-agent dispersion with UWB multilateration and coverage
//!   accounting.
//! - [`runner`]: config-driven experiment runner used by the `cyborg` binary.
//!
//! All lengths are SI meters, angles are degrees, times are seconds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod config;
pub mod io;
pub mod locomotion;
pub mod morphology;
pub mod neurosignal;
pub mod rng;
pub mod runner;
pub mod swarm;
pub mod vision;

//! gaitkit: gait analysis from skeletal keypoint streams.
//!
//! The library turns per-frame skeletal keypoints from a single-camera pose
//! estimator into clinically interpretable gait parameters:
//!
//! - [`ingest`] parses and serializes keypoint streams (line-delimited JSON
//!   and wide CSV), normalizes axis conventions, fills short gaps and
//!   smooths jitter;
//! - [`kinematics`] computes per-frame inversion/eversion, dorsiflexion/
//!   plantarflexion and total ankle angle from the shank and foot links;
//! - [`events`] detects heel strikes and toe offs and segments gait cycles;
//! - [`progression`] fits the per-cycle line of progression and derives the
//!   foot progression angle;
//! - [`sync`] aligns two recordings of the same walk via the jump protocol;
//! - [`validation`] compares an estimate stream against a time-aligned
//!   reference (error histograms, cycle-normalized error curves, box
//!   statistics);
//! - [`classify`] reduces a session to features and labels the walking
//!   pattern (normal, supination, pronation, limp);
//! - [`synth`] generates deterministic synthetic sessions with exact
//!   ground truth;
//! - [`pipeline`] wires everything into end-to-end analyze/validate runs
//!   and an incremental streaming session.

pub mod classify;
pub mod error;
pub mod events;
pub mod ingest;
pub mod kinematics;
pub mod pipeline;
pub mod progression;
pub mod series;
pub mod sync;
pub mod synth;
pub mod types;
pub mod validation;

pub use error::GaitError;
pub use types::{Dims, JointId, Point, Side, SkeletonFrame, SkeletonSequence};

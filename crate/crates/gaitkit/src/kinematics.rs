//! Per-frame link vectors and the three frame-wise gait angles:
//! inversion/eversion, dorsiflexion/plantarflexion and ankle angle.
//!
//! Angle conventions:
//! - "angle between a vector and a plane" is 90 deg minus the angle to the
//!   plane's normal, so a vector lying in the plane measures 0.
//! - inversion/eversion uses the horizontal plane (normal = up);
//!   dorsiflexion/plantarflexion uses the frontal plane (normal = walking
//!   direction); ankle angle is the direct foot/shank angle.
//! - inversion/eversion carries a sign from the medial component of the
//!   foot vector, mirrored per side so that inversion is positive for both
//!   feet.

use serde::{Deserialize, Serialize};

use crate::error::GaitError;
use crate::types::{dot, norm, sub, Dims, JointId, Point, Side, SkeletonFrame, SkeletonSequence};

/// Links shorter than this are treated as degenerate.
pub const MIN_LINK_NORM: f64 = 1e-6;

/// Shank and foot link vectors for one side of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkVectors {
    /// ankle - knee
    pub shank: Point,
    /// ankle - toe
    pub foot: Point,
    pub side: Side,
    pub frame_index: usize,
}

/// Compute the two link vectors of one side from a frame.
pub fn link_vectors(frame: &SkeletonFrame, side: Side) -> Result<LinkVectors, GaitError> {
    let knee = frame
        .position(JointId::knee(side))
        .ok_or(GaitError::MissingJoint(JointId::knee(side)))?;
    let ankle = frame
        .position(JointId::ankle(side))
        .ok_or(GaitError::MissingJoint(JointId::ankle(side)))?;
    let toe = frame
        .position(JointId::toe(side))
        .ok_or(GaitError::MissingJoint(JointId::toe(side)))?;
    let shank = sub(ankle, knee);
    let foot = sub(ankle, toe);
    if norm(shank) < MIN_LINK_NORM {
        return Err(GaitError::DegenerateGeometry(format!(
            "{side} shank link shorter than {MIN_LINK_NORM}"
        )));
    }
    if norm(foot) < MIN_LINK_NORM {
        return Err(GaitError::DegenerateGeometry(format!(
            "{side} foot link shorter than {MIN_LINK_NORM}"
        )));
    }
    Ok(LinkVectors { shank, foot, side, frame_index: frame.index })
}

/// Angle between two vectors in degrees, in [0, 180]. The cosine is clamped
/// to [-1, 1] before arccos.
pub fn angle_between(u: Point, v: Point) -> Result<f64, GaitError> {
    let nu = norm(u);
    let nv = norm(v);
    if nu < MIN_LINK_NORM || nv < MIN_LINK_NORM {
        return Err(GaitError::DegenerateGeometry("zero-length vector in angle".into()));
    }
    let c = (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(c.acos().to_degrees())
}

fn signum_nonzero(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Signed elevation of the foot vector out of the horizontal plane, in
/// degrees. Sign comes from the medial component of the foot vector
/// (positive = inversion for both sides).
pub fn inversion_eversion(link: &LinkVectors, up: Point) -> Result<f64, GaitError> {
    let elevation = 90.0 - angle_between(link.foot, up)?;
    // medial direction: -x for the left foot, +x for the right foot
    let medial = match link.side {
        Side::Left => -link.foot[0],
        Side::Right => link.foot[0],
    };
    Ok(elevation * signum_nonzero(medial))
}

/// Elevation of the foot vector out of the frontal plane (normal = walking
/// direction), in degrees.
pub fn dorsiflexion_plantarflexion(link: &LinkVectors, progression: Point) -> Result<f64, GaitError> {
    Ok(90.0 - angle_between(link.foot, progression)?)
}

/// Angle between foot and shank links, in degrees, in [0, 180].
pub fn ankle_angle(link: &LinkVectors) -> Result<f64, GaitError> {
    angle_between(link.foot, link.shank)
}

/// One frame's worth of angular parameters for one side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSample {
    pub frame_index: usize,
    pub t: f64,
    pub side: Side,
    pub inversion_eversion: f64,
    pub dorsiflexion_plantarflexion: f64,
    pub ankle: f64,
}

/// Per-frame, per-side angle samples for a whole sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSeries {
    pub samples: Vec<AngleSample>,
    pub dims: Dims,
    /// Frames skipped per side because a required joint was missing.
    pub skipped: [usize; 2],
}

impl AngleSeries {
    pub fn side(&self, side: Side) -> impl Iterator<Item = &AngleSample> {
        self.samples.iter().filter(move |s| s.side == side)
    }

    /// CSV form: "frame,t,side,inv_ev_deg,dorsi_plantar_deg,ankle_deg".
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,t,side,inv_ev_deg,dorsi_plantar_deg,ankle_deg\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.frame_index, s.t, s.side, s.inversion_eversion,
                s.dorsiflexion_plantarflexion, s.ankle
            ));
        }
        out
    }
}

/// Reference directions used by [`angle_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleConfig {
    /// Unit vertical, against gravity.
    pub up: Point,
    /// Unit walking direction (frontal-plane normal).
    pub progression: Point,
}

impl AngleConfig {
    pub fn canonical_3d() -> Self {
        AngleConfig { up: [0.0, 1.0, 0.0], progression: [0.0, 0.0, 1.0] }
    }

    /// 2D image-plane references: horizontal = image x axis.
    pub fn canonical_2d() -> Self {
        AngleConfig { up: [0.0, 1.0, 0.0], progression: [1.0, 0.0, 0.0] }
    }

    pub fn for_dims(dims: Dims) -> Self {
        match dims {
            Dims::Three => Self::canonical_3d(),
            Dims::Two => Self::canonical_2d(),
        }
    }
}

/// Compute all three angles per frame and side. Frames with missing or
/// degenerate joints are skipped, never fatal.
pub fn angle_series(seq: &SkeletonSequence, config: &AngleConfig) -> AngleSeries {
    let mut samples = Vec::new();
    let mut skipped = [0usize; 2];
    for frame in &seq.frames {
        for (k, side) in Side::BOTH.iter().enumerate() {
            let sample = link_vectors(frame, *side).and_then(|link| {
                Ok(AngleSample {
                    frame_index: frame.index,
                    t: frame.t,
                    side: *side,
                    inversion_eversion: inversion_eversion(&link, config.up)?,
                    dorsiflexion_plantarflexion: dorsiflexion_plantarflexion(
                        &link,
                        config.progression,
                    )?,
                    ankle: ankle_angle(&link)?,
                })
            });
            match sample {
                Ok(s) => samples.push(s),
                Err(_) => skipped[k] += 1,
            }
        }
    }
    AngleSeries { samples, dims: seq.dims, skipped }
}

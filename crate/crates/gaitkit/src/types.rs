//! Core value types shared by every stage of the pipeline: joints, frames,
//! sequences and the axis convention they are expressed in.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::GaitError;

/// Anatomical landmarks tracked by the pipeline. The six lower-limb joints
/// are required for angle computation; heel and hip identifiers exist for
/// richer upstream estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointId {
    LeftKnee,
    RightKnee,
    LeftAnkle,
    RightAnkle,
    LeftToe,
    RightToe,
    LeftHeel,
    RightHeel,
    LeftHip,
    RightHip,
}

impl JointId {
    pub const ALL: [JointId; 10] = [
        JointId::LeftKnee,
        JointId::RightKnee,
        JointId::LeftAnkle,
        JointId::RightAnkle,
        JointId::LeftToe,
        JointId::RightToe,
        JointId::LeftHeel,
        JointId::RightHeel,
        JointId::LeftHip,
        JointId::RightHip,
    ];

    /// Canonical lower-case name used in the JSON and CSV interfaces.
    pub fn name(&self) -> &'static str {
        match self {
            JointId::LeftKnee => "left_knee",
            JointId::RightKnee => "right_knee",
            JointId::LeftAnkle => "left_ankle",
            JointId::RightAnkle => "right_ankle",
            JointId::LeftToe => "left_toe",
            JointId::RightToe => "right_toe",
            JointId::LeftHeel => "left_heel",
            JointId::RightHeel => "right_heel",
            JointId::LeftHip => "left_hip",
            JointId::RightHip => "right_hip",
        }
    }

    pub fn side(&self) -> Side {
        match self {
            JointId::LeftKnee
            | JointId::LeftAnkle
            | JointId::LeftToe
            | JointId::LeftHeel
            | JointId::LeftHip => Side::Left,
            _ => Side::Right,
        }
    }

    pub fn knee(side: Side) -> JointId {
        match side {
            Side::Left => JointId::LeftKnee,
            Side::Right => JointId::RightKnee,
        }
    }

    pub fn ankle(side: Side) -> JointId {
        match side {
            Side::Left => JointId::LeftAnkle,
            Side::Right => JointId::RightAnkle,
        }
    }

    pub fn toe(side: Side) -> JointId {
        match side {
            Side::Left => JointId::LeftToe,
            Side::Right => JointId::RightToe,
        }
    }
}

impl FromStr for JointId {
    type Err = GaitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JointId::ALL
            .iter()
            .copied()
            .find(|j| j.name() == s)
            .ok_or_else(|| GaitError::Config(format!("unknown joint name '{s}'")))
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn opposite(&self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// 3D point/vector. 2D data lives in the x/y plane with z = 0.
pub type Point = [f64; 3];

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Point) -> Point {
    let n = norm(a);
    scale(a, 1.0 / n)
}

/// Dimensionality of a keypoint stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dims {
    #[serde(rename = "2d")]
    Two,
    #[serde(rename = "3d")]
    Three,
}

impl Dims {
    pub fn count(&self) -> usize {
        match self {
            Dims::Two => 2,
            Dims::Three => 3,
        }
    }
}

/// One joint observation: position plus estimator confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSample {
    pub pos: Point,
    pub conf: f64,
}

/// All joints observed at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonFrame {
    pub index: usize,
    /// Seconds from session start.
    pub t: f64,
    pub joints: BTreeMap<JointId, JointSample>,
}

impl SkeletonFrame {
    pub fn position(&self, joint: JointId) -> Option<Point> {
        self.joints.get(&joint).map(|j| j.pos)
    }
}

/// Coordinate axes of the raw stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(&self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// One signed source axis, e.g. "-z".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedAxis {
    pub axis: Axis,
    pub sign: f64,
}

impl FromStr for SignedAxis {
    type Err = GaitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (sign, rest) = match s.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, s.strip_prefix('+').unwrap_or(s)),
        };
        let axis = match rest {
            "x" => Axis::X,
            "y" => Axis::Y,
            "z" => Axis::Z,
            other => return Err(GaitError::Config(format!("unknown axis '{other}'"))),
        };
        Ok(SignedAxis { axis, sign })
    }
}

/// Maps the source coordinate axes onto the canonical frame:
/// x = lateral (walker's left), y = vertical (up), z = depth (walking
/// direction, away from camera).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisConvention {
    pub lateral: SignedAxis,
    pub vertical: SignedAxis,
    pub depth: SignedAxis,
}

impl AxisConvention {
    pub fn identity() -> Self {
        AxisConvention {
            lateral: SignedAxis { axis: Axis::X, sign: 1.0 },
            vertical: SignedAxis { axis: Axis::Y, sign: 1.0 },
            depth: SignedAxis { axis: Axis::Z, sign: 1.0 },
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// The three source axes must be distinct for the mapping to be a
    /// signed permutation.
    pub fn validate(&self) -> Result<(), GaitError> {
        let a = self.lateral.axis.index();
        let b = self.vertical.axis.index();
        let c = self.depth.axis.index();
        if a == b || b == c || a == c {
            return Err(GaitError::Config(
                "axis convention must use three distinct source axes".into(),
            ));
        }
        for s in [self.lateral.sign, self.vertical.sign, self.depth.sign] {
            if s != 1.0 && s != -1.0 {
                return Err(GaitError::Config("axis signs must be +1 or -1".into()));
            }
        }
        Ok(())
    }

    pub fn apply(&self, p: Point) -> Point {
        [
            self.lateral.sign * p[self.lateral.axis.index()],
            self.vertical.sign * p[self.vertical.axis.index()],
            self.depth.sign * p[self.depth.axis.index()],
        ]
    }

    /// Inverse signed permutation.
    pub fn inverse(&self) -> AxisConvention {
        let mut out = [SignedAxis { axis: Axis::X, sign: 1.0 }; 3];
        let canon = [Axis::X, Axis::Y, Axis::Z];
        for (k, sa) in [self.lateral, self.vertical, self.depth].iter().enumerate() {
            out[sa.axis.index()] = SignedAxis { axis: canon[k], sign: sa.sign };
        }
        AxisConvention { lateral: out[0], vertical: out[1], depth: out[2] }
    }

    /// Parse "x,y,z" style triples such as "x,-z,y".
    pub fn parse(s: &str) -> Result<Self, GaitError> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(GaitError::Config(format!(
                "axis convention '{s}' must have three comma-separated entries"
            )));
        }
        let conv = AxisConvention {
            lateral: parts[0].parse()?,
            vertical: parts[1].parse()?,
            depth: parts[2].parse()?,
        };
        conv.validate()?;
        Ok(conv)
    }
}

impl Default for AxisConvention {
    fn default() -> Self {
        Self::identity()
    }
}

/// A time-ordered keypoint stream under a fixed coordinate convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonSequence {
    pub frames: Vec<SkeletonFrame>,
    pub dims: Dims,
    /// Nominal capture rate in Hz.
    pub frame_rate: f64,
    /// Convention the positions are currently expressed in; identity means
    /// canonical (x lateral, y up, z depth).
    pub convention: AxisConvention,
}

impl SkeletonSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.frames.first(), self.frames.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_names_round_trip() {
        for j in JointId::ALL {
            assert_eq!(j.name().parse::<JointId>().unwrap(), j);
        }
    }

    #[test]
    fn convention_inverse_composes_to_identity() {
        let conv = AxisConvention::parse("y,-z,x").unwrap();
        let inv = conv.inverse();
        let p = [1.5, -2.0, 0.25];
        let q = inv.apply(conv.apply(p));
        for k in 0..3 {
            assert!((p[k] - q[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn convention_rejects_duplicate_axes() {
        assert!(AxisConvention::parse("x,x,z").is_err());
    }

    #[test]
    fn signed_axis_parses_signs() {
        let sa: SignedAxis = "-z".parse().unwrap();
        assert_eq!(sa.axis, Axis::Z);
        assert_eq!(sa.sign, -1.0);
    }
}

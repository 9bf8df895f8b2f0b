//! Line of progression and foot progression angle.
//!
//! The line is parameterized as x = m*z + x0, y = n*z + y0 and fitted by
//! the 2x2 normal equations: both (m, x0) and (n, y0) solve an ordinary
//! least-squares regression of the coordinate against z. The foot
//! progression angle is the transverse-plane (horizontal-projection) angle
//! between the forward foot axis and the line direction, toe-out positive,
//! averaged over the stance phase of each step.

use serde::{Deserialize, Serialize};

use crate::error::GaitError;
use crate::events::GaitCycle;
use crate::types::{norm, JointId, Point, Side, SkeletonSequence};

/// Minimum spread of z values for a non-degenerate fit.
pub const MIN_Z_SPREAD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgressionLine {
    /// slope of x against z
    pub m: f64,
    /// slope of y against z
    pub n: f64,
    /// x intercept at z = 0, meters
    pub x0: f64,
    /// y intercept at z = 0, meters
    pub y0: f64,
}

impl ProgressionLine {
    /// Unit direction (m, n, 1)/||(m, n, 1)||.
    pub fn direction(&self) -> Point {
        let v = [self.m, self.n, 1.0];
        let len = norm(v);
        [v[0] / len, v[1] / len, v[2] / len]
    }
}

/// Fit the line of progression to 3D points by the normal equations.
pub fn fit_progression_line(points: &[Point]) -> Result<ProgressionLine, GaitError> {
    let count = points.len();
    if count < 2 {
        return Err(GaitError::DegenerateFit(format!(
            "need at least 2 points, got {count}"
        )));
    }
    let zs: Vec<f64> = points.iter().map(|p| p[2]).collect();
    let z_min = zs.iter().cloned().fold(f64::INFINITY, f64::min);
    let z_max = zs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if z_max - z_min < MIN_Z_SPREAD {
        return Err(GaitError::DegenerateFit(format!(
            "z spread {} below {MIN_Z_SPREAD}",
            z_max - z_min
        )));
    }

    let nf = count as f64;
    let sum_z: f64 = zs.iter().sum();
    let sum_zz: f64 = zs.iter().map(|z| z * z).sum();
    let sum_x: f64 = points.iter().map(|p| p[0]).sum();
    let sum_y: f64 = points.iter().map(|p| p[1]).sum();
    let sum_xz: f64 = points.iter().map(|p| p[0] * p[2]).sum();
    let sum_yz: f64 = points.iter().map(|p| p[1] * p[2]).sum();

    // determinant of [[sum_zz, sum_z], [sum_z, n]]
    let det = nf * sum_zz - sum_z * sum_z;
    if det.abs() < MIN_Z_SPREAD {
        return Err(GaitError::DegenerateFit("singular normal equations".into()));
    }
    let m = (nf * sum_xz - sum_x * sum_z) / det;
    let x0 = (sum_x * sum_zz - sum_z * sum_xz) / det;
    let n = (nf * sum_yz - sum_y * sum_z) / det;
    let y0 = (sum_y * sum_zz - sum_z * sum_yz) / det;

    let line = ProgressionLine { m, n, x0, y0 };
    if !(m.is_finite() && n.is_finite() && x0.is_finite() && y0.is_finite()) {
        return Err(GaitError::DegenerateFit("non-finite fit parameters".into()));
    }
    Ok(line)
}

fn horizontal(v: Point) -> Point {
    [v[0], 0.0, v[2]]
}

/// Signed transverse-plane angle from `reference` to `v` about the vertical
/// axis, degrees in (-180, 180].
fn signed_yaw(reference: Point, v: Point) -> f64 {
    // vertical component of reference x v
    let cross_y = reference[2] * v[0] - reference[0] * v[2];
    let d = reference[0] * v[0] + reference[2] * v[2];
    cross_y.atan2(d).to_degrees()
}

/// Mean signed foot progression angle over stance-phase foot-axis vectors
/// (forward along the foot, i.e. toe minus ankle). Toe-out is positive for
/// both sides. `forward` (+1 or -1) orients the line direction along the
/// actual walking sense; the (m, n, 1) parameterization always points +z.
pub fn foot_progression_angle(
    foot_axes: &[Point],
    line: &ProgressionLine,
    side: Side,
    forward: f64,
) -> Result<f64, GaitError> {
    if foot_axes.is_empty() {
        return Err(GaitError::EmptyInput("no stance-phase foot vectors".into()));
    }
    let dir = crate::types::scale(horizontal(line.direction()), forward.signum());
    if norm(dir) < 1e-12 {
        return Err(GaitError::DegenerateGeometry(
            "progression line is vertical; no transverse direction".into(),
        ));
    }
    let mirror = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    let mut sum = 0.0;
    let mut used = 0usize;
    for axis in foot_axes {
        let h = horizontal(*axis);
        if norm(h) < 1e-6 {
            continue; // near-vertical foot axis, no transverse direction
        }
        sum += mirror * signed_yaw(dir, h);
        used += 1;
    }
    if used == 0 {
        return Err(GaitError::EmptyInput(
            "all stance-phase foot vectors were degenerate".into(),
        ));
    }
    Ok(sum / used as f64)
}

/// Foot progression angle for one gait cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootProgressionSample {
    pub side: Side,
    pub cycle_start_frame: usize,
    pub cycle_start_t: f64,
    pub angle: f64,
}

/// Per-cycle foot progression angles: for each cycle the line is fitted on
/// that cycle's stance-phase ankle positions. Cycles with a degenerate fit
/// are skipped; the skip count is returned alongside.
pub fn session_progression(
    seq: &SkeletonSequence,
    cycles: &[GaitCycle],
) -> (Vec<FootProgressionSample>, usize) {
    let mut samples = Vec::new();
    let mut skipped = 0usize;
    for cycle in cycles {
        let side = cycle.side;
        let mut ankle_points = Vec::new();
        let mut foot_axes = Vec::new();
        for frame in &seq.frames {
            if frame.t < cycle.start.t || frame.t > cycle.toe_off.t {
                continue;
            }
            if let Some(ankle) = frame.position(JointId::ankle(side)) {
                ankle_points.push(ankle);
                if let Some(toe) = frame.position(JointId::toe(side)) {
                    foot_axes.push(crate::types::sub(toe, ankle));
                }
            }
        }
        let forward = match (ankle_points.first(), ankle_points.last()) {
            (Some(a), Some(b)) if b[2] < a[2] => -1.0,
            _ => 1.0,
        };
        let result = fit_progression_line(&ankle_points)
            .and_then(|line| foot_progression_angle(&foot_axes, &line, side, forward));
        match result {
            Ok(angle) => samples.push(FootProgressionSample {
                side,
                cycle_start_frame: cycle.start.frame_index,
                cycle_start_t: cycle.start.t,
                angle,
            }),
            Err(_) => skipped += 1,
        }
    }
    (samples, skipped)
}

/// CSV form: "cycle_start_frame,side,fpa_deg".
pub fn fpa_to_csv(samples: &[FootProgressionSample]) -> String {
    let mut out = String::from("cycle_start_frame,side,fpa_deg\n");
    for s in samples {
        out.push_str(&format!("{},{},{}\n", s.cycle_start_frame, s.side, s.angle));
    }
    out
}

/// Residuals of the fitted line at the given points, (x - m*z - x0, y - n*z - y0).
pub fn residuals(line: &ProgressionLine, points: &[Point]) -> Vec<(f64, f64)> {
    points
        .iter()
        .map(|p| (p[0] - line.m * p[2] - line.x0, p[1] - line.n * p[2] - line.y0))
        .collect()
}

/// Dot products of the residual vectors against the regressors [z, 1];
/// both should vanish for a least-squares solution.
pub fn residual_orthogonality(line: &ProgressionLine, points: &[Point]) -> [f64; 4] {
    let res = residuals(line, points);
    let mut out = [0.0; 4];
    for (p, (rx, ry)) in points.iter().zip(&res) {
        out[0] += rx * p[2];
        out[1] += rx;
        out[2] += ry * p[2];
        out[3] += ry;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_collinear_points_recover_parameters() {
        let points: Vec<Point> = (0..5)
            .map(|k| {
                let z = k as f64;
                [2.0 * z + 1.0, -z + 3.0, z]
            })
            .collect();
        let line = fit_progression_line(&points).unwrap();
        assert!((line.m - 2.0).abs() < 1e-12);
        assert!((line.n + 1.0).abs() < 1e-12);
        assert!((line.x0 - 1.0).abs() < 1e-12);
        assert!((line.y0 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_points_interpolate_exactly() {
        let points = [[0.0, 1.0, 0.0], [1.0, 2.0, 2.0]];
        let line = fit_progression_line(&points).unwrap();
        for p in &points {
            assert!((line.m * p[2] + line.x0 - p[0]).abs() < 1e-12);
            assert!((line.n * p[2] + line.y0 - p[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_z_spread_is_error() {
        let points = [[0.0, 0.0, 1.0], [1.0, 1.0, 1.0]];
        assert!(matches!(
            fit_progression_line(&points),
            Err(GaitError::DegenerateFit(_))
        ));
        assert!(matches!(
            fit_progression_line(&points[..1]),
            Err(GaitError::DegenerateFit(_))
        ));
    }

    #[test]
    fn direction_is_unit() {
        let line = ProgressionLine { m: 3.0, n: -4.0, x0: 0.0, y0: 0.0 };
        assert!((norm(line.direction()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parallel_foot_axes_have_zero_fpa() {
        let line = ProgressionLine { m: 0.0, n: 0.0, x0: 0.0, y0: 0.0 };
        let axes = vec![[0.0, 0.0, 1.0]; 5];
        for side in Side::BOTH {
            assert_eq!(foot_progression_angle(&axes, &line, side, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn constant_rotation_gives_constant_angle() {
        let line = ProgressionLine { m: 0.0, n: 0.0, x0: 0.0, y0: 0.0 };
        let phi = 10f64.to_radians();
        // rotated toward +x, which is toe-out for the left foot
        let axes = vec![[phi.sin(), 0.0, phi.cos()]; 8];
        let fpa = foot_progression_angle(&axes, &line, Side::Left, 1.0).unwrap();
        assert!((fpa - 10.0).abs() < 1e-9);
        let fpa_r = foot_progression_angle(&axes, &line, Side::Right, 1.0).unwrap();
        assert!((fpa_r + 10.0).abs() < 1e-9);
    }

    #[test]
    fn empty_stance_is_error() {
        let line = ProgressionLine { m: 0.0, n: 0.0, x0: 0.0, y0: 0.0 };
        assert!(matches!(
            foot_progression_angle(&[], &line, Side::Left, 1.0),
            Err(GaitError::EmptyInput(_))
        ));
    }

    #[test]
    fn scale_invariance_of_fpa() {
        let line = ProgressionLine { m: 0.1, n: 0.0, x0: 0.5, y0: 0.0 };
        let axes: Vec<Point> = (0..4).map(|k| [0.1 + 0.01 * k as f64, 0.0, 1.0]).collect();
        let scaled: Vec<Point> = axes.iter().map(|a| [a[0] * 7.5, a[1] * 7.5, a[2] * 7.5]).collect();
        let a = foot_progression_angle(&axes, &line, Side::Left, 1.0).unwrap();
        let b = foot_progression_angle(&scaled, &line, Side::Left, 1.0).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn translation_equivariance() {
        let points: Vec<Point> = (0..20)
            .map(|k| {
                let z = 0.3 * k as f64;
                [0.4 * z + 1.0 + (k as f64 * 0.7).sin() * 0.01, -0.2 * z + 0.5, z]
            })
            .collect();
        let line = fit_progression_line(&points).unwrap();
        let (dx, dy, dz) = (2.5, -1.0, 3.0);
        let shifted: Vec<Point> = points.iter().map(|p| [p[0] + dx, p[1] + dy, p[2] + dz]).collect();
        let line2 = fit_progression_line(&shifted).unwrap();
        assert!((line2.m - line.m).abs() < 1e-9);
        assert!((line2.n - line.n).abs() < 1e-9);
        assert!((line2.x0 - (line.x0 + dx - line.m * dz)).abs() < 1e-9);
        assert!((line2.y0 - (line.y0 + dy - line.n * dz)).abs() < 1e-9);
    }

    #[test]
    fn reversed_walking_direction_negates_fpa() {
        let line = ProgressionLine { m: 0.05, n: 0.0, x0: 0.0, y0: 0.0 };
        let axes: Vec<Point> = vec![[0.15, 0.0, 0.98]; 6];
        let a = foot_progression_angle(&axes, &line, Side::Left, 1.0).unwrap();
        // negate z of both the line direction and the foot axes
        let line_rev = ProgressionLine { m: -0.05, n: 0.0, x0: 0.0, y0: 0.0 };
        let axes_rev: Vec<Point> = axes.iter().map(|v| [v[0], v[1], -v[2]]).collect();
        let b = foot_progression_angle(&axes_rev, &line_rev, Side::Left, -1.0).unwrap();
        assert!((a + b).abs() < 1e-9);
    }
}

//! Cross-recording synchronization through the jump protocol: subjects jump
//! before and after walking; the jump apexes are matched across the two
//! recordings and define an affine clock mapping
//! `reference_time = rate * source_time + offset`.

use serde::{Deserialize, Serialize};

use crate::error::GaitError;
use crate::series::{median, TimeSeries};
use crate::types::{JointId, SkeletonSequence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeMapping {
    #[serde(rename = "offset_s")]
    pub offset: f64,
    pub rate: f64,
}

impl TimeMapping {
    pub fn identity() -> Self {
        TimeMapping { offset: 0.0, rate: 1.0 }
    }

    /// Source time -> reference time.
    pub fn map(&self, t: f64) -> f64 {
        self.rate * t + self.offset
    }

    /// Reference time -> source time.
    pub fn unmap(&self, t: f64) -> f64 {
        (t - self.offset) / self.rate
    }

    pub fn inverse(&self) -> TimeMapping {
        TimeMapping { rate: 1.0 / self.rate, offset: -self.offset / self.rate }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpParams {
    /// Elevation above the session median ankle height that counts as a jump.
    pub jump_height: f64,
    /// Minimum separation between jump apexes, seconds.
    pub min_jump_gap: f64,
}

impl Default for JumpParams {
    fn default() -> Self {
        JumpParams { jump_height: 0.10, min_jump_gap: 1.0 }
    }
}

/// Mean-ankle vertical elevation track.
fn ankle_elevation(seq: &SkeletonSequence) -> TimeSeries {
    let mut ts = TimeSeries::new();
    for frame in &seq.frames {
        let left = frame.position(JointId::LeftAnkle);
        let right = frame.position(JointId::RightAnkle);
        let y = match (left, right) {
            (Some(l), Some(r)) => (l[1] + r[1]) / 2.0,
            (Some(l), None) => l[1],
            (None, Some(r)) => r[1],
            (None, None) => continue,
        };
        ts.push(frame.t, y);
    }
    ts
}

/// Sub-frame apex refinement: vertex of the parabola through the peak
/// sample and its neighbours. Falls back to the sample time when the
/// neighbourhood is not concave.
fn refine_apex(ts: &TimeSeries, i: usize) -> f64 {
    if i == 0 || i + 1 >= ts.len() {
        return ts.t[i];
    }
    let (t0, t1, t2) = (ts.t[i - 1], ts.t[i], ts.t[i + 1]);
    let (v0, v1, v2) = (ts.v[i - 1], ts.v[i], ts.v[i + 1]);
    let dt1 = t1 - t0;
    let dt2 = t2 - t1;
    // slopes of the two chords; vertex where the interpolated slope is zero
    let s1 = (v1 - v0) / dt1;
    let s2 = (v2 - v1) / dt2;
    let curvature = (s2 - s1) / (0.5 * (dt1 + dt2));
    if curvature >= -1e-12 {
        return t1;
    }
    let t_mid1 = 0.5 * (t0 + t1);
    let vertex = t_mid1 - s1 / curvature;
    vertex.clamp(t0, t2)
}

/// Timestamps of jump apexes: peaks of mean-ankle elevation exceeding
/// `jump_height` above the session median, at least `min_jump_gap` apart,
/// refined to sub-frame precision.
pub fn detect_jumps(seq: &SkeletonSequence, params: &JumpParams) -> Vec<f64> {
    let ts = ankle_elevation(seq);
    if ts.len() < 3 {
        return vec![];
    }
    let threshold = median(&ts.v) + params.jump_height;

    // apex per above-threshold excursion
    let mut peaks: Vec<(f64, f64)> = Vec::new(); // (t, height)
    let mut current: Option<(usize, f64)> = None;
    for i in 0..ts.len() {
        if ts.v[i] > threshold {
            match current {
                Some((_, h)) if ts.v[i] <= h => {}
                _ => current = Some((i, ts.v[i])),
            }
        } else if let Some((i_peak, h)) = current.take() {
            peaks.push((refine_apex(&ts, i_peak), h));
        }
    }
    if let Some((i_peak, h)) = current {
        peaks.push((refine_apex(&ts, i_peak), h));
    }

    // enforce minimum gap, keeping the higher apex
    let mut out: Vec<(f64, f64)> = Vec::new();
    for p in peaks {
        match out.last_mut() {
            Some(last) if p.0 - last.0 < params.min_jump_gap => {
                if p.1 > last.1 {
                    *last = p;
                }
            }
            _ => out.push(p),
        }
    }
    out.into_iter().map(|(t, _)| t).collect()
}

/// Recover the affine clock mapping from matched jump timestamps. With two
/// jumps the mapping is exact through both; with more it is the
/// least-squares line over index-matched pairs.
pub fn align(source_jumps: &[f64], reference_jumps: &[f64]) -> Result<TimeMapping, GaitError> {
    if source_jumps.len() < 2 || reference_jumps.len() < 2 {
        return Err(GaitError::InsufficientLandmarks(format!(
            "need at least 2 jumps on each side, got {} and {}",
            source_jumps.len(),
            reference_jumps.len()
        )));
    }
    let mapping = if source_jumps.len() == reference_jumps.len() && source_jumps.len() > 2 {
        // least squares over all index-matched pairs
        let n = source_jumps.len() as f64;
        let sx: f64 = source_jumps.iter().sum();
        let sy: f64 = reference_jumps.iter().sum();
        let sxx: f64 = source_jumps.iter().map(|x| x * x).sum();
        let sxy: f64 = source_jumps.iter().zip(reference_jumps).map(|(x, y)| x * y).sum();
        let det = n * sxx - sx * sx;
        if det.abs() < 1e-12 {
            return Err(GaitError::InconsistentLandmarks("coincident jump timestamps".into()));
        }
        let rate = (n * sxy - sx * sy) / det;
        let offset = (sy - rate * sx) / n;
        TimeMapping { rate, offset }
    } else {
        let (s0, s1) = (source_jumps[0], *source_jumps.last().unwrap());
        let (r0, r1) = (reference_jumps[0], *reference_jumps.last().unwrap());
        if (s1 - s0).abs() < 1e-12 {
            return Err(GaitError::InconsistentLandmarks("coincident jump timestamps".into()));
        }
        let rate = (r1 - r0) / (s1 - s0);
        TimeMapping { rate, offset: r0 - rate * s0 }
    };
    if !(mapping.rate > 0.0 && mapping.rate.is_finite() && mapping.offset.is_finite()) {
        return Err(GaitError::InconsistentLandmarks(format!(
            "implied rate {} is not positive and finite",
            mapping.rate
        )));
    }
    Ok(mapping)
}

/// Interpolate source values at the mapped target (reference-clock) times.
/// Targets outside the mapped range, beyond one frame of tolerance, yield
/// `None`.
pub fn resample_to(
    source: &TimeSeries,
    mapping: &TimeMapping,
    target_timestamps: &[f64],
    frame_tolerance_s: f64,
) -> Vec<Option<f64>> {
    target_timestamps
        .iter()
        .map(|&t_ref| {
            let t_src = mapping.unmap(t_ref);
            source.interp(t_src).or_else(|| {
                // tolerate up to one frame outside the range, clamped
                let first = source.first_t()?;
                let last = source.last_t()?;
                if t_src >= first - frame_tolerance_s && t_src <= last + frame_tolerance_s {
                    source.interp(t_src.clamp(first, last))
                } else {
                    None
                }
            })
        })
        .collect()
}

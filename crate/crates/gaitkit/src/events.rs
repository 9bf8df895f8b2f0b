//! Heel-strike / toe-off detection, gait-cycle segmentation and
//! cycle-percentage resampling.
//!
//! The detector is threshold-based with hysteresis. Heel strike fires when
//! the forward ankle speed drops below `v_stop` after having exceeded
//! `v_arm` during swing, with the ankle near its low (stance) height. Toe
//! off fires when the toe vertical velocity rises above `v_lift` after a
//! settled stance, confirmed by forward motion shortly after (which rejects
//! vertical-only excursions such as synchronization jumps).

use serde::{Deserialize, Serialize};

use crate::error::GaitError;
use crate::series::{quantile, TimeSeries};
use crate::types::{JointId, Side, SkeletonSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaitEventKind {
    HeelStrike,
    ToeOff,
}

impl GaitEventKind {
    pub fn name(&self) -> &'static str {
        match self {
            GaitEventKind::HeelStrike => "heel_strike",
            GaitEventKind::ToeOff => "toe_off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitEvent {
    pub kind: GaitEventKind,
    pub side: Side,
    pub frame_index: usize,
    pub t: f64,
}

/// One gait cycle: heel strike to the next heel strike of the same side,
/// with the toe off in between bounding the stance phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitCycle {
    pub side: Side,
    pub start: GaitEvent,
    pub toe_off: GaitEvent,
    pub end: GaitEvent,
}

impl GaitCycle {
    pub fn duration(&self) -> f64 {
        self.end.t - self.start.t
    }

    pub fn stance_duration(&self) -> f64 {
        self.toe_off.t - self.start.t
    }

    pub fn stance_fraction(&self) -> f64 {
        self.stance_duration() / self.duration()
    }
}

/// Detection thresholds. Velocities are in the position unit per second
/// (m/s for 3D streams).
///
/// Detection runs in two passes. A coarse hysteresis machine on heavily
/// smoothed velocities locates one candidate per swing/stance transition;
/// the instant is then refined on a lightly smoothed velocity, scanning
/// forward for the first frame crossing the fine threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventParams {
    /// Heel strike refines to the first frame with forward ankle speed
    /// below this.
    pub v_stop: f64,
    /// Forward speed regarded as definite swing; used to confirm toe offs.
    pub v_arm: f64,
    /// Toe off refines to the first frame with toe vertical velocity above
    /// this.
    pub v_lift: f64,
    /// Coarse machine arms on smoothed forward speed above this.
    pub coarse_arm: f64,
    /// Coarse heel strike fires on smoothed forward speed below this.
    pub coarse_fire: f64,
    /// Coarse toe off fires on smoothed toe vertical velocity above this.
    pub coarse_lift: f64,
    /// Coarse toe-off re-arms when smoothed |toe vy| falls below this.
    pub coarse_settle: f64,
    /// Smoothing window (frames, odd) for the coarse pass.
    pub smooth_window: usize,
    /// Smoothing window (frames, odd) for refinement. The default of 1
    /// (no smoothing) keeps the refined instant free of the lag that a
    /// centered average drags in from late-swing motion.
    pub refine_window: usize,
    /// Events of the same kind closer than this many seconds are merged.
    pub refractory_s: f64,
    /// Heel strike requires the ankle within this height of its stance
    /// level (10th percentile of ankle height). `None` disables the gate.
    pub height_gate: Option<f64>,
    /// Toe off must be followed by forward ankle speed above `v_arm`
    /// within this window; rejects vertical-only motion such as jumps.
    pub confirm_window_s: f64,
}

impl Default for EventParams {
    fn default() -> Self {
        EventParams {
            v_stop: 0.05,
            v_arm: 0.25,
            v_lift: 0.10,
            coarse_arm: 1.0,
            coarse_fire: 0.3,
            coarse_lift: 0.15,
            coarse_settle: 0.05,
            smooth_window: 9,
            refine_window: 1,
            refractory_s: 0.2,
            height_gate: Some(0.05),
            confirm_window_s: 0.3,
        }
    }
}

struct Candidate {
    kind: GaitEventKind,
    frame_index: usize,
    t: f64,
    /// larger = stronger, used when resolving same-kind duplicates
    strength: f64,
}

struct Track {
    t: Vec<f64>,
    frames: Vec<usize>,
    /// horizontal position projected on the walking direction
    fwd: Vec<f64>,
    y: Vec<f64>,
}

fn joint_track(seq: &SkeletonSequence, joint: JointId) -> Track {
    let mut track = Track { t: Vec::new(), frames: Vec::new(), fwd: Vec::new(), y: Vec::new() };
    let mut horiz: Vec<[f64; 2]> = Vec::new();
    for frame in &seq.frames {
        if let Some(p) = frame.position(joint) {
            track.t.push(frame.t);
            track.frames.push(frame.index);
            track.y.push(p[1]);
            horiz.push([p[0], p[2]]);
        }
    }
    // walking direction = unit horizontal displacement over the recording;
    // a stationary subject yields zero forward speed and thus no events
    let mut dir = [0.0, 0.0];
    if let (Some(first), Some(last)) = (horiz.first(), horiz.last()) {
        let d = [last[0] - first[0], last[1] - first[1]];
        let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if n > 1e-9 {
            dir = [d[0] / n, d[1] / n];
        }
    }
    track.fwd = horiz.iter().map(|p| p[0] * dir[0] + p[1] * dir[1]).collect();
    track
}

/// Centered moving average with the window clamped at the edges.
fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 || values.is_empty() {
        return values.to_vec();
    }
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

fn central_diff(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = if n < 2 {
                return 0.0;
            } else if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (v[b] - v[a]) / (t[b] - t[a])
        })
        .collect()
}

/// Detect heel-strike and toe-off events for one side.
pub fn detect_events(
    seq: &SkeletonSequence,
    side: Side,
    params: &EventParams,
) -> Result<Vec<GaitEvent>, GaitError> {
    let ankle = joint_track(seq, JointId::ankle(side));
    let toe = joint_track(seq, JointId::toe(side));
    if ankle.t.len() < 2 {
        if seq.len() >= 2 {
            return Err(GaitError::MissingJoint(JointId::ankle(side)));
        }
        return Ok(vec![]);
    }
    if toe.t.len() < 2 {
        if seq.len() >= 2 {
            return Err(GaitError::MissingJoint(JointId::toe(side)));
        }
        return Ok(vec![]);
    }

    // fine velocities (light smoothing) pinpoint the event frame; coarse
    // velocities (heavy smoothing) drive the hysteresis state machine
    let speed_fine = central_diff(&ankle.t, &smooth(&ankle.fwd, params.refine_window));
    let speed_coarse = smooth(&central_diff(&ankle.t, &ankle.fwd), params.smooth_window);
    let toe_vy_fine = central_diff(&toe.t, &smooth(&toe.y, params.refine_window));
    let toe_vy_coarse = smooth(&central_diff(&toe.t, &toe.y), params.smooth_window);

    let stance_level = quantile(&ankle.y, 0.10);
    let half = params.smooth_window.max(1);

    // forward-motion confirmation shortly after a candidate instant; this
    // rejects vertical-only excursions such as synchronization jumps
    let confirmed_after = |t: f64| {
        ankle
            .t
            .iter()
            .zip(&speed_fine)
            .any(|(at, sp)| *at >= t && *at <= t + params.confirm_window_s && *sp > params.v_arm)
    };

    let mut candidates: Vec<Candidate> = Vec::new();

    // heel strikes: the coarse machine arms during swing and fires as the
    // forward speed collapses; the instant refines to the first nearby
    // frame at stance speed and stance height
    let mut armed = false;
    for (i, &coarse) in speed_coarse.iter().enumerate() {
        if coarse > params.coarse_arm {
            armed = true;
        } else if armed && coarse < params.coarse_fire {
            armed = false;
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(ankle.t.len());
            let hit = (lo..hi).find(|&j| {
                speed_fine[j] < params.v_stop
                    && params
                        .height_gate
                        .map(|g| ankle.y[j] - stance_level < g)
                        .unwrap_or(true)
            });
            if let Some(j) = hit {
                candidates.push(Candidate {
                    kind: GaitEventKind::HeelStrike,
                    frame_index: ankle.frames[j],
                    t: ankle.t[j],
                    strength: -speed_fine[j],
                });
            }
        }
    }

    // toe offs: the coarse machine settles during stance and fires on the
    // upward toe-velocity swell; the instant refines to the first nearby
    // frame where the toe is actually lifting
    let mut settled = true;
    for (i, &coarse) in toe_vy_coarse.iter().enumerate() {
        if coarse.abs() < params.coarse_settle {
            settled = true;
        } else if settled && coarse > params.coarse_lift {
            settled = false;
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(toe.t.len());
            if let Some(j) = (lo..hi).find(|&j| toe_vy_fine[j] > params.v_lift) {
                let t = toe.t[j];
                if confirmed_after(t) {
                    candidates.push(Candidate {
                        kind: GaitEventKind::ToeOff,
                        frame_index: toe.frames[j],
                        t,
                        strength: toe_vy_fine[j],
                    });
                }
            }
        }
    }

    candidates.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());

    // merge same-kind candidates within the refractory window, then enforce
    // alternation by keeping the stronger of same-kind neighbours
    let mut merged: Vec<Candidate> = Vec::new();
    for c in candidates {
        match merged.last_mut() {
            Some(last)
                if last.kind == c.kind
                    && (c.t - last.t) < params.refractory_s =>
            {
                if c.strength > last.strength {
                    *last = c;
                }
            }
            _ => merged.push(c),
        }
    }
    let mut events: Vec<Candidate> = Vec::new();
    for c in merged {
        match events.last_mut() {
            Some(last) if last.kind == c.kind => {
                if c.strength > last.strength {
                    *last = c;
                }
            }
            _ => events.push(c),
        }
    }

    Ok(events
        .into_iter()
        .map(|c| GaitEvent { kind: c.kind, side, frame_index: c.frame_index, t: c.t })
        .collect())
}

/// Build cycles from an alternating event list of one side. Each
/// consecutive (HS, TO, HS) triple is one cycle; leading toe offs and
/// trailing incomplete cycles are dropped.
pub fn segment_cycles(events: &[GaitEvent]) -> Result<Vec<GaitCycle>, GaitError> {
    for w in events.windows(2) {
        if w[0].side != w[1].side {
            return Err(GaitError::Sequencing("events from mixed sides".into()));
        }
        if w[0].kind == w[1].kind {
            return Err(GaitError::Sequencing(format!(
                "consecutive {} events at t={} and t={}",
                w[0].kind.name(),
                w[0].t,
                w[1].t
            )));
        }
        if w[1].t <= w[0].t {
            return Err(GaitError::Sequencing("events not strictly increasing in time".into()));
        }
    }
    let mut cycles = Vec::new();
    let mut i = 0;
    while i + 2 < events.len() {
        if events[i].kind != GaitEventKind::HeelStrike {
            i += 1;
            continue;
        }
        cycles.push(GaitCycle {
            side: events[i].side,
            start: events[i],
            toe_off: events[i + 1],
            end: events[i + 2],
        });
        i += 2;
    }
    Ok(cycles)
}

/// Resample a per-frame series onto `n_points` equally spaced fractions of
/// one gait cycle (default 101 points: 0..100% inclusive).
pub fn normalize_cycle(
    series: &TimeSeries,
    cycle: &GaitCycle,
    n_points: usize,
) -> Result<Vec<f64>, GaitError> {
    if n_points < 2 {
        return Err(GaitError::Config("n_points must be >= 2".into()));
    }
    let eps = 1e-9;
    let (Some(first), Some(last)) = (series.first_t(), series.last_t()) else {
        return Err(GaitError::Range("empty series".into()));
    };
    if cycle.start.t < first - eps || cycle.end.t > last + eps {
        return Err(GaitError::Range(format!(
            "cycle [{}, {}] outside series range [{first}, {last}]",
            cycle.start.t, cycle.end.t
        )));
    }
    let mut out = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let frac = k as f64 / (n_points - 1) as f64;
        let q = (cycle.start.t + frac * (cycle.end.t - cycle.start.t)).clamp(first, last);
        out.push(series.interp(q).unwrap());
    }
    Ok(out)
}

/// CSV form of an event list: "kind,side,frame,t".
pub fn events_to_csv(events: &[GaitEvent]) -> String {
    let mut out = String::from("kind,side,frame,t\n");
    for e in events {
        out.push_str(&format!("{},{},{},{}\n", e.kind.name(), e.side, e.frame_index, e.t));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{AxisConvention, Dims, JointSample, SkeletonFrame};
    use std::collections::BTreeMap;

    fn event(kind: GaitEventKind, frame: usize, t: f64) -> GaitEvent {
        GaitEvent { kind, side: Side::Left, frame_index: frame, t }
    }

    #[test]
    fn constant_sequence_has_no_events() {
        let frames: Vec<SkeletonFrame> = (0..120)
            .map(|i| {
                let mut joints = BTreeMap::new();
                joints.insert(JointId::LeftAnkle, JointSample { pos: [0.0, 0.1, 0.0], conf: 1.0 });
                joints.insert(JointId::LeftToe, JointSample { pos: [0.0, 0.1, 0.15], conf: 1.0 });
                SkeletonFrame { index: i, t: i as f64 / 30.0, joints }
            })
            .collect();
        let seq = SkeletonSequence {
            frames,
            dims: Dims::Three,
            frame_rate: 30.0,
            convention: AxisConvention::identity(),
        };
        let events = detect_events(&seq, Side::Left, &EventParams::default()).unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn missing_ankle_throughout_is_error() {
        let frames: Vec<SkeletonFrame> = (0..10)
            .map(|i| {
                let mut joints = BTreeMap::new();
                joints.insert(JointId::LeftToe, JointSample { pos: [0.0, 0.1, 0.15], conf: 1.0 });
                SkeletonFrame { index: i, t: i as f64 / 30.0, joints }
            })
            .collect();
        let seq = SkeletonSequence {
            frames,
            dims: Dims::Three,
            frame_rate: 30.0,
            convention: AxisConvention::identity(),
        };
        assert!(matches!(
            detect_events(&seq, Side::Left, &EventParams::default()),
            Err(GaitError::MissingJoint(JointId::LeftAnkle))
        ));
    }

    #[test]
    fn triple_makes_one_cycle() {
        let events = vec![
            event(GaitEventKind::HeelStrike, 10, 10.0 / 30.0),
            event(GaitEventKind::ToeOff, 25, 25.0 / 30.0),
            event(GaitEventKind::HeelStrike, 60, 2.0),
        ];
        let cycles = segment_cycles(&events).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].start.frame_index, 10);
        assert_eq!(cycles[0].toe_off.frame_index, 25);
        assert_eq!(cycles[0].end.frame_index, 60);
        assert!(cycles[0].stance_duration() > 0.0);
        assert!(cycles[0].stance_duration() < cycles[0].duration());
    }

    #[test]
    fn single_heel_strike_makes_no_cycle() {
        let events = vec![event(GaitEventKind::HeelStrike, 10, 1.0)];
        assert!(segment_cycles(&events).unwrap().is_empty());
    }

    #[test]
    fn leading_toe_off_is_skipped() {
        let events = vec![
            event(GaitEventKind::ToeOff, 2, 0.1),
            event(GaitEventKind::HeelStrike, 10, 0.5),
            event(GaitEventKind::ToeOff, 25, 1.0),
            event(GaitEventKind::HeelStrike, 60, 1.5),
        ];
        let cycles = segment_cycles(&events).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].start.frame_index, 10);
    }

    #[test]
    fn non_alternating_events_are_rejected() {
        let events = vec![
            event(GaitEventKind::HeelStrike, 10, 0.5),
            event(GaitEventKind::HeelStrike, 40, 1.5),
        ];
        assert!(matches!(segment_cycles(&events), Err(GaitError::Sequencing(_))));
    }

    fn unit_cycle(start_t: f64, to_t: f64, end_t: f64) -> GaitCycle {
        GaitCycle {
            side: Side::Left,
            start: event(GaitEventKind::HeelStrike, 0, start_t),
            toe_off: event(GaitEventKind::ToeOff, 1, to_t),
            end: event(GaitEventKind::HeelStrike, 2, end_t),
        }
    }

    #[test]
    fn constant_series_resamples_constant() {
        let series = TimeSeries { t: (0..100).map(|i| i as f64 * 0.01).collect(), v: vec![5.0; 100] };
        let cycle = unit_cycle(0.1, 0.5, 0.9);
        let out = normalize_cycle(&series, &cycle, 101).unwrap();
        assert_eq!(out.len(), 101);
        assert!(out.iter().all(|v| *v == 5.0));
    }

    #[test]
    fn linear_ramp_is_a_fixed_point() {
        let series = TimeSeries {
            t: (0..100).map(|i| i as f64 * 0.01).collect(),
            v: (0..100).map(|i| i as f64 * 0.02).collect(),
        };
        let cycle = unit_cycle(0.1, 0.4, 0.8);
        let out = normalize_cycle(&series, &cycle, 101).unwrap();
        for (k, v) in out.iter().enumerate() {
            let t = 0.1 + k as f64 / 100.0 * 0.7;
            assert!((v - 2.0 * t).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn cycle_outside_series_is_range_error() {
        let series = TimeSeries { t: vec![0.0, 1.0], v: vec![0.0, 1.0] };
        let cycle = unit_cycle(0.5, 1.2, 2.0);
        assert!(matches!(
            normalize_cycle(&series, &cycle, 101),
            Err(GaitError::Range(_))
        ));
    }

    #[test]
    fn renormalization_is_idempotent() {
        let series = TimeSeries {
            t: (0..200).map(|i| i as f64 * 0.01).collect(),
            v: (0..200).map(|i| (i as f64 * 0.1).sin()).collect(),
        };
        let cycle = unit_cycle(0.2, 0.8, 1.6);
        let once = normalize_cycle(&series, &cycle, 101).unwrap();
        // re-normalize the already-normalized curve over a unit cycle
        let as_series = TimeSeries {
            t: (0..101).map(|k| k as f64 / 100.0).collect(),
            v: once.clone(),
        };
        let unit = unit_cycle(0.0, 0.6, 1.0);
        let twice = normalize_cycle(&as_series, &unit, 101).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

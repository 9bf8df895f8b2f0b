//! End-to-end orchestration: preprocessing, single-session analysis,
//! estimate-vs-reference validation reports, and an incremental streaming
//! session that reproduces the batch results exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classify::{
    classify, extract_features, ClassLabel, ClassifyThresholds, GaitFeatures,
};
use crate::error::GaitError;
use crate::events::{detect_events, segment_cycles,EventParams, GaitCycle, GaitEvent};
use crate::ingest::{fill_gaps, normalize_axes, parse_keypoint_json, smooth, SchemaOptions};
use crate::kinematics::{angle_series, AngleConfig, AngleSeries};
use crate::progression::{session_progression, FootProgressionSample};
use crate::sync::{align, detect_jumps, JumpParams, TimeMapping};
use crate::types::{
    normalize, sub, AxisConvention, Dims, JointId, Point, Side, SkeletonSequence,
};
use crate::validation::{
    angular_errors, box_stats, cycle_error_curve, histogram, BoxStats, CycleErrorCurve,
    ErrorHistogram, Parameter,
};

pub const ANALYSIS_SCHEMA: &str = "gaitkit-analysis/1";
pub const REPORT_SCHEMA: &str = "gaitkit-report/1";
pub const CYCLE_POINTS: usize = 101;

/// Everything a run needs beyond the input stream itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Axis convention of the input, e.g. "x,-z,y"; `None` means canonical
    /// (x lateral, y up, z depth).
    pub axes: Option<String>,
    /// Joints with confidence below this are treated as missing.
    pub confidence_floor: f64,
    /// Longest joint gap (frames) bridged by linear interpolation.
    pub fill_max_gap: usize,
    /// Moving-average window (frames, odd) applied before angle
    /// computation; 1 disables smoothing.
    pub smooth_window: usize,
    pub events: EventParams,
    pub jumps: JumpParams,
    pub thresholds: ClassifyThresholds,
    /// Histogram bin width, degrees.
    pub bin_width: f64,
    /// Keep the error sign (estimate minus reference) in reports.
    pub signed_errors: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            axes: None,
            confidence_floor: crate::ingest::DEFAULT_CONFIDENCE_FLOOR,
            fill_max_gap: 5,
            smooth_window: 1,
            events: EventParams::default(),
            jumps: JumpParams::default(),
            thresholds: ClassifyThresholds::default(),
            bin_width: 1.0,
            signed_errors: false,
        }
    }
}

impl RunConfig {
    pub fn schema_options(&self) -> SchemaOptions {
        SchemaOptions { confidence_floor: self.confidence_floor, ..SchemaOptions::default() }
    }
}

/// Unit walking direction estimated from the horizontal displacement of the
/// ankles over the whole recording; falls back to the canonical forward
/// axis when the subject does not move.
pub fn estimate_progression(seq: &SkeletonSequence) -> Point {
    let mut total = [0.0, 0.0, 0.0];
    for side in Side::BOTH {
        let track: Vec<Point> = seq
            .frames
            .iter()
            .filter_map(|f| f.position(JointId::ankle(side)))
            .collect();
        if let (Some(first), Some(last)) = (track.first(), track.last()) {
            let d = sub(*last, *first);
            total[0] += d[0];
            total[2] += d[2];
        }
    }
    let n = (total[0] * total[0] + total[2] * total[2]).sqrt();
    if n < 1e-9 {
        return AngleConfig::for_dims(seq.dims).progression;
    }
    normalize([total[0], 0.0, total[2]])
}

/// Normalize axes, bridge short gaps and smooth. Returns the cleaned
/// sequence and the number of interpolated joint samples.
pub fn preprocess(
    seq: &SkeletonSequence,
    config: &RunConfig,
) -> Result<(SkeletonSequence, usize), GaitError> {
    let seq = match &config.axes {
        Some(spec) => normalize_axes(seq, &AxisConvention::parse(spec)?)?,
        None => seq.clone(),
    };
    let (seq, mask) = fill_gaps(&seq, config.fill_max_gap);
    let filled = mask.values().map(Vec::len).sum();
    let seq = if config.smooth_window > 1 { smooth(&seq, config.smooth_window)? } else { seq };
    Ok((seq, filled))
}

/// Full single-session analysis: angles, events, cycles, foot progression.
#[derive(Debug, Clone)]
pub struct SessionAnalysis {
    pub seq: SkeletonSequence,
    pub angles: AngleSeries,
    pub events: Vec<GaitEvent>,
    pub cycles: Vec<GaitCycle>,
    pub fpa: Vec<FootProgressionSample>,
    pub fpa_skipped: usize,
    pub filled_samples: usize,
}

pub fn analyze(seq: &SkeletonSequence, config: &RunConfig) -> Result<SessionAnalysis, GaitError> {
    if seq.is_empty() {
        return Err(GaitError::EmptyInput("no frames in the input stream".into()));
    }
    let (seq, filled_samples) = preprocess(seq, config)?;

    let angle_config = AngleConfig {
        up: [0.0, 1.0, 0.0],
        progression: estimate_progression(&seq),
    };
    let angles = angle_series(&seq, &angle_config);

    let mut events = Vec::new();
    let mut cycles = Vec::new();
    for side in Side::BOTH {
        let side_events = detect_events(&seq, side, &config.events)?;
        cycles.extend(segment_cycles(&side_events)?);
        events.extend(side_events);
    }
    events.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    cycles.sort_by(|a, b| a.start.t.partial_cmp(&b.start.t).unwrap());

    let (fpa, fpa_skipped) = session_progression(&seq, &cycles);

    Ok(SessionAnalysis { seq, angles, events, cycles, fpa, fpa_skipped, filled_samples })
}

impl SessionAnalysis {
    pub fn cycles_for(&self, side: Side) -> usize {
        self.cycles.iter().filter(|c| c.side == side).count()
    }

    /// Session features and classification; `None` with fewer than two
    /// cycles on either side.
    pub fn classification(
        &self,
        thresholds: &ClassifyThresholds,
    ) -> Option<(GaitFeatures, ClassLabel)> {
        let features = extract_features(&self.angles, &self.cycles, &self.fpa).ok()?;
        let label = classify(&features, thresholds).ok()?;
        Some((features, label))
    }
}

/// Serializable summary of a single-session analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub frames: usize,
    pub duration_s: f64,
    pub dims: Dims,
    pub frame_rate: f64,
    pub filled_samples: usize,
    pub events: Vec<GaitEvent>,
    pub cycles_left: usize,
    pub cycles_right: usize,
    pub fpa: Vec<FootProgressionSample>,
    pub fpa_skipped_cycles: usize,
    pub features: Option<GaitFeatures>,
    pub classification: Option<ClassLabel>,
}

pub fn analysis_report(analysis: &SessionAnalysis, config: &RunConfig) -> AnalysisReport {
    let class = analysis.classification(&config.thresholds);
    AnalysisReport {
        schema: ANALYSIS_SCHEMA.to_string(),
        frames: analysis.seq.len(),
        duration_s: analysis.seq.duration(),
        dims: analysis.seq.dims,
        frame_rate: analysis.seq.frame_rate,
        filled_samples: analysis.filled_samples,
        events: analysis.events.clone(),
        cycles_left: analysis.cycles_for(Side::Left),
        cycles_right: analysis.cycles_for(Side::Right),
        fpa: analysis.fpa.clone(),
        fpa_skipped_cycles: analysis.fpa_skipped,
        features: class.as_ref().map(|(f, _)| *f),
        classification: class.map(|(_, l)| l),
    }
}

/// Validation report comparing an estimate stream against a time-aligned
/// reference, keyed by "{parameter}_{side}".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema: String,
    /// Free-form label of the capture condition under validation.
    pub condition: String,
    pub mapping: TimeMapping,
    pub estimate_frames: usize,
    pub reference_frames: usize,
    pub aligned_frames: usize,
    pub excluded_frames: usize,
    pub signed_errors: bool,
    pub bin_width: f64,
    pub histograms: BTreeMap<String, ErrorHistogram>,
    pub curves: BTreeMap<String, CycleErrorCurve>,
    pub box_stats: BTreeMap<String, BoxStats>,
    pub features: Option<GaitFeatures>,
    pub classification: Option<ClassLabel>,
}

impl ValidationReport {
    /// Plot-ready CSV artifacts: (file name, contents).
    pub fn plot_files(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (key, h) in &self.histograms {
            out.push((format!("hist_{key}.csv"), h.to_csv()));
        }
        for (key, c) in &self.curves {
            out.push((format!("curve_{key}.csv"), c.to_csv()));
        }
        for (key, b) in &self.box_stats {
            out.push((format!("box_{key}.csv"), b.to_csv()));
        }
        out
    }
}

fn artifact_key(param: Parameter, side: Side) -> String {
    format!("{}_{}", param.name(), side.name())
}

/// Validate an estimate stream against a reference recording of the same
/// walk. Both streams are analyzed independently; their clocks are aligned
/// through the jump protocol (or `mapping_override` when the clocks are
/// known); errors are reported per parameter and side.
pub fn validate(
    estimate: &SkeletonSequence,
    reference: &SkeletonSequence,
    condition: &str,
    config: &RunConfig,
    mapping_override: Option<TimeMapping>,
) -> Result<(ValidationReport, SessionAnalysis), GaitError> {
    let est = analyze(estimate, config)?;
    let reff = analyze(reference, config)?;

    let mapping = match mapping_override {
        Some(m) => m,
        None => {
            let est_jumps = detect_jumps(&est.seq, &config.jumps);
            let ref_jumps = detect_jumps(&reff.seq, &config.jumps);
            align(&est_jumps, &ref_jumps)?
        }
    };

    let errors = angular_errors(&est.angles, &reff.angles, &mapping, config.signed_errors)?;

    let mut histograms = BTreeMap::new();
    let mut curves = BTreeMap::new();
    let mut stats = BTreeMap::new();
    for param in Parameter::ALL {
        for side in Side::BOTH {
            let key = artifact_key(param, side);
            let Some(series) = errors.series.get(&(param, side)) else { continue };
            if series.is_empty() {
                continue;
            }
            // histograms bin magnitudes even when signed errors are kept
            let magnitudes: Vec<f64> = series.v.iter().map(|v| v.abs()).collect();
            histograms.insert(key.clone(), histogram(&magnitudes, config.bin_width)?);
            stats.insert(key.clone(), box_stats(&series.v)?);
            let side_cycles: Vec<GaitCycle> =
                est.cycles.iter().copied().filter(|c| c.side == side).collect();
            if !side_cycles.is_empty() {
                if let Ok(curve) = cycle_error_curve(series, &side_cycles, CYCLE_POINTS) {
                    curves.insert(key, curve);
                }
            }
        }
    }

    let class = est.classification(&config.thresholds);
    let report = ValidationReport {
        schema: REPORT_SCHEMA.to_string(),
        condition: condition.to_string(),
        mapping,
        estimate_frames: est.seq.len(),
        reference_frames: reff.seq.len(),
        aligned_frames: errors.aligned_frames(),
        excluded_frames: errors.excluded_frames(),
        signed_errors: config.signed_errors,
        bin_width: config.bin_width,
        histograms,
        curves,
        box_stats: stats,
        features: class.as_ref().map(|(f, _)| *f),
        classification: class.map(|(_, l)| l),
    };
    Ok((report, est))
}

/// Incremental session: frames arrive one JSON line at a time; closing the
/// session runs the identical batch pipeline over the accepted frames, so
/// streaming and batch results match exactly.
pub struct StreamSession {
    config: RunConfig,
    lines: Vec<String>,
    last_t: Option<f64>,
    rejected: usize,
}

impl StreamSession {
    pub fn new(config: RunConfig) -> StreamSession {
        StreamSession { config, lines: Vec::new(), last_t: None, rejected: 0 }
    }

    pub fn frames_accepted(&self) -> usize {
        self.lines.len()
    }

    pub fn frames_rejected(&self) -> usize {
        self.rejected
    }

    /// Accept one frame line. Malformed JSON is a parse error; frames that
    /// go backwards in time are rejected (counted, not fatal) since UDP
    /// delivery may reorder packets.
    pub fn push_line(&mut self, line: &str) -> Result<bool, GaitError> {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            return Ok(false);
        }
        let value: serde_json::Value =
            serde_json::from_str(trimmed).map_err(|e| GaitError::Parse {
                line: self.lines.len() + self.rejected + 1,
                message: e.to_string(),
            })?;
        let t = value.get("t").and_then(serde_json::Value::as_f64);
        if let (Some(t), Some(last)) = (t, self.last_t) {
            if t <= last {
                self.rejected += 1;
                return Ok(false);
            }
        }
        if let Some(t) = t {
            self.last_t = Some(t);
        }
        self.lines.push(trimmed.to_string());
        Ok(true)
    }

    /// Close the session: batch-parse the accepted frames and analyze.
    pub fn finish(&self) -> Result<(SessionAnalysis, AnalysisReport), GaitError> {
        let joined = self.lines.join("\n");
        let seq = parse_keypoint_json(joined.as_bytes(), &self.config.schema_options())?;
        let analysis = analyze(&seq, &self.config)?;
        let report = analysis_report(&analysis, &self.config);
        Ok((analysis, report))
    }
}

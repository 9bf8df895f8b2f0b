//! Session-level gait features and the four-way walking-pattern
//! classification (normal, supination, pronation, limp).
//!
//! The default classifier is a fixed-priority rule cascade
//! (limp > pronation > supination > normal) over feature medians; any
//! learned model can be substituted behind the [`Classifier`] trait.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::GaitError;
use crate::events::GaitCycle;
use crate::kinematics::AngleSeries;
use crate::progression::FootProgressionSample;
use crate::series::median;
use crate::types::Side;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitFeatures {
    /// Median signed inversion/eversion per side, degrees.
    pub median_inversion_eversion: [f64; 2],
    /// Median signed foot progression angle per side, degrees.
    pub median_fpa: [f64; 2],
    /// Mean stance fraction per side, in (0, 1).
    pub stance_fraction: [f64; 2],
    /// |left - right| stance fraction.
    pub stance_asymmetry: f64,
    /// Steps per minute (2 steps per gait cycle).
    pub cadence: f64,
}

impl GaitFeatures {
    fn side_index(side: Side) -> usize {
        match side {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.median_inversion_eversion.iter().all(|v| v.is_finite())
            && self.median_fpa.iter().all(|v| v.is_finite())
            && self.stance_fraction.iter().all(|v| v.is_finite())
            && self.stance_asymmetry.is_finite()
            && self.cadence.is_finite()
    }
}

/// Reduce a session to classification features. Requires at least two gait
/// cycles per side.
pub fn extract_features(
    angle_series: &AngleSeries,
    cycles: &[GaitCycle],
    fpa_samples: &[FootProgressionSample],
) -> Result<GaitFeatures, GaitError> {
    let mut per_side_cycles: BTreeMap<Side, Vec<&GaitCycle>> = BTreeMap::new();
    for c in cycles {
        per_side_cycles.entry(c.side).or_default().push(c);
    }
    for side in Side::BOTH {
        let n = per_side_cycles.get(&side).map_or(0, Vec::len);
        if n < 2 {
            return Err(GaitError::InsufficientData(format!(
                "need at least 2 gait cycles per side, {side} has {n}"
            )));
        }
    }

    let mut media_ie = [0.0; 2];
    let mut media_fpa = [0.0; 2];
    let mut stance = [0.0; 2];
    for side in Side::BOTH {
        let k = GaitFeatures::side_index(side);
        let ie: Vec<f64> = angle_series.side(side).map(|s| s.inversion_eversion).collect();
        media_ie[k] = median(&ie);
        let fpa: Vec<f64> = fpa_samples
            .iter()
            .filter(|s| s.side == side)
            .map(|s| s.angle)
            .collect();
        media_fpa[k] = median(&fpa);
        let fractions: Vec<f64> = per_side_cycles[&side]
            .iter()
            .map(|c| c.stance_fraction())
            .collect();
        stance[k] = fractions.iter().sum::<f64>() / fractions.len() as f64;
    }

    let durations: Vec<f64> = cycles.iter().map(GaitCycle::duration).collect();
    let mean_cycle = durations.iter().sum::<f64>() / durations.len() as f64;
    let cadence = 120.0 / mean_cycle; // two steps per cycle

    let features = GaitFeatures {
        median_inversion_eversion: media_ie,
        median_fpa: media_fpa,
        stance_fraction: stance,
        stance_asymmetry: (stance[0] - stance[1]).abs(),
        cadence,
    };
    if !features.is_finite() {
        return Err(GaitError::InvalidFeature("non-finite gait feature".into()));
    }
    Ok(features)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaitClass {
    Normal,
    Supination,
    Pronation,
    Limp,
}

impl GaitClass {
    pub const ALL: [GaitClass; 4] =
        [GaitClass::Normal, GaitClass::Supination, GaitClass::Pronation, GaitClass::Limp];

    pub fn name(&self) -> &'static str {
        match self {
            GaitClass::Normal => "normal",
            GaitClass::Supination => "supination",
            GaitClass::Pronation => "pronation",
            GaitClass::Limp => "limp",
        }
    }
}

/// Emitted label plus normalized per-class scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassLabel {
    pub label: GaitClass,
    /// Scores in [0, 1] summing to 1; the label is the argmax.
    pub scores: BTreeMap<GaitClass, f64>,
}

/// Rule thresholds. FPA thresholds are absolute toe-out angles around the
/// normal toe-out baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyThresholds {
    /// Stance-fraction gap above which the session is a limp.
    pub t_limp: f64,
    /// Signed inversion/eversion magnitude for supination (+) / pronation (-).
    pub t_ie: f64,
    /// FPA above this is pronation (toe-out).
    pub t_out: f64,
    /// FPA offset from the baseline below which the session is supination
    /// (negative = toe-in allowance).
    pub t_in: f64,
    /// Normal toe-out baseline, degrees.
    pub fpa_baseline: f64,
    /// Logistic steepness for score squashing.
    pub score_scale: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        ClassifyThresholds {
            t_limp: 0.08,
            t_ie: 5.0,
            t_out: 15.0,
            t_in: -5.0,
            fpa_baseline: 7.0,
            score_scale: 1.0,
        }
    }
}

pub trait Classifier {
    fn classify(&self, features: &GaitFeatures) -> Result<ClassLabel, GaitError>;
}

/// The default rule cascade.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleClassifier {
    pub thresholds: ClassifyThresholds,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Classifier for RuleClassifier {
    fn classify(&self, features: &GaitFeatures) -> Result<ClassLabel, GaitError> {
        classify(features, &self.thresholds)
    }
}

/// Rule cascade: limp on stance asymmetry, then pronation on everted feet
/// or excess toe-out, then supination on inverted feet or toe-in, else
/// normal. Rule order is fixed: limp > pronation > supination > normal.
pub fn classify(
    features: &GaitFeatures,
    thresholds: &ClassifyThresholds,
) -> Result<ClassLabel, GaitError> {
    if !features.is_finite() {
        return Err(GaitError::InvalidFeature("non-finite gait feature".into()));
    }
    let t = thresholds;
    let ie = (features.median_inversion_eversion[0] + features.median_inversion_eversion[1]) / 2.0;
    let fpa = (features.median_fpa[0] + features.median_fpa[1]) / 2.0;
    // toe-in: FPA below -(baseline + t_in), i.e. -2 deg at the defaults
    let supination_fpa_max = -(t.fpa_baseline + t.t_in);

    // signed distances to each rule's threshold, positive = rule fires
    let d_limp = features.stance_asymmetry - t.t_limp;
    let d_pron = (-ie - t.t_ie).max(fpa - t.t_out);
    let d_sup = (ie - t.t_ie).max(supination_fpa_max - fpa);
    let d_norm = -d_limp.max(d_pron).max(d_sup);

    let label = if d_limp > 0.0 {
        GaitClass::Limp
    } else if d_pron > 0.0 {
        GaitClass::Pronation
    } else if d_sup > 0.0 {
        GaitClass::Supination
    } else {
        GaitClass::Normal
    };

    // scores: the firing rule keeps its positive margin; lower-priority
    // margins are clipped so the emitted label stays the argmax
    let margins = [
        (GaitClass::Limp, d_limp),
        (GaitClass::Pronation, d_pron),
        (GaitClass::Supination, d_sup),
        (GaitClass::Normal, d_norm),
    ];
    let mut raw = BTreeMap::new();
    for (class, margin) in margins {
        let adjusted = if class == label {
            margin
        } else {
            margin.min(0.0) - 1e-9
        };
        raw.insert(class, logistic(t.score_scale * adjusted));
    }
    let sum: f64 = raw.values().sum();
    let scores: BTreeMap<GaitClass, f64> = raw.into_iter().map(|(c, s)| (c, s / sum)).collect();
    Ok(ClassLabel { label, scores })
}

//! Angular errors against a reference recording and the three report
//! artifacts: error histograms, cycle-normalized error curves and box-chart
//! statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::GaitError;
use crate::events::{normalize_cycle, GaitCycle};
use crate::kinematics::AngleSeries;
use crate::series::{quantile, TimeSeries};
use crate::sync::TimeMapping;
use crate::types::Side;

/// The three frame-wise angular parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    InversionEversion,
    DorsiflexionPlantarflexion,
    Ankle,
}

impl Parameter {
    pub const ALL: [Parameter; 3] = [
        Parameter::InversionEversion,
        Parameter::DorsiflexionPlantarflexion,
        Parameter::Ankle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Parameter::InversionEversion => "inversion_eversion",
            Parameter::DorsiflexionPlantarflexion => "dorsiflexion_plantarflexion",
            Parameter::Ankle => "ankle",
        }
    }
}

fn angle_track(series: &AngleSeries, param: Parameter, side: Side) -> TimeSeries {
    let mut ts = TimeSeries::new();
    for s in series.side(side) {
        let v = match param {
            Parameter::InversionEversion => s.inversion_eversion,
            Parameter::DorsiflexionPlantarflexion => s.dorsiflexion_plantarflexion,
            Parameter::Ankle => s.ankle,
        };
        ts.push(s.t, v);
    }
    ts
}

/// Per-frame angular errors on the estimate's clock.
#[derive(Debug, Clone, Default)]
pub struct AngularErrors {
    /// (parameter, side) -> error series on the estimate clock.
    pub series: BTreeMap<(Parameter, Side), TimeSeries>,
    /// Frames present on one side only, per (parameter, side).
    pub excluded: BTreeMap<(Parameter, Side), usize>,
}

impl AngularErrors {
    pub fn all_values(&self, param: Parameter) -> Vec<f64> {
        let mut out = Vec::new();
        for side in Side::BOTH {
            if let Some(ts) = self.series.get(&(param, side)) {
                out.extend_from_slice(&ts.v);
            }
        }
        out
    }

    pub fn aligned_frames(&self) -> usize {
        self.series.values().map(TimeSeries::len).sum()
    }

    pub fn excluded_frames(&self) -> usize {
        self.excluded.values().sum()
    }
}

/// Absolute angular error per aligned frame. Estimate timestamps are mapped
/// onto the reference clock; the reference is linearly interpolated there.
/// `signed = true` keeps the sign (estimate minus reference) for bias
/// analysis.
pub fn angular_errors(
    est: &AngleSeries,
    reference: &AngleSeries,
    mapping: &TimeMapping,
    signed: bool,
) -> Result<AngularErrors, GaitError> {
    if est.samples.is_empty() || reference.samples.is_empty() {
        return Err(GaitError::EmptyInput("empty angle series".into()));
    }
    let mut out = AngularErrors::default();
    for param in Parameter::ALL {
        for side in Side::BOTH {
            let est_ts = angle_track(est, param, side);
            let ref_ts = angle_track(reference, param, side);
            let mut err = TimeSeries::new();
            let mut excluded = 0usize;
            for (t, v) in est_ts.t.iter().zip(&est_ts.v) {
                match ref_ts.interp(mapping.map(*t)) {
                    Some(r) => {
                        let e = v - r;
                        err.push(*t, if signed { e } else { e.abs() });
                    }
                    None => excluded += 1,
                }
            }
            out.excluded.insert((param, side), excluded);
            out.series.insert((param, side), err);
        }
    }
    if out.aligned_frames() == 0 {
        return Err(GaitError::EmptyOverlap);
    }
    Ok(out)
}

/// Histogram of angular errors: right-open bins [k*w, (k+1)*w), percentages
/// of total frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorHistogram {
    pub bin_width: f64,
    /// (lower edge, percentage of frames)
    pub bins: Vec<(f64, f64)>,
    pub total_frames: usize,
}

pub fn histogram(errors: &[f64], bin_width: f64) -> Result<ErrorHistogram, GaitError> {
    if bin_width <= 0.0 {
        return Err(GaitError::Config(format!("bin width must be positive, got {bin_width}")));
    }
    if errors.is_empty() {
        return Err(GaitError::EmptyInput("no errors to histogram".into()));
    }
    let max = errors.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n_bins = (max / bin_width).floor() as usize + 1;
    let mut counts = vec![0usize; n_bins];
    for e in errors {
        let k = ((e / bin_width).floor() as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    let total = errors.len();
    let bins = counts
        .iter()
        .enumerate()
        .map(|(k, c)| (k as f64 * bin_width, *c as f64 / total as f64 * 100.0))
        .collect();
    Ok(ErrorHistogram { bin_width, bins, total_frames: total })
}

impl ErrorHistogram {
    /// CSV form: "lower_edge_deg,percent".
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lower_edge_deg,percent\n");
        for (edge, pct) in &self.bins {
            out.push_str(&format!("{edge},{pct}\n"));
        }
        out
    }
}

/// Mean absolute error at each percent of the gait cycle, averaged across
/// cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleErrorCurve {
    pub points: Vec<f64>,
    pub cycles_averaged: usize,
}

pub fn cycle_error_curve(
    errors: &TimeSeries,
    cycles: &[GaitCycle],
    n_points: usize,
) -> Result<CycleErrorCurve, GaitError> {
    let mut sum = vec![0.0; n_points];
    let mut used = 0usize;
    for cycle in cycles {
        match normalize_cycle(errors, cycle, n_points) {
            Ok(values) => {
                for (s, v) in sum.iter_mut().zip(&values) {
                    *s += v;
                }
                used += 1;
            }
            Err(GaitError::Range(_)) => continue, // cycle outside error series
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(GaitError::EmptyInput("no cycles overlap the error series".into()));
    }
    Ok(CycleErrorCurve {
        points: sum.into_iter().map(|s| s / used as f64).collect(),
        cycles_averaged: used,
    })
}

impl CycleErrorCurve {
    /// CSV form: "cycle_percent,mean_abs_error_deg".
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle_percent,mean_abs_error_deg\n");
        let denom = (self.points.len() - 1).max(1) as f64;
        for (k, v) in self.points.iter().enumerate() {
            out.push_str(&format!("{},{}\n", k as f64 / denom * 100.0, v));
        }
        out
    }
}

/// Five-number summary with 1.5*IQR outliers. Quartiles use linear
/// interpolation between order statistics (the inclusive method).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub outliers: Vec<f64>,
    pub n: usize,
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats, GaitError> {
    if values.is_empty() {
        return Err(GaitError::EmptyInput("no values for box statistics".into()));
    }
    let q1 = quantile(values, 0.25);
    let med = quantile(values, 0.5);
    let q3 = quantile(values, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let mut outliers: Vec<f64> = values.iter().cloned().filter(|v| *v < lo || *v > hi).collect();
    outliers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(BoxStats {
        min: values.iter().cloned().fold(f64::INFINITY, f64::min),
        q1,
        median: med,
        q3,
        max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        outliers,
        n: values.len(),
    })
}

impl BoxStats {
    /// CSV form, one row: "n,min,q1,median,q3,max,outlier_count".
    pub fn to_csv(&self) -> String {
        format!(
            "n,min,q1,median,q3,max,outlier_count\n{},{},{},{},{},{},{}\n",
            self.n, self.min, self.q1, self.median, self.q3, self.max,
            self.outliers.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{GaitEvent, GaitEventKind};
    use crate::kinematics::AngleSample;
    use crate::types::Dims;

    fn series_with(values: &[(f64, f64)], side: Side) -> AngleSeries {
        AngleSeries {
            samples: values
                .iter()
                .enumerate()
                .map(|(i, (t, v))| AngleSample {
                    frame_index: i,
                    t: *t,
                    side,
                    inversion_eversion: *v,
                    dorsiflexion_plantarflexion: *v + 1.0,
                    ankle: *v + 2.0,
                })
                .collect(),
            dims: Dims::Three,
            skipped: [0, 0],
        }
    }

    #[test]
    fn identical_series_have_zero_error() {
        let s = series_with(&[(0.0, 10.0), (0.1, 11.0), (0.2, 12.0)], Side::Left);
        let errs = angular_errors(&s, &s, &TimeMapping::identity(), false).unwrap();
        for ts in errs.series.values() {
            for v in &ts.v {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn constant_bias_gives_constant_error() {
        let a = series_with(&[(0.0, 10.0), (0.1, 11.0), (0.2, 12.0)], Side::Left);
        let b = series_with(&[(0.0, 13.0), (0.1, 14.0), (0.2, 15.0)], Side::Left);
        let errs = angular_errors(&a, &b, &TimeMapping::identity(), false).unwrap();
        for ts in errs.series.values() {
            for v in &ts.v {
                assert!((v - 3.0).abs() < 1e-12);
            }
        }
        // signed errors keep the direction
        let signed = angular_errors(&a, &b, &TimeMapping::identity(), true).unwrap();
        for ts in signed.series.values() {
            for v in &ts.v {
                assert!((v + 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn swapping_est_and_ref_preserves_absolute_errors() {
        let a = series_with(&[(0.0, 10.0), (0.1, 12.5), (0.2, 9.0)], Side::Left);
        let b = series_with(&[(0.0, 11.0), (0.1, 11.0), (0.2, 11.0)], Side::Left);
        let ab = angular_errors(&a, &b, &TimeMapping::identity(), false).unwrap();
        let ba = angular_errors(&b, &a, &TimeMapping::identity(), false).unwrap();
        let key = (Parameter::InversionEversion, Side::Left);
        assert_eq!(ab.series[&key].v, ba.series[&key].v);
    }

    #[test]
    fn empty_overlap_is_error() {
        let a = series_with(&[(0.0, 1.0), (0.1, 1.0)], Side::Left);
        let b = series_with(&[(100.0, 1.0), (100.1, 1.0)], Side::Left);
        assert!(matches!(
            angular_errors(&a, &b, &TimeMapping::identity(), false),
            Err(GaitError::EmptyOverlap)
        ));
    }

    #[test]
    fn histogram_counts_match_hand_values() {
        let h = histogram(&[0.2, 0.4, 1.5, 2.7], 1.0).unwrap();
        assert_eq!(h.bins.len(), 3);
        assert_eq!(h.bins[0], (0.0, 50.0));
        assert_eq!(h.bins[1], (1.0, 25.0));
        assert_eq!(h.bins[2], (2.0, 25.0));
        assert_eq!(h.total_frames, 4);
    }

    #[test]
    fn single_value_is_one_full_bin() {
        let h = histogram(&[0.5], 1.0).unwrap();
        assert_eq!(h.bins, vec![(0.0, 100.0)]);
    }

    #[test]
    fn histogram_percentages_sum_to_100() {
        let values: Vec<f64> = (0..997).map(|k| (k as f64 * 0.77) % 13.0).collect();
        let h = histogram(&values, 1.0).unwrap();
        let sum: f64 = h.bins.iter().map(|(_, p)| p).sum();
        assert!((sum - 100.0).abs() < 1e-9);
    }

    #[test]
    fn empty_histogram_is_error() {
        assert!(matches!(histogram(&[], 1.0), Err(GaitError::EmptyInput(_))));
    }

    fn cycle(t0: f64, t1: f64, t2: f64) -> GaitCycle {
        let ev = |kind, t| GaitEvent { kind, side: Side::Left, frame_index: 0, t };
        GaitCycle {
            side: Side::Left,
            start: ev(GaitEventKind::HeelStrike, t0),
            toe_off: ev(GaitEventKind::ToeOff, t1),
            end: ev(GaitEventKind::HeelStrike, t2),
        }
    }

    #[test]
    fn constant_error_curve_is_flat() {
        let errors = TimeSeries {
            t: (0..100).map(|i| i as f64 * 0.02).collect(),
            v: vec![2.0; 100],
        };
        let curve = cycle_error_curve(&errors, &[cycle(0.1, 0.7, 1.1)], 101).unwrap();
        assert_eq!(curve.points.len(), 101);
        assert!(curve.points.iter().all(|v| *v == 2.0));
    }

    #[test]
    fn two_cycles_average_pointwise() {
        let mut t = Vec::new();
        let mut v = Vec::new();
        for i in 0..200 {
            let ti = i as f64 * 0.02;
            t.push(ti);
            v.push(if ti < 2.0 { 1.0 } else { 3.0 });
        }
        let errors = TimeSeries { t, v };
        let cycles = [cycle(0.2, 0.8, 1.4), cycle(2.2, 2.8, 3.4)];
        let curve = cycle_error_curve(&errors, &cycles, 101).unwrap();
        assert_eq!(curve.cycles_averaged, 2);
        for p in &curve.points {
            assert!((p - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn curve_is_invariant_to_cycle_order() {
        let errors = TimeSeries {
            t: (0..300).map(|i| i as f64 * 0.02).collect(),
            v: (0..300).map(|i| (i as f64 * 0.3).sin().abs()).collect(),
        };
        let a = cycle(0.2, 0.8, 1.4);
        let b = cycle(2.2, 2.8, 3.4);
        let ab = cycle_error_curve(&errors, &[a, b], 101).unwrap();
        let ba = cycle_error_curve(&errors, &[b, a], 101).unwrap();
        assert_eq!(ab.points, ba.points);
    }

    #[test]
    fn no_overlapping_cycle_is_error() {
        let errors = TimeSeries { t: vec![0.0, 0.1], v: vec![1.0, 1.0] };
        assert!(matches!(
            cycle_error_curve(&errors, &[cycle(5.0, 5.6, 6.2)], 101),
            Err(GaitError::EmptyInput(_))
        ));
    }

    #[test]
    fn box_stats_odd_symmetric() {
        let b = box_stats(&[3.0, 1.0, 5.0, 2.0, 4.0]).unwrap();
        assert_eq!(b.min, 1.0);
        assert_eq!(b.q1, 2.0);
        assert_eq!(b.median, 3.0);
        assert_eq!(b.q3, 4.0);
        assert_eq!(b.max, 5.0);
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn box_stats_all_equal() {
        let b = box_stats(&[2.0; 6]).unwrap();
        assert_eq!(b.min, 2.0);
        assert_eq!(b.q1, 2.0);
        assert_eq!(b.median, 2.0);
        assert_eq!(b.q3, 2.0);
        assert_eq!(b.max, 2.0);
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn box_stats_flags_outliers() {
        let mut values = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        values.push(100.0);
        let b = box_stats(&values).unwrap();
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.max, 100.0);
    }

    #[test]
    fn box_stats_empty_is_error() {
        assert!(matches!(box_stats(&[]), Err(GaitError::EmptyInput(_))));
    }
}

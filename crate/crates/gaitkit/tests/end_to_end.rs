//! End-to-end library tests: ingest round-trips and the full
//! analyze/validate pipelines over synthetic sessions.

use gaitkit::ingest::{
    parse_keypoint_csv, parse_keypoint_json, serialize_keypoint_csv, serialize_keypoint_json,
    CsvOptions,
};
use gaitkit::pipeline::{analyze, validate, RunConfig};
use gaitkit::synth::{generate, ReferenceSpec, SynthParams};
use gaitkit::types::Side;

#[test]
fn json_round_trip_preserves_sequence() {
    let session = generate(&SynthParams::default()).unwrap();
    let config = RunConfig::default();
    let text = serialize_keypoint_json(&session.estimate);
    let parsed = parse_keypoint_json(text.as_bytes(), &config.schema_options()).unwrap();
    assert_eq!(parsed.len(), session.estimate.len());
    let again = serialize_keypoint_json(&parsed);
    assert_eq!(text, again, "serialization must be a fixed point");
}

#[test]
fn csv_round_trip_preserves_sequence() {
    let session = generate(&SynthParams { n_strides: 4, ..SynthParams::default() }).unwrap();
    let text = serialize_keypoint_csv(&session.estimate);
    let parsed = parse_keypoint_csv(text.as_bytes(), &CsvOptions::default()).unwrap();
    assert_eq!(parsed.len(), session.estimate.len());
    for (a, b) in parsed.frames.iter().zip(&session.estimate.frames) {
        assert_eq!(a.index, b.index);
        assert!((a.t - b.t).abs() < 1e-9);
        for (ja, jb) in a.joints.iter().zip(&b.joints) {
            assert_eq!(ja.0, jb.0);
            for k in 0..3 {
                assert!((ja.1.pos[k] - jb.1.pos[k]).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn analysis_reports_full_cycle_structure() {
    let session = generate(&SynthParams::default()).unwrap();
    let analysis = analyze(&session.estimate, &RunConfig::default()).unwrap();
    for side in Side::BOTH {
        assert_eq!(analysis.cycles_for(side), 9, "{side:?}: 10 strides give 9 cycles");
        let cycles: Vec<_> =
            analysis.cycles.iter().filter(|c| c.side == side).collect();
        for c in &cycles {
            let sf = c.stance_fraction();
            assert!((0.4..0.8).contains(&sf), "{side:?}: stance fraction {sf}");
        }
    }
    assert_eq!(analysis.fpa.len(), 18);
}

#[test]
fn validation_report_against_reference_stream() {
    let params = SynthParams {
        reference: Some(ReferenceSpec { rate: 1.01, offset_s: 1.5, frame_rate: 60.0 }),
        ..SynthParams::default()
    }
    .with_default_jumps();
    let session = generate(&params).unwrap();
    let reference = session.reference.expect("reference stream");
    let config = RunConfig::default();

    let (report, _) =
        validate(&session.estimate, &reference, "vs-reference", &config, None).unwrap();

    let truth = session.truth.mapping.unwrap();
    assert!((report.mapping.rate - truth.rate).abs() < 1e-3);
    assert!((report.mapping.offset - truth.offset).abs() < 0.05);

    assert!(!report.histograms.is_empty());
    for hist in report.histograms.values() {
        let sum: f64 = hist.bins.iter().map(|(_, pct)| pct).sum();
        assert!((sum - 100.0).abs() < 1e-9);
    }
    for curve in report.curves.values() {
        assert_eq!(curve.points.len(), 101);
    }
    for stats in report.box_stats.values() {
        assert!(stats.min <= stats.median && stats.median <= stats.max);
    }
    // same generator on both sides of the comparison: errors stay small
    for stats in report.box_stats.values() {
        assert!(stats.median.abs() < 1.0, "median error {}", stats.median);
    }
    assert!(report.aligned_frames > 0);
}

#[test]
fn noisy_session_still_analyzable() {
    let session =
        generate(&SynthParams { noise_sigma: 0.01, ..SynthParams::default() }).unwrap();
    let analysis = analyze(&session.estimate, &RunConfig::default()).unwrap();
    assert!(analysis.cycles.len() >= 14, "cycles: {}", analysis.cycles.len());
    let (features, label) =
        analysis.classification(&RunConfig::default().thresholds).unwrap();
    assert!(features.cadence > 80.0 && features.cadence < 120.0);
    assert_eq!(label.label, session.truth.intended_label);
}

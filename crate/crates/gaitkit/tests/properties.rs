//! Property-based invariants over the numeric core.

use gaitkit::kinematics::angle_between;
use gaitkit::progression::{fit_progression_line, residual_orthogonality};
use gaitkit::sync::TimeMapping;
use gaitkit::types::Point;
use gaitkit::validation::{box_stats, histogram};
use proptest::prelude::*;

fn vector() -> impl Strategy<Value = Point> {
    [(-10.0..10.0f64), (-10.0..10.0f64), (-10.0..10.0f64)]
        .prop_filter("non-degenerate", |v| {
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() > 1e-3
        })
}

proptest! {
    #[test]
    fn angle_is_symmetric_and_bounded(u in vector(), v in vector()) {
        let a = angle_between(u, v).unwrap();
        let b = angle_between(v, u).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=180.0).contains(&a));
    }

    #[test]
    fn angle_is_scale_invariant(u in vector(), v in vector(), s in 0.01..100.0f64) {
        let a = angle_between(u, v).unwrap();
        let b = angle_between([s * u[0], s * u[1], s * u[2]], v).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    // arccos loses precision near +-1, so parallel vectors only resolve to
    // ~1e-5 degrees; still far below any physiological scale
    #[test]
    fn angle_of_parallel_and_antiparallel(u in vector()) {
        prop_assert!(angle_between(u, u).unwrap().abs() < 1e-4);
        let neg = [-u[0], -u[1], -u[2]];
        prop_assert!((angle_between(u, neg).unwrap() - 180.0).abs() < 1e-4);
    }

    #[test]
    fn collinear_points_fit_exactly(
        m in -1.0..1.0f64,
        n in -1.0..1.0f64,
        x0 in -5.0..5.0f64,
        y0 in -5.0..5.0f64,
        count in 3usize..40,
    ) {
        let points: Vec<Point> = (0..count)
            .map(|k| {
                let z = 0.1 + 0.07 * k as f64;
                [m * z + x0, n * z + y0, z]
            })
            .collect();
        let line = fit_progression_line(&points).unwrap();
        prop_assert!((line.m - m).abs() < 1e-9);
        prop_assert!((line.n - n).abs() < 1e-9);
        prop_assert!((line.x0 - x0).abs() < 1e-9);
        prop_assert!((line.y0 - y0).abs() < 1e-9);
    }

    #[test]
    fn residuals_are_orthogonal_for_any_fit(
        values in prop::collection::vec(((-3.0..3.0f64), (-3.0..3.0f64)), 5..60),
    ) {
        let points: Vec<Point> = values
            .iter()
            .enumerate()
            .map(|(k, (x, y))| [*x, *y, 0.05 * k as f64])
            .collect();
        let line = fit_progression_line(&points).unwrap();
        let scale = points.len() as f64;
        for dot in residual_orthogonality(&line, &points) {
            prop_assert!(dot.abs() / scale < 1e-9);
        }
    }

    #[test]
    fn histogram_percentages_sum_to_100(
        values in prop::collection::vec(0.0..50.0f64, 1..500),
        width in 0.1..5.0f64,
    ) {
        let h = histogram(&values, width).unwrap();
        let sum: f64 = h.bins.iter().map(|(_, pct)| pct).sum();
        prop_assert!((sum - 100.0).abs() < 1e-9);
        for (edge, _) in &h.bins {
            prop_assert!((edge / width - (edge / width).round()).abs() < 1e-9);
        }
    }

    #[test]
    fn box_stats_are_ordered(values in prop::collection::vec(-100.0..100.0f64, 1..300)) {
        let s = box_stats(&values).unwrap();
        prop_assert!(s.min <= s.q1);
        prop_assert!(s.q1 <= s.median);
        prop_assert!(s.median <= s.q3);
        prop_assert!(s.q3 <= s.max);
        let lo = s.q1 - 1.5 * (s.q3 - s.q1);
        let hi = s.q3 + 1.5 * (s.q3 - s.q1);
        for v in &s.outliers {
            prop_assert!(*v < lo || *v > hi);
        }
    }

    #[test]
    fn time_mapping_round_trips(
        offset in -10.0..10.0f64,
        rate in 0.5..2.0f64,
        t in -100.0..100.0f64,
    ) {
        let m = TimeMapping { offset, rate };
        prop_assert!((m.unmap(m.map(t)) - t).abs() < 1e-9);
        let inv = m.inverse();
        prop_assert!((inv.map(m.map(t)) - t).abs() < 1e-9);
    }
}

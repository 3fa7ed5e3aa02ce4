use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use uaic_core::fdi::{detect, isolate, recover, DetectionConfig, FaultLocation, FaultMonitor, GaussianMoments, MonitorConfig, ProprioRecovery};
use uaic_core::gpr::VisualModel;
use uaic_core::uaic::controller_step;
use uaic_core::{ControlLaw, Matrix2, Schedule, SensorReading, UaicBelief, UaicGains, UaicPrecisions, Vector2};

struct Planar;

impl VisualModel for Planar {
    fn predict_with_derivative(&self, q: &Vector2<f64>) -> (Vector2<f64>, Matrix2<f64>) {
        let (s1, c1) = q[0].sin_cos();
        let (s12, c12) = (q[0] + q[1]).sin_cos();
        (Vector2::new(c1 + c12, s1 + s12), Matrix2::new(-s1 - s12, -s12, c1 + c12, c12))
    }
}

fn v2() -> impl Strategy<Value = Vector2<f64>> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| Vector2::new(a, b))
}

proptest! {
    #[test]
    fn mahalanobis_is_nonnegative_and_zero_at_the_mean(
        mean in prop::collection::vec(-5.0..5.0f64, 3),
        l in prop::collection::vec(-1.0..1.0f64, 9),
        r in prop::collection::vec(-5.0..5.0f64, 3),
    ) {
        let l = DMatrix::from_vec(3, 3, l) + DMatrix::identity(3, 3) * 2.0;
        let m = GaussianMoments::new(DVector::from_vec(mean.clone()), &l * l.transpose(), 100).unwrap();
        prop_assert!(m.mahalanobis_squared(&r) >= 0.0);
        prop_assert!(m.mahalanobis_squared(&mean).abs() < 1e-12);
        prop_assert!((m.mahalanobis(&r).powi(2) - m.mahalanobis_squared(&r)).abs() <= 1e-9 * (1.0 + m.mahalanobis_squared(&r)));
    }

    #[test]
    fn alarm_iff_statistic_exceeds_threshold(alpha in 0.001..0.999f64, dim in 1usize..8, d in 0.0..50.0f64, squared: bool) {
        let cfg = DetectionConfig { alpha, dim, squared };
        let det = detect(d, &cfg);
        prop_assert_eq!(det.alarm, det.statistic > cfg.threshold());
        prop_assert!((det.normalized * cfg.threshold() - det.statistic).abs() <= 1e-12 * det.statistic.max(1.0));
    }

    #[test]
    fn recovery_is_idempotent_and_targeted(loc in 0usize..3, both: bool, s in 0.1..10.0f64) {
        let loc = [FaultLocation::EncoderOrVelocity, FaultLocation::Camera, FaultLocation::Unknown][loc];
        let mode = if both { ProprioRecovery::PositionAndVelocity } else { ProprioRecovery::PositionOnly };
        let mut p = UaicPrecisions::default();
        p.yv *= s;
        let (once, applied) = recover(&p, loc, mode);
        let (twice, _) = recover(&once, loc, mode);
        prop_assert_eq!(once, twice);
        prop_assert_eq!(applied, loc != FaultLocation::Unknown);
        prop_assert_eq!(once.x, p.x);
        prop_assert_eq!(once.u, p.u);
    }

    #[test]
    fn isolation_blames_a_single_subsystem_only(p: bool, v: bool) {
        let loc = isolate(p, v);
        prop_assert_eq!(loc == FaultLocation::EncoderOrVelocity, p && !v);
        prop_assert_eq!(loc == FaultLocation::Camera, v && !p);
    }

    #[test]
    fn no_detection_without_enough_consecutive_alarms(alarms in prop::collection::vec(any::<bool>(), 0..300)) {
        let cfg = MonitorConfig::default();
        let mut m = FaultMonitor::new(cfg);
        let mut run = 0;
        for (k, a) in alarms.iter().enumerate() {
            m.observe(k, *a, false, false);
            run = if *a { run + 1 } else { 0 };
            if m.detection_step().is_none() {
                prop_assert!(run < cfg.confirm_steps);
            }
        }
        if let Some(d) = m.detection_step() {
            prop_assert!(alarms[d + 1 - cfg.confirm_steps..=d].iter().all(|a| *a));
        }
    }

    #[test]
    fn applied_torque_respects_the_limit(q in v2(), qd in v2(), u in v2(), yq in v2(), target in v2(), limit in 1.0..100.0f64) {
        let b = UaicBelief { q, qd, u: u * 100.0, integral: Vector2::zeros() };
        let y = SensorReading { q: yq, qd, v: Planar.predict(&yq), step: 0 };
        let gains = UaicGains { torque_limit: limit, ..Default::default() };
        let out = controller_step(&b, &y, &Planar, &ControlLaw::default(), &target, &UaicPrecisions::default(), &gains, 1e-3).unwrap();
        prop_assert!(out.torque.iter().all(|t| t.abs() <= limit));
        prop_assert!(out.belief.integral.iter().all(|i| i.abs() <= ControlLaw::default().integral_limit));
    }

    #[test]
    fn schedule_returns_the_latest_started_target(times in prop::collection::vec(0.01..20.0f64, 0..5), t in 0.0..25.0f64) {
        let mut wps = vec![(0.0, Vector2::new(0.0, 0.0))];
        wps.extend(times.iter().enumerate().map(|(i, &ts)| (ts, Vector2::new(i as f64 + 1.0, 0.0))));
        let s = Schedule::new(wps.clone()).unwrap();
        let expected = wps.iter().filter(|(ts, _)| *ts <= t).max_by(|a, b| a.0.total_cmp(&b.0)).unwrap().1;
        prop_assert_eq!(s.target_at(t), expected);
    }
}

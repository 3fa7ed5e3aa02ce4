//! Detector properties over seeded runs of the default scenario.

use std::sync::OnceLock;

use rayon::prelude::*;
use uaic_core::GprModel;
use uaic_sim::config::FaultKindConfig;
use uaic_sim::{calibrate, compute_metrics, run_scenario, train_gpr, Calibration, ScenarioConfig, TrajectoryLog};

fn trained() -> &'static (GprModel, Calibration) {
    static CELL: OnceLock<(GprModel, Calibration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = ScenarioConfig::default();
        let gpr = train_gpr(&cfg).unwrap();
        let cal = calibrate(&cfg, &gpr).unwrap();
        (gpr, cal)
    })
}

fn runs(cfg: &ScenarioConfig, kind: FaultKindConfig, recovery: bool) -> Vec<TrajectoryLog> {
    let (gpr, cal) = trained();
    let mut c = cfg.clone();
    c.fault.kind = kind;
    c.fdi.recovery = recovery;
    (1..=100u64)
        .into_par_iter()
        .map(|seed| {
            let mut c = c.clone();
            c.seed = seed;
            run_scenario(&c, gpr, Some(cal)).unwrap()
        })
        .collect()
}

#[test]
fn encoder_channel_spread_matches_sensor_noise() {
    let cov = trained().1.main.stationary().covariance();
    for j in 0..2 {
        let sd = cov[(j, j)].sqrt();
        assert!((0.5e-3..=2e-3).contains(&sd), "channel q{}: {sd:e}", j + 1);
    }
}

#[test]
fn every_fault_is_detected_within_half_a_second() {
    let cfg = ScenarioConfig::default();
    for kind in [FaultKindConfig::EncoderFreeze, FaultKindConfig::CameraBias] {
        for log in runs(&cfg, kind, true) {
            let m = compute_metrics(&log);
            assert!(m.detection_delay.is_some_and(|d| d <= 0.5), "{kind:?} seed {}: {:?}", log.seed, m.detection_delay);
        }
    }
}

#[test]
fn camera_bias_crosses_the_visual_threshold_only() {
    let cfg = ScenarioConfig::default();
    let onset = (cfg.fault.onset / cfg.dt).round() as usize;
    for log in runs(&cfg, FaultKindConfig::CameraBias, false) {
        let after = &log.records[onset..];
        let peak_v = after.iter().map(|r| r.normalized_v).fold(0.0, f64::max);
        let peak_p = after.iter().map(|r| r.normalized_p).fold(0.0, f64::max);
        assert!(peak_v > 1.0, "seed {}: visual peak {peak_v}", log.seed);
        assert!(peak_p <= 1.0, "seed {}: proprio peak {peak_p}", log.seed);
    }
}

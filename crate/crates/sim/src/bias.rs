//! Goal-change transients of the standard AIC residual.
//!
//! The standard AIC belief is pulled toward the goal, so every goal change
//! shows up as a burst in the position prediction error even without a
//! fault. This module measures that burst.

use serde::{Deserialize, Serialize};
use uaic_core::gpr::GprModel;

use crate::config::{ControllerKind, FaultKindConfig, ScenarioConfig};
use crate::error::SimResult;
use crate::scenario::{run_scenario, TrajectoryLog};

/// Averaging window on each side of a goal change (s).
pub const SPIKE_WINDOW: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSpike {
    pub time: f64,
    /// Mean position SPE quadratic over the window before the change.
    pub pre_mean: f64,
    /// Largest position SPE quadratic in the window after it.
    pub peak: f64,
    pub ratio: f64,
}

/// Position-channel SPE spike at every goal change in `log`.
pub fn goal_spikes(log: &TrajectoryLog, window: f64) -> Vec<GoalSpike> {
    let spe = |r: &crate::StepRecord| r.spe_quadratic[0];
    log.switch_times
        .iter()
        .map(|&ts| {
            let pre: Vec<f64> = log.records.iter().filter(|r| r.t >= ts - window && r.t < ts).map(spe).collect();
            let peak = log
                .records
                .iter()
                .filter(|r| r.t >= ts && r.t < ts + window)
                .map(spe)
                .fold(f64::NAN, f64::max);
            let pre_mean = pre.iter().sum::<f64>() / pre.len() as f64;
            GoalSpike {
                time: ts,
                pre_mean,
                peak,
                ratio: peak / pre_mean,
            }
        })
        .collect()
}

/// The configured scenario run with the standard AIC and no fault.
pub fn bias_config(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut c = cfg.clone();
    c.controller = ControllerKind::Aic;
    c.fault.kind = FaultKindConfig::None;
    c
}

pub fn bias_demo(cfg: &ScenarioConfig, gpr: &GprModel) -> SimResult<(TrajectoryLog, Vec<GoalSpike>)> {
    let log = run_scenario(&bias_config(cfg), gpr, None)?;
    let spikes = goal_spikes(&log, SPIKE_WINDOW);
    Ok((log, spikes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{blank_record, FdiOutcome};

    #[test]
    fn spike_ratio_by_hand() {
        let records = (0..20)
            .map(|k| {
                let mut r = blank_record(k, k as f64 * 0.1);
                r.spe_quadratic[0] = match k {
                    5..=9 => 2.0,
                    11 => 50.0,
                    _ => 1.0,
                };
                r
            })
            .collect();
        let log = TrajectoryLog {
            dt: 0.1,
            seed: 0,
            threshold: f64::NAN,
            fault_onset: None,
            switch_times: vec![1.0],
            records,
            fdi: FdiOutcome {
                detection_step: None,
                isolation_step: None,
                location: None,
                recovered: false,
                isolation_failure: None,
            },
        };
        let s = goal_spikes(&log, 0.5);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].pre_mean, 2.0);
        assert_eq!(s[0].peak, 50.0);
        assert_eq!(s[0].ratio, 25.0);
    }
}

//! Scalar summaries of a trajectory log.

use serde::{Deserialize, Serialize};

use uaic_core::fdi::FaultLocation;

use crate::scenario::TrajectoryLog;

/// Length of the averaging window for steady-state errors (s).
pub const STEADY_WINDOW: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Signed mean of `q − μ_d` over the final second, per joint.
    pub e_ss: [f64; 2],
    /// Same quantity at the end of every waypoint segment.
    pub e_ss_waypoints: Vec<[f64; 2]>,
    /// RMSE between `μ_q` and the true `q` over the run, per joint.
    pub rmse: [f64; 2],
    /// Confirmed detection time minus fault time (s).
    pub detection_delay: Option<f64>,
    pub isolation_delay: Option<f64>,
    pub isolated_as: Option<String>,
    pub recovered: bool,
    /// Single-step alarms raised before the fault, or over the whole run
    /// without one.
    pub false_alarms: usize,
    /// A detection was confirmed before the fault (or in a healthy run).
    pub false_detection: bool,
}

fn mean_error(log: &TrajectoryLog, lo: usize, hi: usize) -> [f64; 2] {
    let recs = &log.records[lo..hi];
    if recs.is_empty() {
        return [f64::NAN; 2];
    }
    let n = recs.len() as f64;
    let mut s = [0.0; 2];
    for r in recs {
        for (j, acc) in s.iter_mut().enumerate() {
            *acc += r.q[j] - r.target[j];
        }
    }
    [s[0] / n, s[1] / n]
}

pub fn compute_metrics(log: &TrajectoryLog) -> Metrics {
    let n = log.records.len();
    let window = (STEADY_WINDOW / log.dt).round() as usize;
    let step_of = |t: f64| ((t / log.dt).round() as usize).min(n);

    let mut bounds: Vec<usize> = log.switch_times.iter().map(|t| step_of(*t)).collect();
    bounds.push(n);
    let e_ss_waypoints = bounds.iter().map(|&end| mean_error(log, end.saturating_sub(window), end)).collect();

    let mut sq = [0.0; 2];
    for r in &log.records {
        for (j, acc) in sq.iter_mut().enumerate() {
            *acc += (r.mu_q[j] - r.q[j]).powi(2);
        }
    }
    let rmse = if n == 0 { [0.0; 2] } else { sq.map(|s| (s / n as f64).sqrt()) };

    let onset_step = log.fault_onset.map(step_of);
    let pre_fault = onset_step.unwrap_or(n).min(n);
    let false_alarms = log.records[..pre_fault].iter().filter(|r| r.alarm).count();
    let detection = log.fdi.detection_step;
    let false_detection = matches!(detection, Some(k) if k < pre_fault);
    let delay = |step: Option<usize>| match (step, log.fault_onset) {
        (Some(k), Some(t0)) if k >= pre_fault => Some(k as f64 * log.dt - t0),
        _ => None,
    };

    Metrics {
        e_ss: mean_error(log, n.saturating_sub(window), n),
        e_ss_waypoints,
        rmse,
        detection_delay: delay(detection),
        isolation_delay: delay(log.fdi.isolation_step),
        isolated_as: log.fdi.location.map(|l| l.as_str().to_string()),
        recovered: log.fdi.recovered,
        false_alarms,
        false_detection,
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    (mean, var.sqrt())
}

impl Metrics {
    /// Every field as named scalars. Booleans and the isolation verdict
    /// become 0/1 indicators; absent delays are `None`.
    pub fn scalars(&self) -> Vec<(String, Option<f64>)> {
        let ind = |b: bool| Some(if b { 1.0 } else { 0.0 });
        let mut out = vec![
            ("e_ss_q1".to_string(), Some(self.e_ss[0])),
            ("e_ss_q2".to_string(), Some(self.e_ss[1])),
        ];
        for (i, e) in self.e_ss_waypoints.iter().enumerate() {
            out.push((format!("e_ss_wp{}_q1", i + 1), Some(e[0])));
            out.push((format!("e_ss_wp{}_q2", i + 1), Some(e[1])));
        }
        out.push(("rmse_q1".into(), Some(self.rmse[0])));
        out.push(("rmse_q2".into(), Some(self.rmse[1])));
        out.push(("detection_delay".into(), self.detection_delay));
        out.push(("isolation_delay".into(), self.isolation_delay));
        for loc in [FaultLocation::EncoderOrVelocity, FaultLocation::Camera, FaultLocation::Unknown] {
            out.push((
                format!("isolated_{}", loc.as_str()),
                ind(self.isolated_as.as_deref() == Some(loc.as_str())),
            ));
        }
        out.push(("recovered".into(), ind(self.recovered)));
        out.push(("false_alarms".into(), Some(self.false_alarms as f64)));
        out.push(("false_detection".into(), ind(self.false_detection)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{blank_record, FdiOutcome};

    fn log_with(q: impl Fn(usize) -> [f64; 2], n: usize) -> TrajectoryLog {
        TrajectoryLog {
            dt: 0.01,
            seed: 0,
            threshold: f64::NAN,
            fault_onset: Some(0.5),
            switch_times: vec![0.6],
            records: (0..n)
                .map(|k| {
                    let mut r = blank_record(k, k as f64 * 0.01);
                    r.q = q(k);
                    r.mu_q = [r.q[0] + 0.1, r.q[1]];
                    r.alarm = k == 10 || k == 70;
                    r
                })
                .collect(),
            fdi: FdiOutcome {
                detection_step: Some(55),
                isolation_step: Some(60),
                location: Some(FaultLocation::Camera),
                recovered: true,
                isolation_failure: None,
            },
        }
    }

    #[test]
    fn hand_computed_values() {
        // q1 is 0.02 above target for the last 100 steps, 0 before
        let m = compute_metrics(&log_with(|k| [if k >= 100 { 0.02 } else { 0.0 }, 0.0], 200));
        assert!((m.e_ss[0] - 0.02).abs() < 1e-15);
        assert_eq!(m.e_ss[1], 0.0);
        assert_eq!(m.e_ss_waypoints.len(), 2);
        assert_eq!(m.e_ss_waypoints[0], [0.0, 0.0]);
        assert!((m.rmse[0] - 0.1).abs() < 1e-12);
        assert!((m.detection_delay.unwrap() - 0.05).abs() < 1e-12);
        assert!((m.isolation_delay.unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(m.isolated_as.as_deref(), Some("camera"));
        assert_eq!(m.false_alarms, 1);
        assert!(!m.false_detection);
    }

    #[test]
    fn early_detection_is_false() {
        let mut log = log_with(|_| [0.0; 2], 200);
        log.fdi.detection_step = Some(20);
        let m = compute_metrics(&log);
        assert!(m.false_detection);
        assert_eq!(m.detection_delay, None);
    }

    #[test]
    fn scalars_cover_every_field() {
        let m = compute_metrics(&log_with(|_| [0.0; 2], 200));
        let names: Vec<String> = m.scalars().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.len(), 2 + 4 + 2 + 2 + 3 + 3);
        assert!(names.contains(&"isolated_camera".to_string()));
    }

    #[test]
    fn mean_std_known() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(mean_std(&[]).0.is_nan());
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
    }
}

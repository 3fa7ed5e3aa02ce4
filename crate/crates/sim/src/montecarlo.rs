//! Seeded batches of independent runs.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use uaic_core::gpr::GprModel;

use crate::calibration::Calibration;
use crate::config::ScenarioConfig;
use crate::error::{SimError, SimResult};
use crate::metrics::{compute_metrics, mean_std, Metrics};
use crate::scenario::run_scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub metrics: Metrics,
}

/// Runs `cfg` once per seed. Results come back sorted by seed whatever the
/// scheduling, so summaries do not depend on the thread count.
pub fn run_batch(
    cfg: &ScenarioConfig,
    gpr: &GprModel,
    calib: Option<&Calibration>,
    seeds: &[u64],
) -> SimResult<Vec<RunResult>> {
    let mut out = seeds
        .par_iter()
        .map(|&seed| {
            let mut c = cfg.clone();
            c.seed = seed;
            let log = run_scenario(&c, gpr, calib)?;
            Ok(RunResult {
                seed,
                metrics: compute_metrics(&log),
            })
        })
        .collect::<SimResult<Vec<_>>>()?;
    out.sort_by_key(|r| r.seed);
    Ok(out)
}

/// Seeds `first, first + 1, …` for `runs` runs.
pub fn seed_range(first: u64, runs: usize) -> Vec<u64> {
    (0..runs as u64).map(|i| first.wrapping_add(i)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub mean: f64,
    pub std: f64,
    /// Runs in which the field was defined.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub fields: BTreeMap<String, FieldSummary>,
}

pub fn summarize(results: &[RunResult]) -> BatchSummary {
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        for (name, v) in r.metrics.scalars() {
            let slot = values.entry(name).or_default();
            if let Some(v) = v {
                slot.push(v);
            }
        }
    }
    let fields = values
        .into_iter()
        .map(|(name, v)| {
            let (mean, std) = mean_std(&v);
            (name, FieldSummary { mean, std, count: v.len() })
        })
        .collect();
    BatchSummary {
        runs: results.len(),
        seeds: results.iter().map(|r| r.seed).collect(),
        fields,
    }
}

/// One row per run: the seed, then every metric scalar. Undefined values
/// are left empty.
pub fn write_runs_csv(results: &[RunResult], path: &Path) -> SimResult<()> {
    let fmt = |e: csv::Error| SimError::format(path, e);
    let mut w = csv::Writer::from_path(path).map_err(fmt)?;
    let Some(first) = results.first() else {
        w.write_record(["seed"]).map_err(fmt)?;
        return w.flush().map_err(|e| SimError::io(path, e));
    };
    let mut header = vec!["seed".to_string()];
    header.extend(first.metrics.scalars().into_iter().map(|(n, _)| n));
    w.write_record(&header).map_err(fmt)?;
    for r in results {
        let mut row = vec![r.seed.to_string()];
        row.extend(r.metrics.scalars().into_iter().map(|(_, v)| v.map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&row).map_err(fmt)?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

pub fn write_summary(summary: &BatchSummary, path: &Path) -> SimResult<()> {
    let json = serde_json::to_string_pretty(summary).expect("summary serializes");
    std::fs::write(path, json + "\n").map_err(|e| SimError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(seed: u64, e: f64, delay: Option<f64>) -> RunResult {
        RunResult {
            seed,
            metrics: Metrics {
                e_ss: [e, 0.0],
                e_ss_waypoints: vec![[e, 0.0]],
                rmse: [0.0; 2],
                detection_delay: delay,
                isolation_delay: None,
                isolated_as: None,
                recovered: false,
                false_alarms: 0,
                false_detection: false,
            },
        }
    }

    #[test]
    fn summary_skips_undefined_values() {
        let s = summarize(&[result(1, 1.0, Some(0.2)), result(2, 3.0, None)]);
        assert_eq!(s.runs, 2);
        assert_eq!(s.fields["e_ss_q1"].mean, 2.0);
        assert_eq!(s.fields["detection_delay"].count, 1);
        assert_eq!(s.fields["detection_delay"].mean, 0.2);
        assert_eq!(s.fields["isolation_delay"].count, 0);
        assert!(s.fields["isolation_delay"].mean.is_nan());
    }

    #[test]
    fn seeds_are_consecutive() {
        assert_eq!(seed_range(5, 3), vec![5, 6, 7]);
        assert_eq!(seed_range(u64::MAX, 2), vec![u64::MAX, 0]);
    }
}

//! Result files: trajectory CSV, metrics JSON and the normalized distance
//! series.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! trajectory parsed back from CSV equals the in-memory log bit for bit.
//! Values that do not apply to a run are written as `NaN`.

use std::fs;
use std::path::{Path, PathBuf};

use uaic_core::fdi::FaultLocation;

use crate::config::ScenarioConfig;
use crate::error::{SimError, SimResult};
use crate::metrics::Metrics;
use crate::scenario::{FdiOutcome, StepRecord, TrajectoryLog};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const NORMALIZED_FILE: &str = "normalized_dm.csv";

/// Column order of the trajectory CSV.
pub const TRAJECTORY_COLUMNS: [&str; 46] = [
    "step", "t", "q1", "q2", "qd1", "qd2", "target1", "target2", "mu_q1", "mu_q2", "mu_qd1", "mu_qd2", "mu_u1",
    "mu_u2", "u1", "u2", "y_q1", "y_q2", "y_qd1", "y_qd2", "y_vx", "y_vz", "r_q1", "r_q2", "r_qd1", "r_qd2",
    "r_vx", "r_vz", "rp_q1", "rp_q2", "rp_qd1", "rp_qd2", "rv_x", "rv_z", "spe_q", "spe_qd", "spe_v",
    "free_energy", "statistic", "normalized", "alarm", "detected", "recovered", "normalized_p", "normalized_v",
    "verdict",
];

pub const NORMALIZED_COLUMNS: [&str; 7] =
    ["t", "statistic", "threshold", "normalized", "normalized_p", "normalized_v", "alarm"];

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

fn record_fields(r: &StepRecord) -> Vec<String> {
    let mut f = Vec::with_capacity(TRAJECTORY_COLUMNS.len());
    f.push(r.step.to_string());
    let floats = [r.t]
        .iter()
        .chain(&r.q)
        .chain(&r.qd)
        .chain(&r.target)
        .chain(&r.mu_q)
        .chain(&r.mu_qd)
        .chain(&r.mu_u)
        .chain(&r.torque)
        .chain(&r.y_q)
        .chain(&r.y_qd)
        .chain(&r.y_v)
        .chain(&r.residual)
        .chain(&r.residual_p)
        .chain(&r.residual_v)
        .chain(&r.spe_quadratic)
        .chain([r.free_energy, r.statistic, r.normalized].iter())
        .map(f64::to_string)
        .collect::<Vec<_>>();
    f.extend(floats);
    f.push(flag(r.alarm));
    f.push(flag(r.detected));
    f.push(flag(r.recovered));
    f.push(r.normalized_p.to_string());
    f.push(r.normalized_v.to_string());
    f.push(r.verdict.map(|v| v.as_str().to_string()).unwrap_or_default());
    f
}

pub fn write_trajectory_csv(log: &TrajectoryLog, path: &Path) -> SimResult<()> {
    let fmt = |e: csv::Error| SimError::format(path, e);
    let mut w = csv::Writer::from_path(path).map_err(fmt)?;
    w.write_record(TRAJECTORY_COLUMNS).map_err(fmt)?;
    for r in &log.records {
        w.write_record(record_fields(r)).map_err(fmt)?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

struct Fields<'a> {
    rec: &'a csv::StringRecord,
    next: usize,
}

impl Fields<'_> {
    fn raw(&mut self) -> Result<&str, String> {
        let i = self.next;
        self.next += 1;
        self.rec.get(i).ok_or_else(|| format!("missing column {}", TRAJECTORY_COLUMNS[i]))
    }

    fn float(&mut self) -> Result<f64, String> {
        let col = TRAJECTORY_COLUMNS[self.next];
        let s = self.raw()?;
        s.parse().map_err(|_| format!("column {col}: {s:?} is not a number"))
    }

    fn floats<const N: usize>(&mut self) -> Result<[f64; N], String> {
        let mut out = [0.0; N];
        for v in &mut out {
            *v = self.float()?;
        }
        Ok(out)
    }

    fn flag(&mut self) -> Result<bool, String> {
        let col = TRAJECTORY_COLUMNS[self.next];
        match self.raw()? {
            "0" => Ok(false),
            "1" => Ok(true),
            s => Err(format!("column {col}: expected 0 or 1, got {s:?}")),
        }
    }
}

fn parse_record(rec: &csv::StringRecord) -> Result<StepRecord, String> {
    if rec.len() != TRAJECTORY_COLUMNS.len() {
        return Err(format!("expected {} columns, got {}", TRAJECTORY_COLUMNS.len(), rec.len()));
    }
    let mut f = Fields { rec, next: 0 };
    let step = f.raw()?.parse().map_err(|_| "column step is not an integer".to_string())?;
    Ok(StepRecord {
        step,
        t: f.float()?,
        q: f.floats()?,
        qd: f.floats()?,
        target: f.floats()?,
        mu_q: f.floats()?,
        mu_qd: f.floats()?,
        mu_u: f.floats()?,
        torque: f.floats()?,
        y_q: f.floats()?,
        y_qd: f.floats()?,
        y_v: f.floats()?,
        residual: f.floats()?,
        residual_p: f.floats()?,
        residual_v: f.floats()?,
        spe_quadratic: f.floats()?,
        free_energy: f.float()?,
        statistic: f.float()?,
        normalized: f.float()?,
        alarm: f.flag()?,
        detected: f.flag()?,
        recovered: f.flag()?,
        normalized_p: f.float()?,
        normalized_v: f.float()?,
        verdict: match f.raw()? {
            "" => None,
            s => Some(FaultLocation::from_name(s).ok_or_else(|| format!("unknown verdict {s:?}"))?),
        },
    })
}

pub fn read_trajectory_csv(path: &Path) -> SimResult<Vec<StepRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| SimError::format(path, e))?;
    let header = r.headers().map_err(|e| SimError::format(path, e))?;
    if header.iter().ne(TRAJECTORY_COLUMNS) {
        return Err(SimError::format(path, "header does not match the trajectory column order"));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| SimError::format(path, e))?;
        let parsed = parse_record(&rec).map_err(|e| SimError::format(path, format!("row {}: {e}", line + 1)))?;
        out.push(parsed);
    }
    Ok(out)
}

/// Rebuilds a log from CSV records and the scenario that produced them.
pub fn log_from_records(records: Vec<StepRecord>, cfg: &ScenarioConfig) -> SimResult<TrajectoryLog> {
    let schedule = cfg.schedule()?;
    let detection_step = records.iter().find(|r| r.detected).map(|r| r.step);
    let isolated = records.iter().find(|r| r.verdict.is_some());
    let threshold = if cfg.fdi.enabled && cfg.controller == crate::config::ControllerKind::Uaic {
        cfg.fdi.detection(uaic_core::fdi::RESIDUAL_DIM).threshold()
    } else {
        f64::NAN
    };
    Ok(TrajectoryLog {
        dt: cfg.dt,
        seed: cfg.seed,
        threshold,
        fault_onset: cfg.fault_spec().is_active().then_some(cfg.fault.onset),
        switch_times: schedule.switch_times().collect(),
        fdi: FdiOutcome {
            detection_step,
            isolation_step: isolated.map(|r| r.step),
            location: isolated.and_then(|r| r.verdict),
            recovered: records.iter().any(|r| r.recovered),
            isolation_failure: None,
        },
        records,
    })
}

pub fn write_metrics(metrics: &Metrics, path: &Path) -> SimResult<()> {
    let json = serde_json::to_string_pretty(metrics).expect("metrics serialize");
    fs::write(path, json + "\n").map_err(|e| SimError::io(path, e))
}

pub fn read_metrics(path: &Path) -> SimResult<Metrics> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| SimError::format(path, e))
}

/// Main-detector statistic over time, normalized by its threshold `n/α`,
/// next to the two isolation statistics.
pub fn write_normalized_csv(log: &TrajectoryLog, path: &Path) -> SimResult<()> {
    let fmt = |e: csv::Error| SimError::format(path, e);
    let mut w = csv::Writer::from_path(path).map_err(fmt)?;
    w.write_record(NORMALIZED_COLUMNS).map_err(fmt)?;
    for r in &log.records {
        w.write_record([
            r.t.to_string(),
            r.statistic.to_string(),
            log.threshold.to_string(),
            r.normalized.to_string(),
            r.normalized_p.to_string(),
            r.normalized_v.to_string(),
            flag(r.alarm),
        ])
        .map_err(fmt)?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

/// Writes the three standard result files into `dir`, creating it.
pub fn emit_outputs(log: &TrajectoryLog, metrics: &Metrics, dir: &Path) -> SimResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let paths = [TRAJECTORY_FILE, METRICS_FILE, NORMALIZED_FILE].map(|f| dir.join(f));
    write_trajectory_csv(log, &paths[0])?;
    write_metrics(metrics, &paths[1])?;
    write_normalized_csv(log, &paths[2])?;
    Ok(paths.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::blank_record;

    fn sample_log(n: usize) -> TrajectoryLog {
        let records = (0..n)
            .map(|k| {
                let mut r = blank_record(k, k as f64 * 1e-3);
                r.q = [0.1 + k as f64 / 3.0, -1.0 / 7.0];
                r.residual = [1e-300, -0.0, 2.5, f64::MAX, f64::MIN_POSITIVE, 1.0 / 3.0];
                r.statistic = 3.0 * k as f64;
                r.normalized = r.statistic / 120.0;
                r.alarm = k % 2 == 1;
                r.detected = k > 1;
                r.verdict = (k == 2).then_some(FaultLocation::Camera);
                r
            })
            .collect();
        TrajectoryLog {
            dt: 1e-3,
            seed: 3,
            threshold: 120.0,
            fault_onset: None,
            switch_times: vec![],
            records,
            fdi: FdiOutcome {
                detection_step: None,
                isolation_step: None,
                location: None,
                recovered: false,
                isolation_failure: None,
            },
        }
    }

    fn same(a: &StepRecord, b: &StepRecord) -> bool {
        // NaN != NaN, so compare the CSV rendering instead
        record_fields(a) == record_fields(b)
    }

    #[test]
    fn empty_log_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_trajectory_csv(&sample_log(0), &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.trim_end(), TRAJECTORY_COLUMNS.join(","));
        assert!(read_trajectory_csv(&p).unwrap().is_empty());
    }

    #[test]
    fn trajectory_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let log = sample_log(5);
        write_trajectory_csv(&log, &p).unwrap();
        let back = read_trajectory_csv(&p).unwrap();
        assert_eq!(back.len(), 5);
        for (a, b) in log.records.iter().zip(&back) {
            assert!(same(a, b));
            assert_eq!(a.q[0].to_bits(), b.q[0].to_bits());
            assert_eq!(a.residual[0].to_bits(), b.residual[0].to_bits());
        }
    }

    #[test]
    fn record_width_matches_header() {
        assert_eq!(record_fields(&blank_record(0, 0.0)).len(), TRAJECTORY_COLUMNS.len());
    }

    #[test]
    fn rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_trajectory_csv(&p), Err(SimError::Format { .. })));
    }

    #[test]
    fn rejects_bad_cell() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_trajectory_csv(&sample_log(1), &p).unwrap();
        let text = fs::read_to_string(&p).unwrap().replacen(",0.1,", ",zero,", 1);
        fs::write(&p, text).unwrap();
        let err = read_trajectory_csv(&p).unwrap_err().to_string();
        assert!(err.contains("q1"), "{err}");
    }

    #[test]
    fn normalized_column_is_statistic_over_threshold() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        write_normalized_csv(&sample_log(4), &p).unwrap();
        let mut r = csv::Reader::from_path(&p).unwrap();
        for rec in r.records() {
            let rec = rec.unwrap();
            let v: Vec<f64> = (1..4).map(|i| rec[i].parse().unwrap()).collect();
            assert!((v[2] - v[0] / v[1]).abs() <= 1e-12);
        }
    }
}

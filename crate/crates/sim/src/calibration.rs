//! Healthy Monte Carlo calibration of the residual statistics.

use std::fs;
use std::path::Path;

use log::info;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use uaic_core::fdi::{GaussianMoments, ResidualStats, StatsAccumulator};
use uaic_core::gpr::GprModel;

use crate::config::{FaultKindConfig, ScenarioConfig};
use crate::error::{SimError, SimResult};
use crate::scenario::run_scenario;

pub const CALIBRATION_VERSION: u32 = 1;

/// Runs accumulated sequentially before partial sums are merged. Fixed so
/// the floating-point summation order does not depend on the thread count.
const CHUNK: usize = 10;

/// Residual statistics of the main loop and both isolation estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub scenario_hash: String,
    pub main: ResidualStats,
    pub proprio: ResidualStats,
    pub visual: ResidualStats,
}

struct Accumulators {
    main: StatsAccumulator,
    proprio: StatsAccumulator,
    visual: StatsAccumulator,
}

impl Accumulators {
    fn new() -> Self {
        Self {
            main: StatsAccumulator::new(6),
            proprio: StatsAccumulator::new(4),
            visual: StatsAccumulator::new(2),
        }
    }

    fn merge(&mut self, other: &Self) -> SimResult<()> {
        let ctx = |e| SimError::core("merging calibration sums", e);
        self.main.merge(&other.main).map_err(ctx)?;
        self.proprio.merge(&other.proprio).map_err(ctx)?;
        self.visual.merge(&other.visual).map_err(ctx)
    }
}

/// Healthy variant of a scenario used for calibration.
pub fn calibration_config(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut c = cfg.clone();
    c.fault.kind = FaultKindConfig::None;
    c.fdi.enabled = false;
    c
}

fn accumulate(cfg: &ScenarioConfig, gpr: &GprModel, seeds: &[u64]) -> SimResult<Accumulators> {
    let mut acc = Accumulators::new();
    let base = calibration_config(cfg);
    for &seed in seeds {
        let mut c = base.clone();
        c.seed = seed;
        let log = run_scenario(&c, gpr, None)?;
        let ctx = |e| SimError::core(format!("calibration run with seed {seed}"), e);
        for r in &log.records {
            acc.main.push(r.step, &r.residual).map_err(ctx)?;
            acc.proprio.push(r.step, &r.residual_p).map_err(ctx)?;
            acc.visual.push(r.step, &r.residual_v).map_err(ctx)?;
        }
        acc.main.finish_run();
        acc.proprio.finish_run();
        acc.visual.finish_run();
    }
    Ok(acc)
}

/// Seeds `cfg.fdi.calibration.seed + i` for `i < runs`.
pub fn calibration_seeds(cfg: &ScenarioConfig) -> Vec<u64> {
    let c = &cfg.fdi.calibration;
    (0..c.runs as u64).map(|i| c.seed.wrapping_add(i)).collect()
}

pub fn calibrate(cfg: &ScenarioConfig, gpr: &GprModel) -> SimResult<Calibration> {
    let seeds = calibration_seeds(cfg);
    let parts: Vec<SimResult<Accumulators>> = seeds.par_chunks(CHUNK).map(|s| accumulate(cfg, gpr, s)).collect();
    let mut total = Accumulators::new();
    for p in parts {
        total.merge(&p?)?;
    }
    let settings = cfg.fdi.calibration.to_core();
    let ctx = |what: &str| {
        let what = what.to_string();
        move |e| SimError::core(format!("{what} residual statistics"), e)
    };
    let cal = Calibration {
        scenario_hash: cfg.calibration_hash(),
        main: total.main.finalize(&settings).map_err(ctx("main"))?,
        proprio: total.proprio.finalize(&settings).map_err(ctx("proprioceptive"))?,
        visual: total.visual.finalize(&settings).map_err(ctx("visual"))?,
    };
    info!(
        "calibration: {} runs, transient steps main/proprio/visual = {}/{}/{}",
        seeds.len(),
        cal.main.transient_steps(),
        cal.proprio.transient_steps(),
        cal.visual.transient_steps()
    );
    Ok(cal)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MomentsFile {
    samples: usize,
    mean: Vec<f64>,
    /// Upper triangle, row-major.
    covariance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StatsFile {
    dim: usize,
    runs: usize,
    stationary: MomentsFile,
    /// `(step, moments)` for steps that keep their own moments.
    transient: Vec<(usize, MomentsFile)>,
    horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CalibrationFile {
    version: u32,
    scenario_hash: String,
    main: StatsFile,
    proprio: StatsFile,
    visual: StatsFile,
}

fn moments_to_file(m: &GaussianMoments) -> MomentsFile {
    let n = m.dim();
    let c = m.covariance();
    let mut covariance = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            covariance.push(c[(i, j)]);
        }
    }
    MomentsFile {
        samples: m.samples(),
        mean: m.mean().iter().copied().collect(),
        covariance,
    }
}

fn moments_from_file(f: &MomentsFile, n: usize) -> Result<GaussianMoments, String> {
    if f.mean.len() != n || f.covariance.len() != n * (n + 1) / 2 {
        return Err(format!("moment block has the wrong size for dimension {n}"));
    }
    let mut c = DMatrix::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        for j in i..n {
            c[(i, j)] = f.covariance[idx];
            c[(j, i)] = f.covariance[idx];
            idx += 1;
        }
    }
    GaussianMoments::new(DVector::from_vec(f.mean.clone()), c, f.samples).map_err(|e| e.to_string())
}

fn stats_to_file(s: &ResidualStats) -> StatsFile {
    StatsFile {
        dim: s.dim(),
        runs: s.runs(),
        stationary: moments_to_file(s.stationary()),
        transient: s
            .per_step()
            .iter()
            .enumerate()
            .filter_map(|(k, m)| m.as_ref().map(|m| (k, moments_to_file(m))))
            .collect(),
        horizon: s.horizon(),
    }
}

fn stats_from_file(f: &StatsFile) -> Result<ResidualStats, String> {
    let mut per_step = vec![None; f.horizon];
    for (k, m) in &f.transient {
        let slot = per_step.get_mut(*k).ok_or_else(|| format!("step {k} beyond horizon {}", f.horizon))?;
        *slot = Some(moments_from_file(m, f.dim)?);
    }
    ResidualStats::from_parts(per_step, moments_from_file(&f.stationary, f.dim)?, f.runs).map_err(|e| e.to_string())
}

impl Calibration {
    pub fn save(&self, path: &Path) -> SimResult<()> {
        let file = CalibrationFile {
            version: CALIBRATION_VERSION,
            scenario_hash: self.scenario_hash.clone(),
            main: stats_to_file(&self.main),
            proprio: stats_to_file(&self.proprio),
            visual: stats_to_file(&self.visual),
        };
        let json = serde_json::to_string(&file).expect("calibration serializes");
        fs::write(path, json).map_err(|e| SimError::io(path, e))
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(SimError::CalibrationMissing(format!("{} not found", path.display())))
            }
            Err(e) => return Err(SimError::io(path, e)),
        };
        let f: CalibrationFile = serde_json::from_str(&text).map_err(|e| SimError::format(path, e))?;
        if f.version != CALIBRATION_VERSION {
            return Err(SimError::format(path, format!("unsupported calibration version {}", f.version)));
        }
        let conv = |s: &StatsFile| stats_from_file(s).map_err(|e| SimError::format(path, e));
        Ok(Self {
            scenario_hash: f.scenario_hash,
            main: conv(&f.main)?,
            proprio: conv(&f.proprio)?,
            visual: conv(&f.visual)?,
        })
    }
}

//! Camera model training and its artifact file.

use std::fs;
use std::path::Path;

use log::info;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use uaic_core::gpr::{fit, optimize_hyperparams, GprModel, GprTrainingSet};
use uaic_core::plant::noisy_camera;
use uaic_core::{GprHyperparams, Vector2};

use crate::config::ScenarioConfig;
use crate::error::{SimError, SimResult};

pub const GPR_ARTIFACT_VERSION: u32 = 1;

/// Camera readings on a workspace grid, each averaged over
/// `samples_per_point` noisy frames.
pub fn training_set(cfg: &ScenarioConfig) -> SimResult<GprTrainingSet> {
    let arm = cfg.arm();
    let cam = cfg.camera()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.gpr.seed);
    let n = cfg.gpr.samples_per_point;
    let mut inputs = Vec::new();
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    for q in cfg.workspace().grid(cfg.gpr.grid) {
        let mut acc = Vector2::zeros();
        for _ in 0..n {
            acc += noisy_camera(&q, &arm, &cam, cfg.noise.sigma_v, &mut rng)
                .map_err(|e| SimError::core("gpr training data", e))?;
        }
        acc /= n as f64;
        inputs.push(q);
        xs.push(acc[0]);
        zs.push(acc[1]);
    }
    GprTrainingSet::new(inputs, xs, zs).map_err(|e| SimError::core("gpr training data", e))
}

pub fn train_gpr(cfg: &ScenarioConfig) -> SimResult<GprModel> {
    train_gpr_on(cfg, training_set(cfg)?)
}

/// Fits the camera model to externally supplied data, with the
/// hyperparameter settings of `cfg.gpr`.
pub fn train_gpr_on(cfg: &ScenarioConfig, train: GprTrainingSet) -> SimResult<GprModel> {
    let init = cfg.gpr.initial_hyperparams();
    let hyper = if cfg.gpr.optimize {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.gpr.seed.wrapping_add(1));
        let out = optimize_hyperparams(&train, init, &cfg.gpr.optimizer(), &mut rng)
            .map_err(|e| SimError::core("gpr hyperparameter search", e))?;
        info!(
            "gpr: log marginal likelihood {:.3} -> {:.3} (converged: {})",
            out.initial_log_marginal_likelihood, out.log_marginal_likelihood, out.converged
        );
        out.hyper
    } else {
        init
    };
    let model = fit(train, hyper).map_err(|e| SimError::core("gpr fit", e))?;
    if model.jitter() > 0.0 {
        log::warn!("gpr: kernel needed {:e} diagonal jitter", model.jitter());
    }
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GprArtifact {
    pub version: u32,
    pub config_hash: String,
    pub signal_var: f64,
    pub noise_var: f64,
    pub theta: [f64; 2],
    pub log_marginal_likelihood: f64,
    pub inputs: Vec<[f64; 2]>,
    pub targets_x: Vec<f64>,
    pub targets_z: Vec<f64>,
}

impl GprArtifact {
    pub fn from_model(model: &GprModel, config_hash: &str) -> Self {
        let h = model.hyperparams();
        let t = model.training_set();
        Self {
            version: GPR_ARTIFACT_VERSION,
            config_hash: config_hash.to_string(),
            signal_var: h.signal_var,
            noise_var: h.noise_var,
            theta: h.theta,
            log_marginal_likelihood: model.log_marginal_likelihood(),
            inputs: t.inputs().iter().map(|q| [q[0], q[1]]).collect(),
            targets_x: t.targets_x().iter().copied().collect(),
            targets_z: t.targets_z().iter().copied().collect(),
        }
    }

    /// Refits the stored data with the stored hyperparameters.
    pub fn to_model(&self) -> uaic_core::Result<GprModel> {
        let train = GprTrainingSet::new(
            self.inputs.iter().map(|q| Vector2::from(*q)).collect(),
            self.targets_x.clone(),
            self.targets_z.clone(),
        )?;
        fit(
            train,
            GprHyperparams {
                signal_var: self.signal_var,
                noise_var: self.noise_var,
                theta: self.theta,
            },
        )
    }

    pub fn save(&self, path: &Path) -> SimResult<()> {
        let json = serde_json::to_string_pretty(self).expect("artifact serializes");
        fs::write(path, json).map_err(|e| SimError::io(path, e))
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        let a: Self = serde_json::from_str(&text).map_err(|e| SimError::format(path, e))?;
        if a.version != GPR_ARTIFACT_VERSION {
            return Err(SimError::format(path, format!("unsupported gpr artifact version {}", a.version)));
        }
        Ok(a)
    }
}

pub const TRAINING_COLUMNS: [&str; 4] = ["q1", "q2", "yv_x", "yv_z"];

/// Training data as CSV with columns `q1,q2,yv_x,yv_z`.
pub fn write_training_csv(model: &GprModel, path: &Path) -> SimResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| SimError::format(path, e))?;
    let t = model.training_set();
    w.write_record(TRAINING_COLUMNS).map_err(|e| SimError::format(path, e))?;
    for (i, q) in t.inputs().iter().enumerate() {
        w.write_record([q[0], q[1], t.targets_x()[i], t.targets_z()[i]].map(|v| v.to_string()))
            .map_err(|e| SimError::format(path, e))?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

pub fn read_training_csv(path: &Path) -> SimResult<GprTrainingSet> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| SimError::format(path, e))?;
    let header = rd.headers().map_err(|e| SimError::format(path, e))?;
    if header.iter().ne(TRAINING_COLUMNS) {
        return Err(SimError::format(path, format!("expected header {}", TRAINING_COLUMNS.join(","))));
    }
    let (mut inputs, mut xs, mut zs) = (Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| SimError::format(path, e))?;
        let mut v = [0.0; 4];
        for (j, cell) in v.iter_mut().enumerate() {
            let raw = rec.get(j).unwrap_or("");
            *cell = raw.trim().parse().map_err(|_| {
                SimError::format(path, format!("row {}: bad {} value {raw:?}", line + 1, TRAINING_COLUMNS[j]))
            })?;
        }
        inputs.push(Vector2::new(v[0], v[1]));
        xs.push(v[2]);
        zs.push(v[3]);
    }
    GprTrainingSet::new(inputs, xs, zs).map_err(|e| SimError::core(format!("{}", path.display()), e))
}

/// Loads a GP artifact and checks it was trained for this scenario.
pub fn load_gpr(path: &Path, cfg: &ScenarioConfig) -> SimResult<GprModel> {
    let a = GprArtifact::load(path)?;
    let expected = cfg.gpr_hash();
    if a.config_hash != expected {
        return Err(SimError::Config(format!(
            "{} was trained for a different plant/camera/gpr setup",
            path.display()
        )));
    }
    a.to_model().map_err(|e| SimError::core(format!("{}", path.display()), e))
}

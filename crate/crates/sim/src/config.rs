//! Scenario configuration file.
//!
//! One TOML document describes a full experiment. Every field has a default,
//! so an empty file is the reference double point-to-point scenario.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use uaic_core::aic::{AicGains, AicPrecisions};
use uaic_core::fdi::{CalibrationConfig, DetectionConfig, IsolationEstimators, MonitorConfig, ProprioRecovery};
use uaic_core::gpr::{GprHyperparams, OptimizerConfig};
use uaic_core::{
    CameraParams, ControlLaw, FaultSpec, ManipulatorParams, Matrix2, Matrix4, NoiseParams, Schedule, UaicGains,
    UaicPrecisions, Vector2, Vector4, Workspace,
};

use crate::error::{SimError, SimResult};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Aic,
    #[default]
    Uaic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub seed: u64,
    /// Step size shared by plant and controller (s).
    pub dt: f64,
    pub duration: f64,
    pub controller: ControllerKind,
    pub plant: PlantConfig,
    pub workspace: WorkspaceConfig,
    pub camera: CameraConfig,
    pub noise: NoiseConfig,
    pub schedule: ScheduleConfig,
    pub fault: FaultConfig,
    pub uaic: UaicConfig,
    pub aic: AicConfig,
    pub fdi: FdiConfig,
    pub gpr: GprConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: 1,
            dt: 1e-3,
            duration: 16.0,
            controller: ControllerKind::Uaic,
            plant: PlantConfig::default(),
            workspace: WorkspaceConfig::default(),
            camera: CameraConfig::default(),
            noise: NoiseConfig::default(),
            schedule: ScheduleConfig::default(),
            fault: FaultConfig::default(),
            uaic: UaicConfig::default(),
            aic: AicConfig::default(),
            fdi: FdiConfig::default(),
            gpr: GprConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub l2: f64,
    /// Diagonal of the viscous friction matrix.
    pub friction: [f64; 2],
    pub gravity: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        let p = ManipulatorParams::default();
        Self {
            m1: p.m1,
            m2: p.m2,
            l1: p.l1,
            l2: p.l2,
            friction: p.friction,
            gravity: p.gravity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkspaceConfig {
    pub q1: [f64; 2],
    pub q2: [f64; 2],
}

impl Default for WorkspaceConfig {
    fn default() -> Self {
        let w = Workspace::default();
        Self { q1: w.q1, q2: w.q2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub k1: f64,
    pub k2: f64,
    /// Distortion center; the workspace centroid when absent.
    pub center: Option<[f64; 2]>,
    pub radius_limit: Option<f64>,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            k1: CameraParams::DEFAULT_K1,
            k2: CameraParams::DEFAULT_K2,
            center: None,
            radius_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub sigma_q: f64,
    pub sigma_qd: f64,
    pub sigma_v: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let n = NoiseParams::default();
        Self {
            sigma_q: n.sigma_q,
            sigma_qd: n.sigma_qd,
            sigma_v: n.sigma_v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub time: f64,
    pub target: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Initial joint configuration, at rest.
    pub start: [f64; 2],
    pub waypoints: Vec<Waypoint>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            start: [-std::f64::consts::FRAC_PI_2, 0.0],
            waypoints: vec![
                Waypoint {
                    time: 0.0,
                    target: [-0.2, 0.5],
                },
                Waypoint {
                    time: 6.0,
                    target: [-0.6, 0.2],
                },
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FaultKindConfig {
    #[default]
    None,
    EncoderFreeze,
    CameraBias,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultConfig {
    pub kind: FaultKindConfig,
    pub onset: f64,
    /// Frozen joint, 1-based.
    pub joint: usize,
    /// Camera offset added to both coordinates (m).
    pub bias: f64,
}

impl Default for FaultConfig {
    fn default() -> Self {
        Self {
            kind: FaultKindConfig::None,
            onset: 8.0,
            joint: 1,
            bias: 0.04,
        }
    }
}

/// Diagonals of the u-AIC precision matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UaicPrecisionConfig {
    pub yq: [f64; 2],
    pub yqd: [f64; 2],
    pub yv: [f64; 2],
    pub x: [f64; 4],
    pub u: [f64; 2],
}

impl Default for UaicPrecisionConfig {
    fn default() -> Self {
        Self::from_precisions(&UaicPrecisions::default())
    }
}

impl UaicPrecisionConfig {
    fn from_precisions(p: &UaicPrecisions) -> Self {
        let d2 = |m: &Matrix2<f64>| [m[(0, 0)], m[(1, 1)]];
        Self {
            yq: d2(&p.yq),
            yqd: d2(&p.yqd),
            yv: d2(&p.yv),
            x: [p.x[(0, 0)], p.x[(1, 1)], p.x[(2, 2)], p.x[(3, 3)]],
            u: d2(&p.u),
        }
    }

    pub fn to_precisions(&self) -> UaicPrecisions {
        let d2 = |v: [f64; 2]| Matrix2::from_diagonal(&Vector2::from(v));
        UaicPrecisions {
            yq: d2(self.yq),
            yqd: d2(self.yqd),
            yv: d2(self.yv),
            x: Matrix4::from_diagonal(&Vector4::from(self.x)),
            u: d2(self.u),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UaicConfig {
    pub kp: [f64; 2],
    pub ki: [f64; 2],
    pub kd: [f64; 2],
    pub integral_limit: f64,
    pub exact_coupling: bool,
    pub kappa_mu: f64,
    pub kappa_u: f64,
    pub torque_limit: f64,
    pub precisions: UaicPrecisionConfig,
}

impl Default for UaicConfig {
    fn default() -> Self {
        let law = ControlLaw::default();
        let gains = UaicGains::default();
        Self {
            kp: law.kp.into(),
            ki: law.ki.into(),
            kd: law.kd.into(),
            integral_limit: law.integral_limit,
            exact_coupling: law.exact_coupling,
            kappa_mu: gains.kappa_mu,
            kappa_u: gains.kappa_u,
            torque_limit: gains.torque_limit,
            precisions: UaicPrecisionConfig::default(),
        }
    }
}

impl UaicConfig {
    pub fn law(&self) -> ControlLaw {
        ControlLaw {
            kp: self.kp.into(),
            ki: self.ki.into(),
            kd: self.kd.into(),
            integral_limit: self.integral_limit,
            exact_coupling: self.exact_coupling,
        }
    }

    pub fn gains(&self) -> UaicGains {
        UaicGains {
            kappa_mu: self.kappa_mu,
            kappa_u: self.kappa_u,
            torque_limit: self.torque_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AicConfig {
    pub kappa_mu: f64,
    pub kappa_u: f64,
    pub action_jacobian: f64,
    pub torque_limit: f64,
    /// Diagonals of `P_yq`, `P_yq̇`, `P_yv`, `P_μ`, `P_μ′`.
    pub yq: [f64; 2],
    pub yqd: [f64; 2],
    pub yv: [f64; 2],
    pub mu: [f64; 2],
    pub mu_p: [f64; 2],
}

impl Default for AicConfig {
    fn default() -> Self {
        let g = AicGains::default();
        Self {
            kappa_mu: g.kappa_mu,
            kappa_u: g.kappa_u,
            action_jacobian: g.action_jacobian,
            torque_limit: g.torque_limit,
            yq: [1.0; 2],
            yqd: [1.0; 2],
            yv: [1.0; 2],
            mu: [1.0; 2],
            mu_p: [1.0; 2],
        }
    }
}

impl AicConfig {
    pub fn gains(&self) -> AicGains {
        AicGains {
            kappa_mu: self.kappa_mu,
            kappa_u: self.kappa_u,
            action_jacobian: self.action_jacobian,
            torque_limit: self.torque_limit,
        }
    }

    pub fn precisions(&self) -> AicPrecisions {
        let d2 = |v: [f64; 2]| Matrix2::from_diagonal(&Vector2::from(v));
        AicPrecisions {
            yq: d2(self.yq),
            yqd: d2(self.yqd),
            yv: d2(self.yv),
            mu: d2(self.mu),
            mu_p: d2(self.mu_p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProprioRecoveryConfig {
    #[default]
    PositionOnly,
    PositionAndVelocity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdiConfig {
    /// Run detection and isolation; needs a calibration artifact.
    pub enabled: bool,
    pub alpha: f64,
    /// Threshold `d²` (true) or `d` (false) against `n/α`.
    pub squared: bool,
    pub confirm_steps: usize,
    pub isolation_window: usize,
    /// Probability bound of the two isolation detectors.
    pub isolation_alpha: f64,
    pub recovery: bool,
    pub proprio_recovery: ProprioRecoveryConfig,
    /// Step size of the two isolation estimators.
    pub isolation_kappa_mu: f64,
    /// Nominal precisions of the isolation estimators (`u` unused).
    pub isolation_precisions: UaicPrecisionConfig,
    pub calibration: CalibrationSettings,
}

impl Default for FdiConfig {
    fn default() -> Self {
        let m = MonitorConfig::default();
        Self {
            enabled: true,
            alpha: 0.05,
            squared: true,
            confirm_steps: m.confirm_steps,
            isolation_window: m.isolation_window,
            isolation_alpha: 0.1,
            recovery: true,
            proprio_recovery: ProprioRecoveryConfig::PositionOnly,
            isolation_kappa_mu: UaicGains::default().kappa_mu,
            isolation_precisions: UaicPrecisionConfig::from_precisions(&IsolationEstimators::default_precisions()),
            calibration: CalibrationSettings::default(),
        }
    }
}

impl FdiConfig {
    pub fn detection(&self, dim: usize) -> DetectionConfig {
        DetectionConfig {
            alpha: self.alpha,
            dim,
            squared: self.squared,
        }
    }

    pub fn isolation_detection(&self, dim: usize) -> DetectionConfig {
        DetectionConfig {
            alpha: self.isolation_alpha,
            dim,
            squared: self.squared,
        }
    }

    pub fn monitor(&self) -> MonitorConfig {
        MonitorConfig {
            confirm_steps: self.confirm_steps,
            isolation_window: self.isolation_window,
        }
    }

    pub fn proprio_recovery(&self) -> ProprioRecovery {
        match self.proprio_recovery {
            ProprioRecoveryConfig::PositionOnly => ProprioRecovery::PositionOnly,
            ProprioRecoveryConfig::PositionAndVelocity => ProprioRecovery::PositionAndVelocity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSettings {
    pub runs: usize,
    /// Calibration run `i` uses seed `seed + i`.
    pub seed: u64,
    pub min_runs: usize,
    pub min_samples: usize,
    pub window_half_width: usize,
    pub regularization: f64,
    pub reference_steps: usize,
    pub plateau_half_width: usize,
    pub variance_tolerance: f64,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        let c = CalibrationConfig::default();
        Self {
            runs: 200,
            seed: 1_000_000,
            min_runs: c.min_runs,
            min_samples: c.min_samples,
            window_half_width: c.window_half_width,
            regularization: c.regularization,
            reference_steps: c.reference_steps,
            plateau_half_width: c.plateau_half_width,
            variance_tolerance: c.variance_tolerance,
        }
    }
}

impl CalibrationSettings {
    pub fn to_core(&self) -> CalibrationConfig {
        CalibrationConfig {
            min_runs: self.min_runs,
            min_samples: self.min_samples,
            window_half_width: self.window_half_width,
            regularization: self.regularization,
            reference_steps: self.reference_steps,
            plateau_half_width: self.plateau_half_width,
            variance_tolerance: self.variance_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GprConfig {
    /// Training configurations per workspace axis.
    pub grid: usize,
    /// Camera readings averaged per training configuration.
    pub samples_per_point: usize,
    pub seed: u64,
    pub optimize: bool,
    pub signal_var: f64,
    pub noise_var: f64,
    pub length_scale: [f64; 2],
    pub max_iterations: usize,
    pub restarts: usize,
}

impl Default for GprConfig {
    fn default() -> Self {
        let o = OptimizerConfig::default();
        Self {
            grid: 12,
            samples_per_point: 10,
            seed: 7,
            optimize: true,
            signal_var: 1.0,
            noise_var: 1e-4,
            length_scale: [1.0, 1.0],
            max_iterations: o.max_iterations,
            restarts: o.restarts,
        }
    }
}

impl GprConfig {
    pub fn initial_hyperparams(&self) -> GprHyperparams {
        let [a, b] = self.length_scale;
        GprHyperparams {
            signal_var: self.signal_var,
            noise_var: self.noise_var,
            theta: [1.0 / (a * a), 1.0 / (b * b)],
        }
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            max_iterations: self.max_iterations,
            restarts: self.restarts,
            ..OptimizerConfig::default()
        }
    }
}

fn invalid(msg: impl Into<String>) -> SimError {
    SimError::Config(msg.into())
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> SimResult<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            SimError::Config(m) => invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> SimResult<()> {
        if self.version != CONFIG_VERSION {
            return Err(invalid(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(invalid(format!("duration must be positive, got {}", self.duration)));
        }
        if self.fault.kind != FaultKindConfig::None && self.duration <= self.fault.onset {
            return Err(invalid(format!(
                "duration {} s ends before the fault at {} s",
                self.duration, self.fault.onset
            )));
        }
        if !(1..=2).contains(&self.fault.joint) {
            return Err(invalid(format!("fault joint must be 1 or 2, got {}", self.fault.joint)));
        }
        if self.gpr.grid < 2 || self.gpr.samples_per_point == 0 {
            return Err(invalid("gpr grid needs at least 2 points per axis and 1 sample per point"));
        }
        let core = |r: uaic_core::Result<()>| r.map_err(|e| invalid(e.to_string()));
        core(self.arm().validate())?;
        core(self.workspace().validate())?;
        core(self.noise(0).validate())?;
        core(self.fault_spec().validate())?;
        core(self.uaic.law().validate())?;
        core(self.uaic.gains().validate())?;
        core(self.uaic.precisions.to_precisions().validate())?;
        core(self.fdi.isolation_precisions.to_precisions().validate())?;
        core(self.aic.precisions().validate())?;
        core(self.fdi.detection(1).validate())?;
        core(self.fdi.isolation_detection(1).validate())?;
        self.schedule()?;
        self.camera()?;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn arm(&self) -> ManipulatorParams {
        let p = &self.plant;
        ManipulatorParams {
            m1: p.m1,
            m2: p.m2,
            l1: p.l1,
            l2: p.l2,
            friction: p.friction,
            gravity: p.gravity,
        }
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            q1: self.workspace.q1,
            q2: self.workspace.q2,
        }
    }

    pub fn camera(&self) -> SimResult<CameraParams> {
        let c = &self.camera;
        let cam = match (c.center, c.radius_limit) {
            (Some(center), Some(limit)) => CameraParams::new(c.k1, c.k2, center, limit),
            (None, None) => CameraParams::centered_on(c.k1, c.k2, &self.workspace(), &self.arm()),
            _ => {
                return Err(invalid("camera center and radius_limit must be given together"));
            }
        };
        cam.map_err(|e| invalid(e.to_string()))
    }

    pub fn noise(&self, seed: u64) -> NoiseParams {
        NoiseParams {
            sigma_q: self.noise.sigma_q,
            sigma_qd: self.noise.sigma_qd,
            sigma_v: self.noise.sigma_v,
            seed,
        }
    }

    pub fn fault_spec(&self) -> FaultSpec {
        let f = &self.fault;
        match f.kind {
            FaultKindConfig::None => FaultSpec::none(),
            FaultKindConfig::EncoderFreeze => FaultSpec::encoder_freeze(f.joint.saturating_sub(1), f.onset),
            FaultKindConfig::CameraBias => FaultSpec::camera_bias(f.bias, f.onset),
        }
    }

    pub fn schedule(&self) -> SimResult<Schedule> {
        Schedule::new(
            self.schedule
                .waypoints
                .iter()
                .map(|w| (w.time, Vector2::from(w.target)))
                .collect(),
        )
        .map_err(|e| invalid(e.to_string()))
    }

    /// Fingerprint of everything a GP model depends on.
    pub fn gpr_hash(&self) -> String {
        digest(&(&self.plant, &self.workspace, &self.camera, self.noise.sigma_v, &self.gpr))
    }

    /// Fingerprint of the scenario the healthy residual statistics describe.
    /// Seed, fault, recovery and threshold settings are excluded because
    /// calibration runs are always healthy and seeded on their own. So are
    /// the calibration settings: they change the estimate, not the scenario.
    pub fn calibration_hash(&self) -> String {
        digest(&(
            self.gpr_hash(),
            self.dt,
            &self.noise,
            &self.schedule,
            &self.uaic,
            self.fdi.isolation_kappa_mu,
            &self.fdi.isolation_precisions,
        ))
    }
}

fn digest<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes to JSON");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ScenarioConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.steps(), 16_000);
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ScenarioConfig::default();
        cfg.fault.kind = FaultKindConfig::CameraBias;
        cfg.uaic.kp = [30.0, 20.0];
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ScenarioConfig::from_toml_str("dt = -1.0").is_err());
        assert!(ScenarioConfig::from_toml_str("version = 9").is_err());
        assert!(ScenarioConfig::from_toml_str("typo = 1").is_err());
        assert!(ScenarioConfig::from_toml_str("[fault]\nkind = \"encoder_freeze\"\njoint = 3").is_err());
        assert!(ScenarioConfig::from_toml_str("duration = 5.0\n[fault]\nkind = \"camera_bias\"").is_err());
        assert!(ScenarioConfig::from_toml_str("[fdi]\nalpha = 0.0").is_err());
    }

    #[test]
    fn calibration_hash_ignores_run_settings() {
        let a = ScenarioConfig::default();
        let mut b = a.clone();
        b.seed = 99;
        b.fault.kind = FaultKindConfig::EncoderFreeze;
        b.fdi.alpha = 0.01;
        b.fdi.recovery = false;
        b.fdi.calibration.runs = 50;
        assert_eq!(a.calibration_hash(), b.calibration_hash());
        b.uaic.kp[0] += 1.0;
        assert_ne!(a.calibration_hash(), b.calibration_hash());
    }
}

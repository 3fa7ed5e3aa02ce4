//! Closed-loop simulation of one scenario.

use log::warn;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uaic_core::aic::{action_update_aic, belief_update_aic, spe_quadratic, GeneralizedBelief};
use uaic_core::fdi::{
    detect, recover, FaultLocation, FaultMonitor, IsolationEstimators, IsolationResiduals, Residual,
};
use uaic_core::gpr::GprModel;
use uaic_core::plant::integrate_step;
use uaic_core::uaic::controller_step;
use uaic_core::{Matrix2, PlantState, Sensors, UaicBelief, Vector2};

use crate::calibration::Calibration;
use crate::config::{ControllerKind, ScenarioConfig};
use crate::error::{SimError, SimResult};

/// One control cycle. Residuals and statistics are `NaN` where they do not
/// apply (standard AIC runs, detection disabled).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub q: [f64; 2],
    pub qd: [f64; 2],
    pub target: [f64; 2],
    pub mu_q: [f64; 2],
    pub mu_qd: [f64; 2],
    pub mu_u: [f64; 2],
    pub torque: [f64; 2],
    pub y_q: [f64; 2],
    pub y_qd: [f64; 2],
    pub y_v: [f64; 2],
    /// Main-loop residual `[q1, q2, q̇1, q̇2, v_x, v_z]`.
    pub residual: [f64; 6],
    pub residual_p: [f64; 4],
    pub residual_v: [f64; 2],
    /// Quadratic SPE `εᵀPε` for encoders, velocity sensors and camera.
    pub spe_quadratic: [f64; 3],
    pub free_energy: f64,
    pub statistic: f64,
    pub normalized: f64,
    pub alarm: bool,
    /// A detection has been confirmed at or before this step.
    pub detected: bool,
    /// Precisions have been reduced by recovery at or before this step.
    pub recovered: bool,
    pub normalized_p: f64,
    pub normalized_v: f64,
    /// Isolation verdict, on the step it is reached.
    pub verdict: Option<FaultLocation>,
}

/// Summary of the detection and isolation pipeline over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdiOutcome {
    pub detection_step: Option<usize>,
    pub isolation_step: Option<usize>,
    pub location: Option<FaultLocation>,
    pub recovered: bool,
    /// Step at which an isolation estimator diverged, if one did.
    pub isolation_failure: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub dt: f64,
    pub seed: u64,
    /// Threshold `n/α` of the main detector, `NaN` without detection.
    pub threshold: f64,
    /// Fault onset in seconds, if a fault was injected.
    pub fault_onset: Option<f64>,
    pub switch_times: Vec<f64>,
    pub records: Vec<StepRecord>,
    pub fdi: FdiOutcome,
}

fn quad(e: &Vector2<f64>, p: &Matrix2<f64>) -> f64 {
    e.dot(&(p * e))
}

fn v2(v: &Vector2<f64>) -> [f64; 2] {
    [v[0], v[1]]
}

pub fn run_scenario(cfg: &ScenarioConfig, gpr: &GprModel, calib: Option<&Calibration>) -> SimResult<TrajectoryLog> {
    match cfg.controller {
        ControllerKind::Uaic => run_uaic(cfg, gpr, calib),
        ControllerKind::Aic => run_aic(cfg, gpr),
    }
}

struct Loop {
    state: PlantState,
    sensors: Sensors<ChaCha8Rng>,
    arm: uaic_core::ManipulatorParams,
}

fn setup(cfg: &ScenarioConfig) -> SimResult<Loop> {
    let arm = cfg.arm();
    let sensors = Sensors::new(
        arm,
        cfg.camera()?,
        cfg.noise(cfg.seed),
        cfg.fault_spec(),
        cfg.dt,
        ChaCha8Rng::seed_from_u64(cfg.seed),
    )
    .map_err(|e| SimError::Config(e.to_string()))?;
    Ok(Loop {
        state: PlantState::at_rest(cfg.schedule.start),
        sensors,
        arm,
    })
}

pub(crate) fn blank_record(k: usize, t: f64) -> StepRecord {
    StepRecord {
        step: k,
        t,
        q: [0.0; 2],
        qd: [0.0; 2],
        target: [0.0; 2],
        mu_q: [0.0; 2],
        mu_qd: [0.0; 2],
        mu_u: [0.0; 2],
        torque: [0.0; 2],
        y_q: [0.0; 2],
        y_qd: [0.0; 2],
        y_v: [0.0; 2],
        residual: [f64::NAN; 6],
        residual_p: [f64::NAN; 4],
        residual_v: [f64::NAN; 2],
        spe_quadratic: [f64::NAN; 3],
        free_energy: f64::NAN,
        statistic: f64::NAN,
        normalized: f64::NAN,
        alarm: false,
        detected: false,
        recovered: false,
        normalized_p: f64::NAN,
        normalized_v: f64::NAN,
        verdict: None,
    }
}

fn run_uaic(cfg: &ScenarioConfig, gpr: &GprModel, calib: Option<&Calibration>) -> SimResult<TrajectoryLog> {
    let detection = cfg.fdi.enabled;
    let calib = match (detection, calib) {
        (false, _) => None,
        (true, None) => {
            return Err(SimError::CalibrationMissing(
                "detection is enabled but no calibration artifact was given".into(),
            ))
        }
        (true, Some(c)) => {
            let expected = cfg.calibration_hash();
            if c.scenario_hash != expected {
                return Err(SimError::CalibrationMismatch {
                    artifact: c.scenario_hash.clone(),
                    scenario: expected,
                });
            }
            Some(c)
        }
    };

    let mut sim = setup(cfg)?;
    let schedule = cfg.schedule()?;
    let law = cfg.uaic.law();
    let gains = cfg.uaic.gains();
    let nominal = cfg.uaic.precisions.to_precisions();
    let mut precisions = nominal;
    let iso_p = cfg.fdi.isolation_precisions.to_precisions();
    let det_main = cfg.fdi.detection(6);
    let det_p = cfg.fdi.isolation_detection(4);
    let det_v = cfg.fdi.isolation_detection(2);
    let mut monitor = FaultMonitor::new(cfg.fdi.monitor());
    let mut estimators = Some(IsolationEstimators::new(cfg.schedule.start));
    let mut belief = UaicBelief::at_rest(cfg.schedule.start);
    let mut fdi = FdiOutcome {
        detection_step: None,
        isolation_step: None,
        location: None,
        recovered: false,
        isolation_failure: None,
    };

    let steps = cfg.steps();
    let mut records = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let target = schedule.target_at(t);
        let y = sim
            .sensors
            .sense(&sim.state, k)
            .map_err(|e| SimError::core(format!("sensing at step {k}"), e))?;
        let out = controller_step(&belief, &y, gpr, &law, &target, &precisions, &gains, cfg.dt)
            .map_err(|e| SimError::core("u-AIC controller", e))?;
        let residual = Residual::from_spe(&out.spe, k);

        let mut rec = blank_record(k, t);
        rec.residual.copy_from_slice(residual.as_slice());
        rec.spe_quadratic = [
            quad(&out.spe[0], &precisions.yq),
            quad(&out.spe[1], &precisions.yqd),
            quad(&out.spe[2], &precisions.yv),
        ];

        let iso: Option<IsolationResiduals> = match estimators.as_mut() {
            Some(est) => match est.step(&y, gpr, &iso_p, cfg.fdi.isolation_kappa_mu, cfg.dt) {
                Ok(r) => Some(r),
                Err(e) => {
                    warn!("seed {}: {e}; isolation disabled for the rest of the run", cfg.seed);
                    fdi.isolation_failure = Some(k);
                    estimators = None;
                    None
                }
            },
            None => None,
        };
        if let Some(r) = &iso {
            rec.residual_p.copy_from_slice(r.proprio.as_slice());
            rec.residual_v.copy_from_slice(r.visual.as_slice());
        }

        if let Some(c) = calib {
            let d = c.main.at(k).mahalanobis(residual.as_slice());
            let det = detect(d, &det_main);
            rec.statistic = det.statistic;
            rec.normalized = det.normalized;
            rec.alarm = det.alarm;
            let (mut p_over, mut v_over) = (false, false);
            if let Some(r) = &iso {
                let dp = detect(c.proprio.at(k).mahalanobis(r.proprio.as_slice()), &det_p);
                let dv = detect(c.visual.at(k).mahalanobis(r.visual.as_slice()), &det_v);
                rec.normalized_p = dp.normalized;
                rec.normalized_v = dv.normalized;
                p_over = dp.alarm;
                v_over = dv.alarm;
            }
            if let Some(v) = monitor.observe(k, det.alarm, p_over, v_over) {
                rec.verdict = Some(v.location);
                fdi.isolation_step = Some(v.isolation_step);
                fdi.location = Some(v.location);
                if cfg.fdi.recovery {
                    let (p, applied) = recover(&precisions, v.location, cfg.fdi.proprio_recovery());
                    if applied {
                        precisions = p;
                        fdi.recovered = true;
                    } else {
                        warn!("seed {}: fault at step {} could not be isolated, no recovery", cfg.seed, v.detection_step);
                    }
                }
            }
            fdi.detection_step = monitor.detection_step();
            rec.detected = fdi.detection_step.is_some();
            rec.recovered = fdi.recovered;
        }

        rec.q = v2(&sim.state.q);
        rec.qd = v2(&sim.state.qd);
        rec.target = v2(&target);
        rec.mu_q = v2(&belief.q);
        rec.mu_qd = v2(&belief.qd);
        rec.mu_u = v2(&out.belief.u);
        rec.torque = v2(&out.torque);
        rec.y_q = v2(&y.q);
        rec.y_qd = v2(&y.qd);
        rec.y_v = v2(&y.v);
        rec.free_energy = out.free_energy;
        records.push(rec);

        sim.state = integrate_step(&sim.state, &out.torque, cfg.dt, &sim.arm)
            .map_err(|e| SimError::core(format!("plant at step {k}"), e))?;
        belief = out.belief;
    }

    Ok(TrajectoryLog {
        dt: cfg.dt,
        seed: cfg.seed,
        threshold: if calib.is_some() { det_main.threshold() } else { f64::NAN },
        fault_onset: cfg.fault_spec().is_active().then_some(cfg.fault.onset),
        switch_times: schedule.switch_times().collect(),
        records,
        fdi,
    })
}

fn run_aic(cfg: &ScenarioConfig, gpr: &GprModel) -> SimResult<TrajectoryLog> {
    let mut sim = setup(cfg)?;
    let schedule = cfg.schedule()?;
    let gains = cfg.aic.gains();
    let p = cfg.aic.precisions();
    let mut belief = GeneralizedBelief::at_rest(cfg.schedule.start);
    let mut u = Vector2::zeros();
    let steps = cfg.steps();
    let mut records = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let target = schedule.target_at(t);
        let y = sim
            .sensors
            .sense(&sim.state, k)
            .map_err(|e| SimError::core(format!("sensing at step {k}"), e))?;
        let mut rec = blank_record(k, t);
        rec.spe_quadratic = spe_quadratic(&y, &belief, gpr, &p);
        let next = belief_update_aic(&belief, &y, gpr, &target, &p, gains.kappa_mu, cfg.dt)
            .map_err(|e| SimError::core("AIC controller", e))?;
        u = action_update_aic(&u, &belief, &y, &p, &gains, cfg.dt);

        rec.q = v2(&sim.state.q);
        rec.qd = v2(&sim.state.qd);
        rec.target = v2(&target);
        rec.mu_q = v2(&belief.mu);
        rec.mu_qd = v2(&belief.mu_p);
        rec.mu_u = v2(&u);
        rec.torque = v2(&u);
        rec.y_q = v2(&y.q);
        rec.y_qd = v2(&y.qd);
        rec.y_v = v2(&y.v);
        rec.free_energy = uaic_core::aic::free_energy_aic(&belief, &y, gpr, &target, &p);
        records.push(rec);

        sim.state = integrate_step(&sim.state, &u, cfg.dt, &sim.arm)
            .map_err(|e| SimError::core(format!("plant at step {k}"), e))?;
        belief = next;
    }
    Ok(TrajectoryLog {
        dt: cfg.dt,
        seed: cfg.seed,
        threshold: f64::NAN,
        fault_onset: cfg.fault_spec().is_active().then_some(cfg.fault.onset),
        switch_times: schedule.switch_times().collect(),
        records,
        fdi: FdiOutcome {
            detection_step: None,
            isolation_step: None,
            location: None,
            recovered: false,
            isolation_failure: None,
        },
    })
}

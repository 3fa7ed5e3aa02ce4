//! Sensory fault detection, isolation and recovery.
//!
//! Detection compares the controller's sensory prediction errors against
//! statistics collected from fault-free runs. Residuals are whitened with a
//! per-step mean and covariance while the closed loop is still in a
//! transient and with pooled stationary moments afterwards; the squared
//! Mahalanobis distance is then tested against the Chebyshev bound `n/α`.
//!
//! Isolation runs two extra state estimators, one driven only by the
//! encoders and velocity sensors and one only by the camera, and checks
//! which of their residuals leaves its own healthy envelope around the
//! detection time.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Matrix2, Vector2, Vector4, Vector6};

use crate::error::{Error, Result};
use crate::gpr::VisualModel;
use crate::plant::SensorReading;
use crate::uaic::{errors, Errors, predict_prior, state_gradient_terms, ControlLaw, Terms, UaicBelief, UaicPrecisions};

/// Channel order `[q1, q2, q̇1, q̇2, v_x, v_z]`.
pub const RESIDUAL_DIM: usize = 6;
pub const CHANNEL_NAMES: [&str; RESIDUAL_DIM] = ["q1", "q2", "qd1", "qd2", "vx", "vz"];

/// Sensory prediction error of the main controller at one step, taken at
/// the belief before that step's update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub values: Vector6<f64>,
    pub step: usize,
}

impl Residual {
    pub fn from_spe(spe: &[Vector2<f64>; 3], step: usize) -> Self {
        Self {
            values: Vector6::new(spe[0][0], spe[0][1], spe[1][0], spe[1][1], spe[2][0], spe[2][1]),
            step,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }
}

pub fn compute_residual<G: VisualModel>(y: &SensorReading, b: &UaicBelief, gv: &G) -> Residual {
    let g = gv.predict(&b.q);
    Residual::from_spe(&[y.q - b.q, y.qd - b.qd, y.v - g], y.step)
}

/// Mean and covariance of a residual population, with the covariance
/// factored once for whitening.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMoments {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    /// Lower Cholesky factor of `covariance`.
    factor: DMatrix<f64>,
    samples: usize,
}

impl GaussianMoments {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>, samples: usize) -> Result<Self> {
        let n = mean.len();
        if covariance.shape() != (n, n) {
            return Err(Error::InvalidInput(format!(
                "covariance is {}x{} for a mean of length {n}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if !mean.iter().chain(covariance.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite residual moments".into()));
        }
        let factor = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| Error::SingularCovariance {
                step: None,
                diagonal: diagonal_summary(&covariance),
            })?
            .unpack();
        Ok(Self {
            mean,
            covariance,
            factor,
            samples,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// `(r − m)ᵀ C⁻¹ (r − m)`.
    pub fn mahalanobis_squared(&self, r: &[f64]) -> f64 {
        debug_assert_eq!(r.len(), self.dim());
        let d = DVector::from_iterator(self.dim(), r.iter().zip(self.mean.iter()).map(|(a, m)| a - m));
        let z = self
            .factor
            .solve_lower_triangular(&d)
            .expect("Cholesky factor has a positive diagonal");
        z.norm_squared()
    }

    pub fn mahalanobis(&self, r: &[f64]) -> f64 {
        libm::sqrt(self.mahalanobis_squared(r))
    }
}

fn diagonal_summary(c: &DMatrix<f64>) -> String {
    let mut s = String::from("[");
    for (i, v) in c.diagonal().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&format!("{v:.3e}"));
    }
    s.push(']');
    s
}

/// Healthy-run residual statistics for one residual vector.
///
/// Steps inside the transient keep their own moments; everything else uses
/// the stationary block. Steps past the calibrated horizon fall back to the
/// stationary block as well.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualStats {
    per_step: Vec<Option<GaussianMoments>>,
    stationary: GaussianMoments,
    runs: usize,
}

impl ResidualStats {
    pub fn dim(&self) -> usize {
        self.stationary.dim()
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn horizon(&self) -> usize {
        self.per_step.len()
    }

    pub fn stationary(&self) -> &GaussianMoments {
        &self.stationary
    }

    /// Moments used at step `k`.
    pub fn at(&self, k: usize) -> &GaussianMoments {
        self.per_step.get(k).and_then(Option::as_ref).unwrap_or(&self.stationary)
    }

    pub fn is_transient(&self, k: usize) -> bool {
        matches!(self.per_step.get(k), Some(Some(_)))
    }

    /// Number of steps that keep per-step moments.
    pub fn transient_steps(&self) -> usize {
        self.per_step.iter().filter(|m| m.is_some()).count()
    }

    pub fn per_step(&self) -> &[Option<GaussianMoments>] {
        &self.per_step
    }

    /// Rebuilds statistics from stored moments, e.g. after deserialization.
    pub fn from_parts(per_step: Vec<Option<GaussianMoments>>, stationary: GaussianMoments, runs: usize) -> Result<Self> {
        let n = stationary.dim();
        if per_step.iter().flatten().any(|m| m.dim() != n) {
            return Err(Error::InvalidInput("per-step moments disagree in dimension".into()));
        }
        Ok(Self {
            per_step,
            stationary,
            runs,
        })
    }
}

pub fn mahalanobis(r: &[f64], stats: &ResidualStats, k: usize) -> f64 {
    stats.at(k).mahalanobis(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationConfig {
    /// Fewest fault-free runs accepted.
    pub min_runs: usize,
    /// Fewest pooled samples behind any moment estimate.
    pub min_samples: usize,
    /// Samples from steps `k−h ..= k+h` are pooled into step `k`.
    pub window_half_width: usize,
    /// Added to every covariance diagonal.
    pub regularization: f64,
    /// Trailing steps used as the stationary reference.
    pub reference_steps: usize,
    /// A step counts as stationary only if every step within this many
    /// steps of it matches the reference.
    pub plateau_half_width: usize,
    /// Tolerance on `tr(C_s⁻¹ C_k)/n − 1` for the variance match.
    pub variance_tolerance: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            min_runs: 20,
            min_samples: 100,
            window_half_width: 2,
            regularization: 1e-12,
            reference_steps: 1000,
            plateau_half_width: 100,
            variance_tolerance: 0.25,
        }
    }
}

/// Streams residuals from many runs into per-step sums, so calibration does
/// not have to hold every trace in memory.
#[derive(Debug, Clone)]
pub struct StatsAccumulator {
    dim: usize,
    count: Vec<usize>,
    sum: Vec<f64>,
    /// Upper-triangle outer-product sums, row-major, per step.
    outer: Vec<f64>,
    runs: usize,
}

impl StatsAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            count: Vec::new(),
            sum: Vec::new(),
            outer: Vec::new(),
            runs: 0,
        }
    }

    fn tri(&self) -> usize {
        self.dim * (self.dim + 1) / 2
    }

    fn grow(&mut self, steps: usize) {
        if self.count.len() < steps {
            self.count.resize(steps, 0);
            self.sum.resize(steps * self.dim, 0.0);
            let t = self.tri();
            self.outer.resize(steps * t, 0.0);
        }
    }

    pub fn push(&mut self, step: usize, r: &[f64]) -> Result<()> {
        if r.len() != self.dim {
            return Err(Error::InvalidInput(format!("residual has {} channels, expected {}", r.len(), self.dim)));
        }
        if !r.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite residual at step {step}")));
        }
        self.grow(step + 1);
        self.count[step] += 1;
        let n = self.dim;
        for (s, v) in self.sum[step * n..(step + 1) * n].iter_mut().zip(r) {
            *s += v;
        }
        let t = self.tri();
        let outer = &mut self.outer[step * t..(step + 1) * t];
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                outer[idx] += r[i] * r[j];
                idx += 1;
            }
        }
        Ok(())
    }

    pub fn finish_run(&mut self) {
        self.runs += 1;
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn merge(&mut self, other: &StatsAccumulator) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::InvalidInput("cannot merge accumulators of different dimension".into()));
        }
        self.grow(other.count.len());
        for (a, b) in self.count.iter_mut().zip(&other.count) {
            *a += b;
        }
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.outer.iter_mut().zip(&other.outer) {
            *a += b;
        }
        self.runs += other.runs;
        Ok(())
    }

    /// Raw sums over a step range, as `(count, Σr, Σrrᵀ upper)`.
    fn pooled(&self, lo: usize, hi: usize) -> (usize, Vec<f64>, Vec<f64>) {
        let n = self.dim;
        let t = self.tri();
        let mut count = 0;
        let mut sum = vec![0.0; n];
        let mut outer = vec![0.0; t];
        for k in lo..hi {
            count += self.count[k];
            for (a, b) in sum.iter_mut().zip(&self.sum[k * n..(k + 1) * n]) {
                *a += b;
            }
            for (a, b) in outer.iter_mut().zip(&self.outer[k * t..(k + 1) * t]) {
                *a += b;
            }
        }
        (count, sum, outer)
    }

    fn moments(&self, lo: usize, hi: usize, reg: f64) -> (usize, DVector<f64>, DMatrix<f64>) {
        let n = self.dim;
        let (count, sum, outer) = self.pooled(lo, hi);
        let c = count.max(1) as f64;
        let mean = DVector::from_iterator(n, sum.iter().map(|s| s / c));
        let mut cov = DMatrix::zeros(n, n);
        let mut idx = 0;
        // unbiased normalization; a single sample gives a zero matrix
        let denom = if count > 1 { (count - 1) as f64 } else { 1.0 };
        for i in 0..n {
            for j in i..n {
                let v = (outer[idx] - c * mean[i] * mean[j]) / denom;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
                idx += 1;
            }
        }
        for i in 0..n {
            cov[(i, i)] = cov[(i, i)].max(0.0) + reg;
        }
        (count, mean, cov)
    }

    /// Turns the sums into [`ResidualStats`].
    ///
    /// Each step's moments pool the window `k ± h`. The last
    /// `reference_steps` steps give the stationary reference; a step is
    /// stationary when its windowed mean is within sampling error of the
    /// reference mean, its covariance matches the reference within
    /// `variance_tolerance`, and the same holds for all steps within
    /// `plateau_half_width` of it. Stationary steps are pooled into one
    /// block; the others keep their own moments.
    pub fn finalize(&self, cfg: &CalibrationConfig) -> Result<ResidualStats> {
        if self.runs < cfg.min_runs.max(1) {
            return Err(Error::InsufficientCalibration {
                got: self.runs,
                need: cfg.min_runs.max(1),
            });
        }
        let steps = self.count.len();
        let n = self.dim;
        let h = cfg.window_half_width;
        let reg = cfg.regularization;

        let ref_lo = steps.saturating_sub(cfg.reference_steps.max(1));
        let (ref_count, ref_mean, ref_cov) = self.moments(ref_lo, steps, reg);
        if ref_count < cfg.min_samples {
            return Err(Error::InsufficientCalibration {
                got: ref_count,
                need: cfg.min_samples,
            });
        }
        let reference = GaussianMoments::new(ref_mean, ref_cov, ref_count)?;

        let mut local = Vec::with_capacity(steps);
        let mut matches = Vec::with_capacity(steps);
        // χ²_n bound at roughly 5σ for the mean test
        let chi_bound = n as f64 + 5.0 * libm::sqrt(2.0 * n as f64);
        let ref_inv = reference.factor.clone();
        for k in 0..steps {
            let lo = k.saturating_sub(h);
            let hi = (k + h + 1).min(steps);
            let (count, mean, cov) = self.moments(lo, hi, reg);
            if count < cfg.min_samples {
                return Err(Error::InsufficientCalibration {
                    got: count,
                    need: cfg.min_samples,
                });
            }
            let mean_stat = count as f64 * reference.mahalanobis_squared(mean.as_slice());
            // tr(C_s⁻¹ C_k) through the reference Cholesky factor
            let w = ref_inv
                .solve_lower_triangular(&cov)
                .expect("Cholesky factor has a positive diagonal");
            let w = ref_inv
                .solve_lower_triangular(&w.transpose())
                .expect("Cholesky factor has a positive diagonal");
            let ratio = w.trace() / n as f64;
            matches.push(mean_stat <= chi_bound && (ratio - 1.0).abs() <= cfg.variance_tolerance);
            local.push((count, mean, cov));
        }

        // erode the match mask so isolated coincidences stay transient
        let w = cfg.plateau_half_width;
        let mut bad_prefix = vec![0usize; steps + 1];
        for k in 0..steps {
            bad_prefix[k + 1] = bad_prefix[k] + usize::from(!matches[k]);
        }
        let stationary_at = |k: usize| {
            let lo = k.saturating_sub(w);
            let hi = (k + w + 1).min(steps);
            bad_prefix[hi] - bad_prefix[lo] == 0
        };

        let mut pooled = StatsAccumulator::new(n);
        pooled.grow(1);
        let mut any_stationary = false;
        let mut per_step = Vec::with_capacity(steps);
        for (k, (count, mean, cov)) in local.into_iter().enumerate() {
            if stationary_at(k) {
                any_stationary = true;
                pooled.count[0] += self.count[k];
                let t = self.tri();
                for (a, b) in pooled.sum.iter_mut().zip(&self.sum[k * n..(k + 1) * n]) {
                    *a += b;
                }
                for (a, b) in pooled.outer.iter_mut().zip(&self.outer[k * t..(k + 1) * t]) {
                    *a += b;
                }
                per_step.push(None);
            } else {
                let m = GaussianMoments::new(mean, cov.clone(), count).map_err(|_| Error::SingularCovariance {
                    step: Some(k),
                    diagonal: diagonal_summary(&cov),
                })?;
                per_step.push(Some(m));
            }
        }
        let stationary = if any_stationary {
            let (count, mean, cov) = pooled.moments(0, 1, reg);
            GaussianMoments::new(mean, cov, count)?
        } else {
            reference
        };
        Ok(ResidualStats {
            per_step,
            stationary,
            runs: self.runs,
        })
    }
}

/// Calibrates from complete traces; `traces[run][step]` is one residual.
pub fn calibrate_stats<R: AsRef<[f64]>>(traces: &[Vec<R>], dim: usize, cfg: &CalibrationConfig) -> Result<ResidualStats> {
    let mut acc = StatsAccumulator::new(dim);
    for trace in traces {
        for (k, r) in trace.iter().enumerate() {
            acc.push(k, r.as_ref())?;
        }
        acc.finish_run();
    }
    acc.finalize(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConfig {
    pub alpha: f64,
    pub dim: usize,
    /// Test `d²` against `n/α` (Chebyshev). When false, `d` itself is
    /// compared with the same bound.
    pub squared: bool,
}

impl DetectionConfig {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        let cfg = Self { alpha, dim, squared: true };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.dim == 0 {
            return Err(Error::InvalidInput("residual dimension must be positive".into()));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.dim as f64 / self.alpha
    }

    pub fn statistic(&self, d: f64) -> f64 {
        if self.squared {
            d * d
        } else {
            d
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub statistic: f64,
    /// `statistic / threshold`; above one is an alarm.
    pub normalized: f64,
    pub alarm: bool,
}

/// Single-step test. Equality with the threshold is not an alarm.
pub fn detect(d: f64, cfg: &DetectionConfig) -> Detection {
    let statistic = cfg.statistic(d);
    let threshold = cfg.threshold();
    Detection {
        statistic,
        normalized: statistic / threshold,
        alarm: statistic > threshold,
    }
}

/// Where the isolation logic places a confirmed fault.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultLocation {
    EncoderOrVelocity,
    Camera,
    Unknown,
}

impl FaultLocation {
    pub fn as_str(&self) -> &'static str {
        match self {
            FaultLocation::EncoderOrVelocity => "encoder_or_velocity",
            FaultLocation::Camera => "camera",
            FaultLocation::Unknown => "unknown",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::EncoderOrVelocity, Self::Camera, Self::Unknown]
            .into_iter()
            .find(|l| l.as_str() == name)
    }
}

/// Decision table: a proprioceptive excursion alone blames the encoders or
/// velocity sensors, a visual one alone blames the camera, anything else
/// is unknown.
pub fn isolate(proprio_exceeded: bool, visual_exceeded: bool) -> FaultLocation {
    match (proprio_exceeded, visual_exceeded) {
        (true, false) => FaultLocation::EncoderOrVelocity,
        (false, true) => FaultLocation::Camera,
        _ => FaultLocation::Unknown,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultVerdict {
    pub detection_step: usize,
    pub location: FaultLocation,
    pub isolation_step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    /// Consecutive alarms needed to confirm a detection.
    pub confirm_steps: usize,
    /// Steps on each side of the confirmed detection searched for
    /// estimator excursions.
    pub isolation_window: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            confirm_steps: 5,
            isolation_window: 50,
        }
    }
}

/// Stateful detection and isolation over a run. The first confirmed
/// detection latches; later alarms are ignored.
#[derive(Debug, Clone)]
pub struct FaultMonitor {
    cfg: MonitorConfig,
    consecutive: usize,
    recent: VecDeque<(bool, bool)>,
    detection_step: Option<usize>,
    seen: (bool, bool),
    verdict: Option<FaultVerdict>,
}

impl FaultMonitor {
    pub fn new(cfg: MonitorConfig) -> Self {
        Self {
            cfg,
            consecutive: 0,
            recent: VecDeque::with_capacity(cfg.isolation_window + 1),
            detection_step: None,
            seen: (false, false),
            verdict: None,
        }
    }

    pub fn detection_step(&self) -> Option<usize> {
        self.detection_step
    }

    pub fn verdict(&self) -> Option<&FaultVerdict> {
        self.verdict.as_ref()
    }

    /// Feeds one step. Returns the verdict on the step it is reached.
    pub fn observe(&mut self, step: usize, alarm: bool, proprio_exceeded: bool, visual_exceeded: bool) -> Option<FaultVerdict> {
        if self.verdict.is_some() {
            return None;
        }
        match self.detection_step {
            None => {
                if self.recent.len() == self.cfg.isolation_window.max(1) {
                    self.recent.pop_front();
                }
                self.recent.push_back((proprio_exceeded, visual_exceeded));
                self.consecutive = if alarm { self.consecutive + 1 } else { 0 };
                if self.consecutive >= self.cfg.confirm_steps.max(1) {
                    self.detection_step = Some(step);
                    self.seen = self
                        .recent
                        .iter()
                        .fold((false, false), |acc, &(p, v)| (acc.0 || p, acc.1 || v));
                } else {
                    return None;
                }
            }
            Some(_) => {
                self.seen.0 |= proprio_exceeded;
                self.seen.1 |= visual_exceeded;
            }
        }
        let detected = self.detection_step.expect("set above");
        if step >= detected + self.cfg.isolation_window {
            let v = FaultVerdict {
                detection_step: detected,
                location: isolate(self.seen.0, self.seen.1),
                isolation_step: step,
            };
            self.verdict = Some(v);
            return Some(v);
        }
        None
    }
}

/// The two single-modality estimators used for isolation. Each descends its
/// own restricted free energy with the nominal precisions, independent of
/// any recovery applied to the controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolationEstimators {
    pub proprio: UaicBelief,
    pub visual: UaicBelief,
}

/// Residuals of the isolation estimators at their pre-update beliefs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolationResiduals {
    /// `[y_q − μ_q, y_q̇ − μ_q̇]` of the proprioceptive estimator.
    pub proprio: Vector4<f64>,
    /// `y_v − g_v(μ_q)` of the visual estimator.
    pub visual: Vector2<f64>,
}

impl IsolationEstimators {
    /// Weaker sensor trust than the controller's, so a biased sensor keeps
    /// its residual for longer instead of being absorbed by the belief.
    pub fn default_precisions() -> UaicPrecisions {
        UaicPrecisions {
            yq: Matrix2::identity() * 0.05,
            yv: Matrix2::identity() * 0.1,
            ..UaicPrecisions::default()
        }
    }

    pub fn new(q0: [f64; 2]) -> Self {
        Self {
            proprio: UaicBelief::at_rest(q0),
            visual: UaicBelief::at_rest(q0),
        }
    }

    pub fn step<G: VisualModel>(
        &mut self,
        y: &SensorReading,
        gv: &G,
        p: &UaicPrecisions,
        kappa_mu: f64,
        dt: f64,
    ) -> Result<IsolationResiduals> {
        let law = ControlLaw::default();
        let advance = |b: &UaicBelief, e: Errors, terms: Terms| {
            let g = state_gradient_terms(&e, p, &law, terms);
            (b.with_state(&(b.state() - g * (dt * kappa_mu))), e)
        };
        let b = &self.proprio;
        let (proprio, ep) = advance(b, errors(b, y, &Blind, &predict_prior(b, dt), None), Terms::PROPRIO);
        let b = &self.visual;
        let (visual, ev) = advance(b, errors(b, y, gv, &predict_prior(b, dt), None), Terms::VISUAL);
        if !(proprio.is_finite() && visual.is_finite()) {
            return Err(Error::IsolationDivergence { step: y.step });
        }
        self.proprio = proprio;
        self.visual = visual;
        Ok(IsolationResiduals {
            proprio: Vector4::new(ep.yq[0], ep.yq[1], ep.yqd[0], ep.yqd[1]),
            visual: ev.yv,
        })
    }
}

/// Stands in for the camera in the proprioceptive estimator, which never
/// looks at it.
struct Blind;

impl VisualModel for Blind {
    fn predict_with_derivative(&self, _q: &Vector2<f64>) -> (Vector2<f64>, nalgebra::Matrix2<f64>) {
        (Vector2::zeros(), Matrix2::zeros())
    }
}

/// Which proprioceptive precisions recovery switches off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProprioRecovery {
    /// Zero `P_yq` only. The velocity sensors stay in the loop, which keeps
    /// the velocity belief observable.
    #[default]
    PositionOnly,
    /// Zero both `P_yq` and `P_yq̇`.
    PositionAndVelocity,
}

/// Precisions after recovery. Returns the input unchanged (and `false`) for
/// an unknown location.
pub fn recover(p: &UaicPrecisions, location: FaultLocation, mode: ProprioRecovery) -> (UaicPrecisions, bool) {
    let mut out = *p;
    match location {
        FaultLocation::EncoderOrVelocity => {
            out.yq = Matrix2::zeros();
            if mode == ProprioRecovery::PositionAndVelocity {
                out.yqd = Matrix2::zeros();
            }
            (out, true)
        }
        FaultLocation::Camera => {
            out.yv = Matrix2::zeros();
            (out, true)
        }
        FaultLocation::Unknown => (out, false),
    }
}

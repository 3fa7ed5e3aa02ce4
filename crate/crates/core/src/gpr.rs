//! Gaussian-process camera model `g_v(q)`.
//!
//! Each camera coordinate is regressed on the joint configuration with a
//! squared-exponential kernel
//!
//! ```text
//! k(a, b) = σ_f² exp(−½ (a − b)ᵀ Θ (a − b)) + σ_n² δ_ab
//! ```
//!
//! where `Θ` is diagonal (inverse squared length scales). Both coordinates
//! share hyperparameters. The posterior mean and its Jacobian with respect
//! to the query configuration are available in closed form.

use alloc::vec::Vec;
use alloc::{format, vec};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix2, Vector2};
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Anything that predicts the camera output and its Jacobian from a joint
/// configuration. [`GprModel`] is the production implementation; tests use
/// analytic models.
pub trait VisualModel {
    /// Returns `(g_v(q), ∂g_v/∂q)` with Jacobian rows indexed by camera
    /// coordinate and columns by joint.
    fn predict_with_derivative(&self, q: &Vector2<f64>) -> (Vector2<f64>, Matrix2<f64>);

    fn predict(&self, q: &Vector2<f64>) -> Vector2<f64> {
        self.predict_with_derivative(q).0
    }
}

impl<T: VisualModel + ?Sized> VisualModel for &T {
    fn predict_with_derivative(&self, q: &Vector2<f64>) -> (Vector2<f64>, Matrix2<f64>) {
        (**self).predict_with_derivative(q)
    }
}

/// Minimum number of training points accepted for hyperparameter fitting.
pub const MIN_TRAINING_POINTS: usize = 4;
const MIN_SEPARATION: f64 = 1e-6;
const JITTER: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GprTrainingSet {
    inputs: Vec<Vector2<f64>>,
    targets_x: DVector<f64>,
    targets_z: DVector<f64>,
}

impl GprTrainingSet {
    /// Fails on empty or mismatched data, non-finite values, or two inputs
    /// closer than 1e-6 rad.
    pub fn new(inputs: Vec<Vector2<f64>>, targets_x: Vec<f64>, targets_z: Vec<f64>) -> Result<Self> {
        let n = inputs.len();
        if n == 0 || targets_x.len() != n || targets_z.len() != n {
            return Err(Error::InvalidInput(format!(
                "training set needs matching nonempty columns, got {n}/{}/{}",
                targets_x.len(),
                targets_z.len()
            )));
        }
        let finite = inputs.iter().all(|q| q.iter().all(|x| x.is_finite()))
            && targets_x.iter().chain(&targets_z).all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidInput("training set contains non-finite values".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (inputs[i] - inputs[j]).norm() <= MIN_SEPARATION {
                    return Err(Error::InvalidInput(format!(
                        "duplicate training configurations at rows {j} and {i}"
                    )));
                }
            }
        }
        Ok(Self {
            inputs,
            targets_x: DVector::from_vec(targets_x),
            targets_z: DVector::from_vec(targets_z),
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vector2<f64>] {
        &self.inputs
    }

    pub fn targets_x(&self) -> &DVector<f64> {
        &self.targets_x
    }

    pub fn targets_z(&self) -> &DVector<f64> {
        &self.targets_z
    }

    /// Same inputs, outputs multiplied by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            inputs: self.inputs.clone(),
            targets_x: &self.targets_x * a,
            targets_z: &self.targets_z * a,
        }
    }

    /// Splits rows into those whose index satisfies `holdout` and the rest.
    pub fn split(&self, holdout: impl Fn(usize) -> bool) -> Result<(Self, Self)> {
        let mut train = (Vec::new(), Vec::new(), Vec::new());
        let mut test = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..self.len() {
            let dst = if holdout(i) { &mut test } else { &mut train };
            dst.0.push(self.inputs[i]);
            dst.1.push(self.targets_x[i]);
            dst.2.push(self.targets_z[i]);
        }
        Ok((
            Self::new(train.0, train.1, train.2)?,
            Self::new(test.0, test.1, test.2)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GprHyperparams {
    /// `σ_f²`
    pub signal_var: f64,
    /// `σ_n²`
    pub noise_var: f64,
    /// Diagonal of `Θ`.
    pub theta: [f64; 2],
}

impl Default for GprHyperparams {
    fn default() -> Self {
        Self {
            signal_var: 1.0,
            noise_var: 1.0,
            theta: [1.0, 1.0],
        }
    }
}

impl GprHyperparams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.signal_var.is_finite()
            && self.signal_var > 0.0
            && self.noise_var.is_finite()
            && self.noise_var >= 0.0
            && self.theta.iter().all(|t| t.is_finite() && *t > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid GP hyperparameters {self:?}")))
        }
    }

    /// Length scales `1/√θ`.
    pub fn length_scales(&self) -> [f64; 2] {
        self.theta.map(|t| 1.0 / libm::sqrt(t))
    }

    fn to_log(self) -> [f64; 4] {
        [
            libm::log(self.signal_var),
            libm::log(self.noise_var),
            libm::log(self.theta[0]),
            libm::log(self.theta[1]),
        ]
    }

    fn from_log(p: [f64; 4]) -> Self {
        Self {
            signal_var: libm::exp(p[0]),
            noise_var: libm::exp(p[1]),
            theta: [libm::exp(p[2]), libm::exp(p[3])],
        }
    }
}

/// Squared-exponential kernel; the `σ_n²` term is added only when
/// `same_index` says both arguments are the same training row.
pub fn kernel(a: &Vector2<f64>, b: &Vector2<f64>, h: &GprHyperparams, same_index: bool) -> f64 {
    let d = a - b;
    let r = h.theta[0] * d[0] * d[0] + h.theta[1] * d[1] * d[1];
    let k = h.signal_var * libm::exp(-0.5 * r);
    if same_index {
        k + h.noise_var
    } else {
        k
    }
}

fn covariance(train: &GprTrainingSet, h: &GprHyperparams) -> DMatrix<f64> {
    let n = train.len();
    let x = train.inputs();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = kernel(&x[i], &x[i], h, true);
        for j in 0..i {
            let v = kernel(&x[i], &x[j], h, false);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Factorizes `K`, retrying once with `1e-9` added to the diagonal.
/// Returns the factor and the jitter that was needed.
fn factorize(mut k: DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if let Some(ch) = Cholesky::new(k.clone()) {
        return Ok((ch, 0.0));
    }
    for i in 0..k.nrows() {
        k[(i, i)] += JITTER;
    }
    match Cholesky::new(k.clone()) {
        Some(ch) => Ok((ch, JITTER)),
        None => {
            let min = k.symmetric_eigenvalues().min();
            Err(Error::IllConditionedKernel { min_eigenvalue: min })
        }
    }
}

/// A fitted GP; immutable once built.
#[derive(Debug, Clone)]
pub struct GprModel {
    train: GprTrainingSet,
    hyper: GprHyperparams,
    chol: Cholesky<f64, Dyn>,
    alpha_x: DVector<f64>,
    alpha_z: DVector<f64>,
    jitter: f64,
}

/// Builds `K`, factorizes it and solves for the weight vectors
/// `α_x = K⁻¹ȳ_x`, `α_z = K⁻¹ȳ_z`.
pub fn fit(train: GprTrainingSet, hyper: GprHyperparams) -> Result<GprModel> {
    hyper.validate()?;
    let (chol, jitter) = factorize(covariance(&train, &hyper))?;
    let alpha_x = chol.solve(train.targets_x());
    let alpha_z = chol.solve(train.targets_z());
    Ok(GprModel {
        train,
        hyper,
        chol,
        alpha_x,
        alpha_z,
        jitter,
    })
}

impl GprModel {
    pub fn hyperparams(&self) -> &GprHyperparams {
        &self.hyper
    }

    pub fn training_set(&self) -> &GprTrainingSet {
        &self.train
    }

    pub fn alpha_x(&self) -> &DVector<f64> {
        &self.alpha_x
    }

    pub fn alpha_z(&self) -> &DVector<f64> {
        &self.alpha_z
    }

    /// Diagonal jitter that had to be added to factorize `K` (0 or 1e-9).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Covariance matrix `K` as used for the fit, jitter included.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mut k = covariance(&self.train, &self.hyper);
        for i in 0..k.nrows() {
            k[(i, i)] += self.jitter;
        }
        k
    }

    /// Refits with new hyperparameters on the same data.
    pub fn refit(&self, hyper: GprHyperparams) -> Result<Self> {
        fit(self.train.clone(), hyper)
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.train.len() as f64;
        let log_det_half: f64 = self.chol.l_dirty().diagonal().iter().map(|d| libm::log(*d)).sum();
        let quad = self.train.targets_x().dot(&self.alpha_x) + self.train.targets_z().dot(&self.alpha_z);
        -0.5 * quad - 2.0 * log_det_half - n * libm::log(2.0 * core::f64::consts::PI)
    }

    /// Gradient of [`Self::log_marginal_likelihood`] with respect to
    /// `(ln σ_f², ln σ_n², ln θ₁, ln θ₂)`.
    pub fn log_marginal_likelihood_gradient(&self) -> [f64; 4] {
        let n = self.train.len();
        let x = self.train.inputs();
        let h = &self.hyper;
        let k_inv = self.chol.inverse();
        let ax = &self.alpha_x;
        let az = &self.alpha_z;
        let mut grad = [0.0; 4];
        // Two outputs share K, so the trace term appears twice:
        //   ∂L/∂p = ½ Σ_out αᵀ(∂K/∂p)α − tr(K⁻¹ ∂K/∂p)
        for i in 0..n {
            for j in 0..n {
                let d = x[i] - x[j];
                let k_se = kernel(&x[i], &x[j], h, false);
                let w = 0.5 * (ax[i] * ax[j] + az[i] * az[j]) - k_inv[(i, j)];
                grad[0] += w * k_se;
                grad[2] += w * k_se * (-0.5 * h.theta[0] * d[0] * d[0]);
                grad[3] += w * k_se * (-0.5 * h.theta[1] * d[1] * d[1]);
            }
            let w_ii = 0.5 * (ax[i] * ax[i] + az[i] * az[i]) - k_inv[(i, i)];
            grad[1] += w_ii * h.noise_var;
        }
        grad
    }

    fn cross_covariance(&self, q: &Vector2<f64>) -> impl Iterator<Item = (usize, f64, Vector2<f64>)> + '_ {
        let q = *q;
        self.train
            .inputs()
            .iter()
            .enumerate()
            .map(move |(i, xi)| (i, kernel(&q, xi, &self.hyper, false), q - xi))
    }
}

impl VisualModel for GprModel {
    fn predict_with_derivative(&self, q: &Vector2<f64>) -> (Vector2<f64>, Matrix2<f64>) {
        let th = self.hyper.theta;
        let mut g = Vector2::zeros();
        let mut jac = Matrix2::zeros();
        for (i, k, d) in self.cross_covariance(q) {
            let (wx, wz) = (k * self.alpha_x[i], k * self.alpha_z[i]);
            g[0] += wx;
            g[1] += wz;
            // ∂k/∂q = −Θ (q − x_i) k
            jac[(0, 0)] -= wx * th[0] * d[0];
            jac[(0, 1)] -= wx * th[1] * d[1];
            jac[(1, 0)] -= wz * th[0] * d[0];
            jac[(1, 1)] -= wz * th[1] * d[1];
        }
        (g, jac)
    }

    fn predict(&self, q: &Vector2<f64>) -> Vector2<f64> {
        self.cross_covariance(q).fold(Vector2::zeros(), |g, (i, k, _)| {
            g + Vector2::new(k * self.alpha_x[i], k * self.alpha_z[i])
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    pub restarts: usize,
    /// Standard deviation of the log-space perturbation used for restarts.
    pub restart_spread: f64,
    pub initial_step: f64,
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            restarts: 3,
            restart_spread: 1.0,
            initial_step: 0.1,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub hyper: GprHyperparams,
    pub log_marginal_likelihood: f64,
    pub initial_log_marginal_likelihood: f64,
    /// Accepted log marginal likelihood values of every restart, in order.
    pub history: Vec<Vec<f64>>,
    /// False when no restart met the tolerance within the iteration budget;
    /// the best hyperparameters seen are still returned.
    pub converged: bool,
}

/// Maximizes the log marginal likelihood by gradient ascent in log-parameter
/// space with backtracking. The first start is `init`; further restarts are
/// random perturbations of it. The result is never worse than `init`.
pub fn optimize_hyperparams<R: RngCore>(
    train: &GprTrainingSet,
    init: GprHyperparams,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<OptimizeOutcome> {
    init.validate()?;
    if init.noise_var <= 0.0 {
        return Err(Error::InvalidInput(
            "noise variance must be positive to optimize in log space".into(),
        ));
    }
    if train.len() < MIN_TRAINING_POINTS {
        return Err(Error::InsufficientCalibration {
            got: train.len(),
            need: MIN_TRAINING_POINTS,
        });
    }
    let lml = |p: [f64; 4]| -> Option<GprModel> {
        fit(train.clone(), GprHyperparams::from_log(p))
            .ok()
            .filter(|m| m.log_marginal_likelihood().is_finite())
    };

    let start = init.to_log();
    let init_model = fit(train.clone(), init)?;
    let init_lml = init_model.log_marginal_likelihood();
    let mut best = (init, init_lml);
    let mut history = Vec::new();
    let mut any_converged = false;

    for restart in 0..cfg.restarts.max(1) {
        let mut p = start;
        if restart > 0 {
            for v in p.iter_mut() {
                let e: f64 = StandardNormal.sample(rng);
                *v += cfg.restart_spread * e;
            }
        }
        let Some(mut model) = lml(p) else { continue };
        let mut value = model.log_marginal_likelihood();
        let mut trace = vec![value];
        let mut step = cfg.initial_step;
        let mut converged = false;
        for _ in 0..cfg.max_iterations {
            let g = model.log_marginal_likelihood_gradient();
            let gnorm = libm::sqrt(g.iter().map(|x| x * x).sum::<f64>());
            if !gnorm.is_finite() {
                break;
            }
            if gnorm <= cfg.tolerance {
                converged = true;
                break;
            }
            let mut accepted = None;
            let mut s = step;
            for _ in 0..30 {
                let cand: [f64; 4] = core::array::from_fn(|i| p[i] + s * g[i] / gnorm);
                if let Some(m) = lml(cand) {
                    let v = m.log_marginal_likelihood();
                    if v > value {
                        accepted = Some((cand, m, v));
                        break;
                    }
                }
                s *= 0.5;
            }
            let Some((cand, m, v)) = accepted else {
                converged = true;
                break;
            };
            let gain = v - value;
            p = cand;
            model = m;
            value = v;
            trace.push(v);
            step = (2.0 * s).min(1.0);
            if gain < cfg.tolerance * (1.0 + value.abs()) {
                converged = true;
                break;
            }
        }
        any_converged |= converged;
        if value > best.1 {
            best = (GprHyperparams::from_log(p), value);
        }
        history.push(trace);
    }

    Ok(OptimizeOutcome {
        hyper: best.0,
        log_marginal_likelihood: best.1,
        initial_log_marginal_likelihood: init_lml,
        history,
        converged: any_converged,
    })
}

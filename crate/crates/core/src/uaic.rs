//! Unbiased active inference controller.
//!
//! The controller keeps a Gaussian belief over the joint state
//! `μ_x = [μ_q, μ_q̇]` and over the action `μ_u`, and descends the free-energy
//!
//! ```text
//! F = ½ ( ε_yqᵀ P_yq ε_yq + ε_yq̇ᵀ P_yq̇ ε_yq̇ + ε_yvᵀ P_yv ε_yv
//!       + ε_xᵀ P_x ε_x + ε_uᵀ P_u ε_u − Σ ln|P_i| )
//! ```
//!
//! with sensory errors `ε_yq = y_q − μ_q`, `ε_yq̇ = y_q̇ − μ_q̇`,
//! `ε_yv = y_v − g_v(μ_q)`, state-prior error `ε_x = μ_x − x̂` against a
//! constant-velocity prediction `x̂`, and action error `ε_u = μ_u − f*(μ_x, μ_d)`.
//! The target `μ_d` enters only through `f*`, so once `μ_u` has caught up
//! with `f*` the state belief is driven by the sensors and the prediction
//! alone.
//!
//! Singular precisions (a sensor switched off after a fault) drop out of the
//! log-determinant sum rather than contributing `-inf`.

use alloc::vec::Vec;
use alloc::format;
use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};

use crate::error::{Error, Result};
use crate::gpr::VisualModel;
use crate::math::{is_finite2, log_det2, quad2, saturate};
use crate::plant::SensorReading;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UaicBelief {
    pub q: Vector2<f64>,
    pub qd: Vector2<f64>,
    pub u: Vector2<f64>,
    /// Integral of the tracking error `μ_d − μ_q` used by the PID in `f*`.
    pub integral: Vector2<f64>,
}

impl UaicBelief {
    pub fn at_rest(q: [f64; 2]) -> Self {
        Self {
            q: Vector2::from(q),
            ..Default::default()
        }
    }

    pub fn state(&self) -> Vector4<f64> {
        Vector4::new(self.q[0], self.q[1], self.qd[0], self.qd[1])
    }

    pub fn with_state(mut self, x: &Vector4<f64>) -> Self {
        self.q = Vector2::new(x[0], x[1]);
        self.qd = Vector2::new(x[2], x[3]);
        self
    }

    pub fn is_finite(&self) -> bool {
        is_finite2(&self.q) && is_finite2(&self.qd) && is_finite2(&self.u) && is_finite2(&self.integral)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UaicPrecisions {
    pub yq: Matrix2<f64>,
    pub yqd: Matrix2<f64>,
    pub yv: Matrix2<f64>,
    pub x: Matrix4<f64>,
    pub u: Matrix2<f64>,
}

impl Default for UaicPrecisions {
    /// Tuned for `κ_μ = 50` at `dt = 1 ms`: the position block of `P_x`
    /// makes each belief step carry the full `μ_q̇·dt` prediction, the
    /// sensor precisions set the correction gains, and `P_u` is small so
    /// action errors barely load the state belief.
    fn default() -> Self {
        Self {
            yq: Matrix2::identity() * 1.0,
            yqd: Matrix2::identity() * 4.0,
            yv: Matrix2::identity() * 0.5,
            x: Matrix4::from_diagonal(&Vector4::new(20.0, 20.0, 1.0, 1.0)),
            u: Matrix2::identity() * 1e-5,
        }
    }
}

impl UaicPrecisions {
    pub fn validate(&self) -> Result<()> {
        let check2 = |name: &str, p: &Matrix2<f64>| -> Result<()> {
            let sym = (p - p.transpose()).amax() <= 1e-12 * (1.0 + p.amax());
            if !sym || !p.iter().all(|x| x.is_finite()) || p.symmetric_eigenvalues().min() < -1e-12 {
                return Err(Error::InvalidInput(format!(
                    "precision {name} must be symmetric positive semidefinite"
                )));
            }
            Ok(())
        };
        check2("P_yq", &self.yq)?;
        check2("P_yqd", &self.yqd)?;
        check2("P_yv", &self.yv)?;
        check2("P_u", &self.u)?;
        let x = &self.x;
        let sym = (x - x.transpose()).amax() <= 1e-12 * (1.0 + x.amax());
        if !sym || !x.iter().all(|v| v.is_finite()) || x.symmetric_eigenvalues().min() < -1e-12 {
            return Err(Error::InvalidInput(
                "precision P_x must be symmetric positive semidefinite".into(),
            ));
        }
        Ok(())
    }
}

/// PID law used as the mean `f*` of the action distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlLaw {
    pub kp: Vector2<f64>,
    pub ki: Vector2<f64>,
    pub kd: Vector2<f64>,
    /// Symmetric clamp on the integral accumulator (rad·s).
    pub integral_limit: f64,
    /// Keep the `∂f*/∂μ_x` term in the state gradient. Turning it off gives
    /// the mean-field simplification where `F_u` does not load the state.
    pub exact_coupling: bool,
}

impl Default for ControlLaw {
    fn default() -> Self {
        Self {
            kp: Vector2::new(20.0, 20.0),
            ki: Vector2::new(25.0, 25.0),
            kd: Vector2::new(12.0, 12.0),
            integral_limit: 2.0,
            exact_coupling: true,
        }
    }
}

impl ControlLaw {
    pub fn validate(&self) -> Result<()> {
        let gains = [self.kp, self.ki, self.kd];
        if gains.iter().flat_map(|g| g.iter()).any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::InvalidInput("PID gains must be nonnegative".into()));
        }
        if !(self.integral_limit.is_finite() && self.integral_limit >= 0.0) {
            return Err(Error::InvalidInput("integral limit must be nonnegative".into()));
        }
        Ok(())
    }

    /// `f*` at a belief with its accumulator held fixed.
    pub fn evaluate(&self, b: &UaicBelief, target: &Vector2<f64>) -> Vector2<f64> {
        self.kp.component_mul(&(target - b.q)) + self.ki.component_mul(&b.integral)
            - self.kd.component_mul(&b.qd)
    }

    /// Accumulator after integrating the tracking error over `dt`, clamped.
    pub fn integrate(&self, b: &UaicBelief, target: &Vector2<f64>, dt: f64) -> Vector2<f64> {
        (b.integral + (target - b.q) * dt).map(|v| v.clamp(-self.integral_limit, self.integral_limit))
    }
}

/// Advances the integral accumulator stored in `b` and returns the PID
/// torque `K_p(μ_d − μ_q) + K_i ∫(μ_d − μ_q) − K_d μ_q̇`.
pub fn f_star(b: &mut UaicBelief, law: &ControlLaw, target: &Vector2<f64>, dt: f64) -> Vector2<f64> {
    b.integral = law.integrate(b, target, dt);
    law.evaluate(b, target)
}

/// Piecewise-constant target schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// `(switch time, target)` pairs sorted by time; the first starts at 0.
    waypoints: Vec<(f64, Vector2<f64>)>,
}

impl Schedule {
    pub fn new(mut waypoints: Vec<(f64, Vector2<f64>)>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::InvalidInput("schedule needs at least one waypoint".into()));
        }
        waypoints.sort_by(|a, b| a.0.total_cmp(&b.0));
        if waypoints[0].0 > 0.0 {
            return Err(Error::InvalidInput("first waypoint must start at t = 0".into()));
        }
        if waypoints.iter().any(|(t, g)| !t.is_finite() || !is_finite2(g)) {
            return Err(Error::InvalidInput("non-finite waypoint".into()));
        }
        Ok(Self { waypoints })
    }

    pub fn constant(target: [f64; 2]) -> Self {
        Self {
            waypoints: alloc::vec![(0.0, Vector2::from(target))],
        }
    }

    pub fn target_at(&self, t: f64) -> Vector2<f64> {
        let idx = self.waypoints.partition_point(|(ts, _)| *ts <= t + 1e-12);
        self.waypoints[idx.saturating_sub(1)].1
    }

    pub fn waypoints(&self) -> &[(f64, Vector2<f64>)] {
        &self.waypoints
    }

    /// Switch times after the start.
    pub fn switch_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.waypoints.iter().skip(1).map(|(t, _)| *t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UaicGains {
    pub kappa_mu: f64,
    pub kappa_u: f64,
    pub torque_limit: f64,
}

impl Default for UaicGains {
    fn default() -> Self {
        Self {
            kappa_mu: 50.0,
            kappa_u: 5e7,
            torque_limit: 200.0,
        }
    }
}

impl UaicGains {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.kappa_mu, self.kappa_u, self.torque_limit]
            .iter()
            .all(|x| x.is_finite() && *x > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("gradient step sizes and torque limit must be positive".into()))
        }
    }
}

/// Constant-velocity prediction `x̂ = [μ_q + dt·μ_q̇, μ_q̇]`.
pub fn predict_prior(b: &UaicBelief, dt: f64) -> Vector4<f64> {
    let q = b.q + b.qd * dt;
    Vector4::new(q[0], q[1], b.qd[0], b.qd[1])
}

/// Which terms a free-energy includes. The controller uses all of them; the
/// fault-isolation estimators use the proprioceptive or visual subsets
/// without the action term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Terms {
    pub proprio: bool,
    pub visual: bool,
    pub action: bool,
}

impl Terms {
    pub const ALL: Terms = Terms { proprio: true, visual: true, action: true };
    pub const PROPRIO: Terms = Terms { proprio: true, visual: false, action: false };
    pub const VISUAL: Terms = Terms { proprio: false, visual: true, action: false };
}

/// Prediction errors of one evaluation, plus the camera prediction they
/// were computed from.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Errors {
    pub yq: Vector2<f64>,
    pub yqd: Vector2<f64>,
    pub yv: Vector2<f64>,
    pub x: Vector4<f64>,
    pub u: Vector2<f64>,
    pub camera_jacobian: Matrix2<f64>,
}

/// `action` is `None` for the isolation estimators, which carry no action
/// belief.
pub(crate) fn errors<G: VisualModel>(
    b: &UaicBelief,
    y: &SensorReading,
    gv: &G,
    x_hat: &Vector4<f64>,
    action: Option<(&ControlLaw, &Vector2<f64>)>,
) -> Errors {
    let (g, jac) = gv.predict_with_derivative(&b.q);
    Errors {
        yq: y.q - b.q,
        yqd: y.qd - b.qd,
        yv: y.v - g,
        x: b.state() - x_hat,
        u: action.map_or(Vector2::zeros(), |(law, target)| b.u - law.evaluate(b, target)),
        camera_jacobian: jac,
    }
}

pub(crate) fn free_energy_terms(e: &Errors, p: &UaicPrecisions, terms: Terms) -> f64 {
    let mut quad = e.x.dot(&(p.x * e.x));
    let mut log_det = {
        let d = p.x.determinant();
        if d > 0.0 { libm::log(d) } else { 0.0 }
    };
    if terms.proprio {
        quad += quad2(&e.yq, &p.yq) + quad2(&e.yqd, &p.yqd);
        log_det += log_det2(&p.yq).unwrap_or(0.0) + log_det2(&p.yqd).unwrap_or(0.0);
    }
    if terms.visual {
        quad += quad2(&e.yv, &p.yv);
        log_det += log_det2(&p.yv).unwrap_or(0.0);
    }
    if terms.action {
        quad += quad2(&e.u, &p.u);
        log_det += log_det2(&p.u).unwrap_or(0.0);
    }
    0.5 * (quad - log_det)
}

pub(crate) fn state_gradient_terms(
    e: &Errors,
    p: &UaicPrecisions,
    law: &ControlLaw,
    terms: Terms,
) -> Vector4<f64> {
    let prior = p.x * e.x;
    let mut gq = Vector2::new(prior[0], prior[1]);
    let mut gqd = Vector2::new(prior[2], prior[3]);
    if terms.proprio {
        gq -= p.yq * e.yq;
        gqd -= p.yqd * e.yqd;
    }
    if terms.visual {
        gq -= e.camera_jacobian.transpose() * (p.yv * e.yv);
    }
    if terms.action && law.exact_coupling {
        // ∂ε_u/∂μ_q = K_p and ∂ε_u/∂μ_q̇ = K_d (accumulator held fixed)
        let pu = p.u * e.u;
        gq += law.kp.component_mul(&pu);
        gqd += law.kd.component_mul(&pu);
    }
    Vector4::new(gq[0], gq[1], gqd[0], gqd[1])
}

/// u-AIC free-energy (additive constant dropped).
pub fn free_energy_uaic<G: VisualModel>(
    b: &UaicBelief,
    y: &SensorReading,
    gv: &G,
    x_hat: &Vector4<f64>,
    law: &ControlLaw,
    target: &Vector2<f64>,
    p: &UaicPrecisions,
) -> f64 {
    free_energy_terms(&errors(b, y, gv, x_hat, Some((law, target))), p, Terms::ALL)
}

/// `(∂F/∂μ_x, ∂F/∂μ_u)`.
pub fn gradients_uaic<G: VisualModel>(
    b: &UaicBelief,
    y: &SensorReading,
    gv: &G,
    x_hat: &Vector4<f64>,
    law: &ControlLaw,
    target: &Vector2<f64>,
    p: &UaicPrecisions,
) -> (Vector4<f64>, Vector2<f64>) {
    let e = errors(b, y, gv, x_hat, Some((law, target)));
    (state_gradient_terms(&e, p, law, Terms::ALL), p.u * e.u)
}

/// Everything one control cycle produces.
#[derive(Debug, Clone, Copy)]
pub struct StepOutput {
    pub belief: UaicBelief,
    /// Torque sent to the plant: `μ_u` after saturation.
    pub torque: Vector2<f64>,
    /// Sensory prediction errors at the pre-update belief,
    /// `[y_q − μ_q, y_q̇ − μ_q̇, y_v − g_v(μ_q)]`.
    pub spe: [Vector2<f64>; 3],
    pub free_energy: f64,
}

/// One estimation and control cycle: predict, take the gradients at the
/// current belief, apply first-order Euler updates
/// `μ_x ← μ_x − dt·κ_μ·∂F/∂μ_x`, `μ_u ← μ_u − dt·κ_u·∂F/∂μ_u`, advance the
/// PID integral, and emit the saturated action.
pub fn controller_step<G: VisualModel>(
    b: &UaicBelief,
    y: &SensorReading,
    gv: &G,
    law: &ControlLaw,
    target: &Vector2<f64>,
    p: &UaicPrecisions,
    gains: &UaicGains,
    dt: f64,
) -> Result<StepOutput> {
    let x_hat = predict_prior(b, dt);
    let e = errors(b, y, gv, &x_hat, Some((law, target)));
    let grad_x = state_gradient_terms(&e, p, law, Terms::ALL);
    let grad_u = p.u * e.u;

    let mut next = b.with_state(&(b.state() - grad_x * (dt * gains.kappa_mu)));
    next.u = b.u - grad_u * (dt * gains.kappa_u);
    next.integral = law.integrate(b, target, dt);
    if !next.is_finite() {
        return Err(Error::ControllerDivergence { step: y.step });
    }
    Ok(StepOutput {
        belief: next,
        torque: saturate(next.u, gains.torque_limit),
        spe: [e.yq, e.yqd, e.yv],
        free_energy: free_energy_terms(&e, p, Terms::ALL),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Smooth analytic stand-in for the camera.
    struct Analytic;

    impl VisualModel for Analytic {
        fn predict_with_derivative(&self, q: &Vector2<f64>) -> (Vector2<f64>, Matrix2<f64>) {
            let (s1, c1) = (libm::sin(q[0]), libm::cos(q[0]));
            let (s12, c12) = (libm::sin(q[0] + q[1]), libm::cos(q[0] + q[1]));
            (
                Vector2::new(c1 + c12, s1 + s12),
                Matrix2::new(-s1 - s12, -s12, c1 + c12, c12),
            )
        }
    }

    fn v2(rng: &mut ChaCha8Rng, r: f64) -> Vector2<f64> {
        Vector2::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
    }

    fn random_case(rng: &mut ChaCha8Rng) -> (UaicBelief, SensorReading, Vector4<f64>, Vector2<f64>, UaicPrecisions) {
        let b = UaicBelief { q: v2(rng, 1.5), qd: v2(rng, 1.0), u: v2(rng, 10.0), integral: v2(rng, 1.0) };
        let y = SensorReading { q: v2(rng, 1.5), qd: v2(rng, 1.0), v: v2(rng, 2.0), step: 0 };
        let x_hat = Vector4::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let mut diag = || rng.gen_range(0.2..3.0);
        let p = UaicPrecisions {
            yq: Matrix2::from_diagonal(&Vector2::new(diag(), diag())),
            yqd: Matrix2::from_diagonal(&Vector2::new(diag(), diag())),
            yv: Matrix2::from_diagonal(&Vector2::new(diag(), diag())),
            x: Matrix4::from_diagonal(&Vector4::new(diag(), diag(), diag(), diag())),
            u: Matrix2::from_diagonal(&Vector2::new(diag(), diag())) * 0.01,
        };
        (b, y, x_hat, v2(rng, 1.0), p)
    }

    /// Sum of quadratic forms written out term by term.
    fn oracle_free_energy(b: &UaicBelief, y: &SensorReading, x_hat: &Vector4<f64>, law: &ControlLaw, target: &Vector2<f64>, p: &UaicPrecisions) -> f64 {
        let g = Analytic.predict(&b.q);
        let mut f = 0.0;
        for i in 0..2 {
            let eq = y.q[i] - b.q[i];
            let eqd = y.qd[i] - b.qd[i];
            let ev = y.v[i] - g[i];
            let fs = law.kp[i] * (target[i] - b.q[i]) + law.ki[i] * b.integral[i] - law.kd[i] * b.qd[i];
            let eu = b.u[i] - fs;
            f += p.yq[(i, i)] * eq * eq + p.yqd[(i, i)] * eqd * eqd + p.yv[(i, i)] * ev * ev + p.u[(i, i)] * eu * eu;
            f -= libm::log(p.yq[(i, i)]) + libm::log(p.yqd[(i, i)]) + libm::log(p.yv[(i, i)]) + libm::log(p.u[(i, i)]);
        }
        let x = [b.q[0], b.q[1], b.qd[0], b.qd[1]];
        for i in 0..4 {
            let ex = x[i] - x_hat[i];
            f += p.x[(i, i)] * ex * ex - libm::log(p.x[(i, i)]);
        }
        0.5 * f
    }

    #[test]
    fn prediction_cases() {
        let b = UaicBelief { q: Vector2::new(0.3, -0.2), ..Default::default() };
        assert_eq!(predict_prior(&b, 1e-3), b.state());
        let b = UaicBelief { qd: Vector2::new(1.0, -1.0), ..Default::default() };
        let x = predict_prior(&b, 0.001);
        assert!((x[0] - 0.001).abs() < 1e-18 && (x[1] + 0.001).abs() < 1e-18);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let b = UaicBelief { q: v2(&mut rng, 2.0), qd: v2(&mut rng, 2.0), ..Default::default() };
            let dt = rng.gen_range(1e-4..1e-2);
            let mut a = Matrix4::identity();
            a[(0, 2)] = dt;
            a[(1, 3)] = dt;
            assert!((a * b.state() - predict_prior(&b, dt)).amax() < 1e-15);
        }
    }

    #[test]
    fn f_star_cases() {
        let law = ControlLaw::default();
        let mut b = UaicBelief::at_rest([0.4, -0.1]);
        assert_eq!(f_star(&mut b, &law, &Vector2::new(0.4, -0.1), 1e-3), Vector2::zeros());

        let p_only = ControlLaw { kp: Vector2::new(10.0, 10.0), ki: Vector2::zeros(), kd: Vector2::zeros(), ..law };
        let mut b = UaicBelief::at_rest([0.0, 0.0]);
        let u = f_star(&mut b, &p_only, &Vector2::new(0.1, 0.0), 1e-3);
        assert!((u - Vector2::new(1.0, 0.0)).amax() < 1e-12);
    }

    #[test]
    fn integral_is_clamped() {
        let law = ControlLaw::default();
        let mut b = UaicBelief::at_rest([0.0, 0.0]);
        for _ in 0..10_000 {
            f_star(&mut b, &law, &Vector2::new(3.0, -3.0), 1e-2);
        }
        assert_eq!(b.integral, Vector2::new(2.0, -2.0));
    }

    #[test]
    fn zero_errors_give_zero_free_energy() {
        let b = UaicBelief::at_rest([0.2, 0.3]);
        let g = Analytic.predict(&b.q);
        let y = SensorReading { q: b.q, qd: b.qd, v: g, step: 0 };
        let p = UaicPrecisions {
            yq: Matrix2::identity(),
            yqd: Matrix2::identity(),
            yv: Matrix2::identity(),
            x: Matrix4::identity(),
            u: Matrix2::identity(),
        };
        let f = free_energy_uaic(&b, &y, &Analytic, &b.state(), &ControlLaw::default(), &b.q, &p);
        assert!(f.abs() < 1e-15);
    }

    #[test]
    fn doubling_encoder_precision() {
        let b = UaicBelief::at_rest([0.2, 0.3]);
        let y = SensorReading { q: b.q + Vector2::new(0.3, -0.4), qd: b.qd, v: Analytic.predict(&b.q), step: 0 };
        let p = UaicPrecisions {
            yq: Matrix2::identity(),
            yqd: Matrix2::identity(),
            yv: Matrix2::identity(),
            x: Matrix4::identity(),
            u: Matrix2::identity(),
        };
        let law = ControlLaw::default();
        let f1 = free_energy_uaic(&b, &y, &Analytic, &b.state(), &law, &b.q, &p);
        let p2 = UaicPrecisions { yq: Matrix2::identity() * 2.0, ..p };
        let f2 = free_energy_uaic(&b, &y, &Analytic, &b.state(), &law, &b.q, &p2);
        let expected = 0.5 * 0.25 - 0.5 * 2.0 * libm::log(2.0);
        assert!((f2 - f1 - expected).abs() < 1e-14);
    }

    #[test]
    fn free_energy_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let law = ControlLaw::default();
        for _ in 0..100 {
            let (b, y, x_hat, target, p) = random_case(&mut rng);
            let f = free_energy_uaic(&b, &y, &Analytic, &x_hat, &law, &target, &p);
            let o = oracle_free_energy(&b, &y, &x_hat, &law, &target, &p);
            assert!((f - o).abs() <= 1e-12 * (1.0 + o.abs()), "{f} vs {o}");
        }
    }

    #[test]
    fn action_gradient_vanishes_when_action_matches_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let law = ControlLaw::default();
        let (mut b, y, x_hat, target, p) = random_case(&mut rng);
        b.u = law.evaluate(&b, &target);
        let (_, gu) = gradients_uaic(&b, &y, &Analytic, &x_hat, &law, &target, &p);
        assert_eq!(gu, Vector2::zeros());
    }

    #[test]
    fn zero_camera_precision_decouples_camera() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let law = ControlLaw::default();
        let (b, mut y, x_hat, target, mut p) = random_case(&mut rng);
        p.yv = Matrix2::zeros();
        let (g1, _) = gradients_uaic(&b, &y, &Analytic, &x_hat, &law, &target, &p);
        y.v += Vector2::new(0.7, -3.0);
        let (g2, _) = gradients_uaic(&b, &y, &Analytic, &x_hat, &law, &target, &p);
        assert_eq!(g1, g2);
    }

    #[test]
    fn schedule_lookup() {
        let s = Schedule::new(alloc::vec![
            (6.0, Vector2::new(-0.6, 0.2)),
            (0.0, Vector2::new(-0.2, 0.5)),
        ])
        .unwrap();
        assert_eq!(s.target_at(0.0), Vector2::new(-0.2, 0.5));
        assert_eq!(s.target_at(5.999), Vector2::new(-0.2, 0.5));
        assert_eq!(s.target_at(6.0), Vector2::new(-0.6, 0.2));
        assert_eq!(s.switch_times().collect::<Vec<_>>(), alloc::vec![6.0]);
        assert!(Schedule::new(alloc::vec![(1.0, Vector2::zeros())]).is_err());
    }
}

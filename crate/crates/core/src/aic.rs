//! Standard active inference controller with generalized motions.
//!
//! Kept as the baseline: its state prior `μ' = μ_d − μ` pulls the belief
//! towards the target, so every goal change shows up in the sensory
//! prediction errors even when no sensor is faulty.

use alloc::format;
use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::gpr::VisualModel;
use crate::math::{is_finite2, log_det2, quad2, saturate};
use crate::plant::SensorReading;

/// `μ̃ = [μ, μ′, μ″]`, truncated at second order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneralizedBelief {
    pub mu: Vector2<f64>,
    pub mu_p: Vector2<f64>,
    pub mu_pp: Vector2<f64>,
}

impl GeneralizedBelief {
    pub fn at_rest(q: [f64; 2]) -> Self {
        Self {
            mu: Vector2::from(q),
            ..Default::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        is_finite2(&self.mu) && is_finite2(&self.mu_p) && is_finite2(&self.mu_pp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AicPrecisions {
    pub yq: Matrix2<f64>,
    pub yqd: Matrix2<f64>,
    pub yv: Matrix2<f64>,
    pub mu: Matrix2<f64>,
    pub mu_p: Matrix2<f64>,
}

impl Default for AicPrecisions {
    fn default() -> Self {
        let i = Matrix2::identity();
        Self {
            yq: i,
            yqd: i,
            yv: i,
            mu: i,
            mu_p: i,
        }
    }
}

impl AicPrecisions {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("P_yq", &self.yq),
            ("P_yqd", &self.yqd),
            ("P_yv", &self.yv),
            ("P_mu", &self.mu),
            ("P_mu'", &self.mu_p),
        ] {
            let sym = (p - p.transpose()).amax() <= 1e-12 * (1.0 + p.amax());
            if !sym || p.symmetric_eigenvalues().min() < -1e-12 {
                return Err(Error::InvalidInput(format!(
                    "precision {name} must be symmetric positive semidefinite"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AicGains {
    pub kappa_mu: f64,
    pub kappa_u: f64,
    /// Scale of the linear `∂y/∂u` approximation: the position and velocity
    /// rows are `scale·I`, the camera rows are zero.
    pub action_jacobian: f64,
    pub torque_limit: f64,
}

impl Default for AicGains {
    fn default() -> Self {
        Self {
            kappa_mu: 20.0,
            kappa_u: 500.0,
            action_jacobian: 1.0,
            torque_limit: 50.0,
        }
    }
}

/// Prediction errors `(ε_yq, ε_yq̇, ε_v, ε_μ, ε_μ′)` with `τ = 1`.
struct Errors {
    yq: Vector2<f64>,
    yqd: Vector2<f64>,
    yv: Vector2<f64>,
    mu: Vector2<f64>,
    mu_p: Vector2<f64>,
    camera_jacobian: Matrix2<f64>,
}

fn errors<G: VisualModel>(b: &GeneralizedBelief, y: &SensorReading, gv: &G, target: &Vector2<f64>) -> Errors {
    let (g, jac) = gv.predict_with_derivative(&b.mu);
    Errors {
        yq: y.q - b.mu,
        yqd: y.qd - b.mu_p,
        yv: y.v - g,
        mu: b.mu_p + b.mu - target,
        mu_p: b.mu_pp + b.mu_p,
        camera_jacobian: jac,
    }
}

pub fn free_energy_aic<G: VisualModel>(
    b: &GeneralizedBelief,
    y: &SensorReading,
    gv: &G,
    target: &Vector2<f64>,
    p: &AicPrecisions,
) -> f64 {
    let e = errors(b, y, gv, target);
    let terms = [
        (e.yq, p.yq),
        (e.yqd, p.yqd),
        (e.yv, p.yv),
        (e.mu, p.mu),
        (e.mu_p, p.mu_p),
    ];
    0.5 * terms
        .iter()
        .map(|(e, p)| quad2(e, p) - log_det2(p).unwrap_or(0.0))
        .sum::<f64>()
}

/// `∂F/∂μ̃` as `(∂F/∂μ, ∂F/∂μ′, ∂F/∂μ″)`.
pub fn gradients_aic<G: VisualModel>(
    b: &GeneralizedBelief,
    y: &SensorReading,
    gv: &G,
    target: &Vector2<f64>,
    p: &AicPrecisions,
) -> [Vector2<f64>; 3] {
    let e = errors(b, y, gv, target);
    let pe_mu = p.mu * e.mu;
    let pe_mu_p = p.mu_p * e.mu_p;
    [
        -p.yq * e.yq - e.camera_jacobian.transpose() * (p.yv * e.yv) + pe_mu,
        -p.yqd * e.yqd + pe_mu + pe_mu_p,
        pe_mu_p,
    ]
}

/// `μ̃ ← μ̃ + dt (D μ̃ − κ_μ ∂F/∂μ̃)` with `D` the upward shift.
pub fn belief_update_aic<G: VisualModel>(
    b: &GeneralizedBelief,
    y: &SensorReading,
    gv: &G,
    target: &Vector2<f64>,
    p: &AicPrecisions,
    kappa_mu: f64,
    dt: f64,
) -> Result<GeneralizedBelief> {
    let [g0, g1, g2] = gradients_aic(b, y, gv, target, p);
    let next = GeneralizedBelief {
        mu: b.mu + (b.mu_p - g0 * kappa_mu) * dt,
        mu_p: b.mu_p + (b.mu_pp - g1 * kappa_mu) * dt,
        mu_pp: b.mu_pp - g2 * (kappa_mu * dt),
    };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::ControllerDivergence { step: y.step })
    }
}

/// `u ← u − dt κ_u Cᵀ ∂F/∂y`, saturated. With `ε = y − g(μ)` the gradient
/// `∂F/∂y = Pε`, so a reading above the belief lowers the torque.
pub fn action_update_aic(
    u: &Vector2<f64>,
    b: &GeneralizedBelief,
    y: &SensorReading,
    p: &AicPrecisions,
    gains: &AicGains,
    dt: f64,
) -> Vector2<f64> {
    let dfdy = p.yq * (y.q - b.mu) + p.yqd * (y.qd - b.mu_p);
    saturate(u - dfdy * (gains.action_jacobian * gains.kappa_u * dt), gains.torque_limit)
}

/// Quadratic sensory prediction errors `εᵀ P ε` for encoders, velocity
/// sensors and camera.
pub fn spe_quadratic<G: VisualModel>(
    y: &SensorReading,
    b: &GeneralizedBelief,
    gv: &G,
    p: &AicPrecisions,
) -> [f64; 3] {
    let g = gv.predict(&b.mu);
    [
        quad2(&(y.q - b.mu), &p.yq),
        quad2(&(y.qd - b.mu_p), &p.yqd),
        quad2(&(y.v - g), &p.yv),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Flat;

    impl VisualModel for Flat {
        fn predict_with_derivative(&self, q: &Vector2<f64>) -> (Vector2<f64>, Matrix2<f64>) {
            (*q, Matrix2::identity())
        }
    }

    fn reading(q: [f64; 2], qd: [f64; 2], v: [f64; 2]) -> SensorReading {
        SensorReading {
            q: Vector2::from(q),
            qd: Vector2::from(qd),
            v: Vector2::from(v),
            step: 0,
        }
    }

    #[test]
    fn zero_errors_identity_precisions() {
        let b = GeneralizedBelief::at_rest([0.3, 0.1]);
        let y = reading([0.3, 0.1], [0.0, 0.0], [0.3, 0.1]);
        let f = free_energy_aic(&b, &y, &Flat, &b.mu, &AicPrecisions::default());
        assert_eq!(f, 0.0);
    }

    #[test]
    fn single_encoder_error() {
        let b = GeneralizedBelief::at_rest([0.3, 0.1]);
        let y = reading([1.3, 0.1], [0.0, 0.0], [0.3, 0.1]);
        let f = free_energy_aic(&b, &y, &Flat, &b.mu, &AicPrecisions::default());
        assert!((f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_is_kept() {
        let b = GeneralizedBelief::at_rest([0.3, 0.1]);
        let y = reading([0.3, 0.1], [0.0, 0.0], [0.3, 0.1]);
        let next = belief_update_aic(&b, &y, &Flat, &b.mu, &AicPrecisions::default(), 20.0, 1e-3).unwrap();
        assert_eq!(next, b);
    }

    #[test]
    fn action_sign_reduces_position_error() {
        let b = GeneralizedBelief::at_rest([0.0, 0.0]);
        let y = reading([0.1, 0.0], [0.0, 0.0], [0.0, 0.0]);
        let p = AicPrecisions::default();
        let g = AicGains::default();
        let u0 = Vector2::zeros();
        assert_eq!(action_update_aic(&u0, &GeneralizedBelief::default(), &reading([0.0; 2], [0.0; 2], [0.0; 2]), &p, &g, 1e-3), u0);
        let u = action_update_aic(&u0, &b, &y, &p, &g, 1e-3);
        assert!(u[0] < 0.0);
        assert_eq!(u[1], 0.0);
    }

    #[test]
    fn spe_quadratic_cases() {
        let b = GeneralizedBelief::at_rest([0.0, 0.0]);
        let p = AicPrecisions::default();
        assert_eq!(spe_quadratic(&reading([0.0; 2], [0.0; 2], [0.0; 2]), &b, &Flat, &p), [0.0; 3]);
        let r = spe_quadratic(&reading([3.0, 4.0], [0.0; 2], [0.0; 2]), &b, &Flat, &p);
        assert_eq!(r[0], 25.0);
    }
}

//! Noiseless closed loop with an exact camera model.

use uaic_core::fdi::compute_residual;
use uaic_core::plant::{forward_kinematics, integrate_step};
use uaic_core::uaic::controller_step;
use uaic_core::{
    ControlLaw, ManipulatorParams, Matrix2, PlantState, SensorReading, UaicBelief, UaicGains, UaicPrecisions,
    Vector2, VisualModel,
};

struct Kinematics(ManipulatorParams);

impl VisualModel for Kinematics {
    fn predict_with_derivative(&self, q: &Vector2<f64>) -> (Vector2<f64>, Matrix2<f64>) {
        let p = &self.0;
        let (s1, c1) = q[0].sin_cos();
        let (s12, c12) = (q[0] + q[1]).sin_cos();
        let j = Matrix2::new(-p.l1 * s1 - p.l2 * s12, -p.l2 * s12, p.l1 * c1 + p.l2 * c12, p.l2 * c12);
        (forward_kinematics(q, p), j)
    }
}

#[test]
fn healthy_residual_vanishes_without_noise() {
    let arm = ManipulatorParams::default();
    let gv = Kinematics(arm);
    let (law, p, gains) = (ControlLaw::default(), UaicPrecisions::default(), UaicGains::default());
    let target = Vector2::new(-0.2, 0.5);
    let dt = 1e-3;
    let mut x = PlantState::at_rest([-std::f64::consts::FRAC_PI_2, 0.0]);
    let mut b = UaicBelief { q: x.q, ..Default::default() };
    let mut last = f64::NAN;
    for k in 0..15_000 {
        let y = SensorReading { q: x.q, qd: x.qd, v: forward_kinematics(&x.q, &arm), step: k };
        last = compute_residual(&y, &b, &gv).values.norm();
        let out = controller_step(&b, &y, &gv, &law, &target, &p, &gains, dt).unwrap();
        b = out.belief;
        x = integrate_step(&x, &out.torque, dt, &arm).unwrap();
    }
    assert!(last < 1e-6, "residual {last:e}");
    // the integral mode is slow, so the arm itself is still creeping in
    assert!((x.q - target).norm() < 1e-4, "{:?}", x.q);
}

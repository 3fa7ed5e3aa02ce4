//! Simulated two-link planar arm, its sensors, and scripted sensor faults.
//!
//! This is the only module that sees ground truth. Joint angles are measured
//! from the positive x axis with z pointing up, so `q = [-π/2, 0]` is the arm
//! hanging straight down. Links are uniform rods: centre of mass at mid-length
//! and inertia `m l² / 12` about it.

use alloc::format;
use nalgebra::{Matrix2, Vector2};
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::math::is_finite2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManipulatorParams {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub l2: f64,
    /// Diagonal of the viscous friction matrix `D`.
    pub friction: [f64; 2],
    pub gravity: f64,
}

impl Default for ManipulatorParams {
    fn default() -> Self {
        Self {
            m1: 1.0,
            m2: 1.0,
            l1: 1.0,
            l2: 1.0,
            friction: [0.5, 0.5],
            gravity: 9.81,
        }
    }
}

impl ManipulatorParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.m1, self.m2, self.l1, self.l2];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "link masses and lengths must be positive, got {positive:?}"
            )));
        }
        if self.friction.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "friction must be nonnegative, got {:?}",
                self.friction
            )));
        }
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "gravity must be nonnegative, got {}",
                self.gravity
            )));
        }
        Ok(())
    }

    fn lc1(&self) -> f64 {
        0.5 * self.l1
    }

    fn lc2(&self) -> f64 {
        0.5 * self.l2
    }

    fn i1(&self) -> f64 {
        self.m1 * self.l1 * self.l1 / 12.0
    }

    fn i2(&self) -> f64 {
        self.m2 * self.l2 * self.l2 / 12.0
    }

    /// Common factor `m2 l1 lc2` of the configuration-dependent terms.
    fn coupling(&self) -> f64 {
        self.m2 * self.l1 * self.lc2()
    }

    pub fn reach(&self) -> f64 {
        self.l1 + self.l2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    pub q: Vector2<f64>,
    pub qd: Vector2<f64>,
}

impl PlantState {
    pub fn new(q: [f64; 2], qd: [f64; 2]) -> Self {
        Self {
            q: Vector2::from(q),
            qd: Vector2::from(qd),
        }
    }

    pub fn at_rest(q: [f64; 2]) -> Self {
        Self::new(q, [0.0, 0.0])
    }

    pub fn is_finite(&self) -> bool {
        is_finite2(&self.q) && is_finite2(&self.qd)
    }
}

/// Inertia matrix `M(q)`.
pub fn mass_matrix(q: &Vector2<f64>, p: &ManipulatorParams) -> Matrix2<f64> {
    let (lc1, lc2) = (p.lc1(), p.lc2());
    let c2 = libm::cos(q[1]);
    let m22 = p.m2 * lc2 * lc2 + p.i2();
    let m12 = m22 + p.coupling() * c2;
    let m11 = p.m1 * lc1 * lc1 + p.i1() + p.m2 * p.l1 * p.l1 + m22 + 2.0 * p.coupling() * c2;
    Matrix2::new(m11, m12, m12, m22)
}

/// Time derivative of `M(q)` along `q̇`.
pub fn mass_matrix_dot(state: &PlantState, p: &ManipulatorParams) -> Matrix2<f64> {
    let h = -p.coupling() * libm::sin(state.q[1]) * state.qd[1];
    Matrix2::new(2.0 * h, h, h, 0.0)
}

/// Coriolis/centrifugal matrix `C(q, q̇)` (Christoffel form, so `Ṁ − 2C` is skew).
pub fn coriolis(state: &PlantState, p: &ManipulatorParams) -> Matrix2<f64> {
    let h = -p.coupling() * libm::sin(state.q[1]);
    let (qd1, qd2) = (state.qd[0], state.qd[1]);
    Matrix2::new(h * qd2, h * (qd1 + qd2), -h * qd1, 0.0)
}

/// Gravity torque `G(q)`.
pub fn gravity_torque(q: &Vector2<f64>, p: &ManipulatorParams) -> Vector2<f64> {
    let c1 = libm::cos(q[0]);
    let c12 = libm::cos(q[0] + q[1]);
    let g2 = p.m2 * p.lc2() * p.gravity * c12;
    let g1 = (p.m1 * p.lc1() + p.m2 * p.l1) * p.gravity * c1 + g2;
    Vector2::new(g1, g2)
}

pub fn friction_matrix(p: &ManipulatorParams) -> Matrix2<f64> {
    Matrix2::new(p.friction[0], 0.0, 0.0, p.friction[1])
}

/// Solves `M(q) q̈ = u − C(q, q̇) q̇ − D q̇ − G(q)` for `q̈`.
pub fn dynamics_accel(
    state: &PlantState,
    u: &Vector2<f64>,
    p: &ManipulatorParams,
) -> Result<Vector2<f64>> {
    if !state.is_finite() || !is_finite2(u) {
        return Err(Error::InvalidInput(format!(
            "non-finite dynamics input: q={:?} qd={:?} u={:?}",
            state.q.as_slice(),
            state.qd.as_slice(),
            u.as_slice()
        )));
    }
    let m = mass_matrix(&state.q, p);
    let rhs = u - coriolis(state, p) * state.qd - friction_matrix(p) * state.qd
        - gravity_torque(&state.q, p);
    // 2x2 closed-form solve; det(M) > 0 for positive masses and lengths.
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Ok(Vector2::new(
        (m[(1, 1)] * rhs[0] - m[(0, 1)] * rhs[1]) / det,
        (m[(0, 0)] * rhs[1] - m[(1, 0)] * rhs[0]) / det,
    ))
}

/// Kinetic energy `½ q̇ᵀ M(q) q̇`.
pub fn kinetic_energy(state: &PlantState, p: &ManipulatorParams) -> f64 {
    0.5 * state.qd.dot(&(mass_matrix(&state.q, p) * state.qd))
}

/// Potential energy, zero when both links hang straight down.
pub fn potential_energy(q: &Vector2<f64>, p: &ManipulatorParams) -> f64 {
    let z1 = p.lc1() * libm::sin(q[0]);
    let z2 = p.l1 * libm::sin(q[0]) + p.lc2() * libm::sin(q[0] + q[1]);
    let z1_min = -p.lc1();
    let z2_min = -(p.l1 + p.lc2());
    p.gravity * (p.m1 * (z1 - z1_min) + p.m2 * (z2 - z2_min))
}

pub fn total_energy(state: &PlantState, p: &ManipulatorParams) -> f64 {
    kinetic_energy(state, p) + potential_energy(&state.q, p)
}

/// One fixed-step RK4 step with the torque held constant over the step.
pub fn integrate_step(
    state: &PlantState,
    u: &Vector2<f64>,
    dt: f64,
    p: &ManipulatorParams,
) -> Result<PlantState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let deriv = |s: &PlantState| -> Result<(Vector2<f64>, Vector2<f64>)> {
        Ok((s.qd, dynamics_accel(s, u, p)?))
    };
    let shift = |s: &PlantState, d: &(Vector2<f64>, Vector2<f64>), h: f64| PlantState {
        q: s.q + d.0 * h,
        qd: s.qd + d.1 * h,
    };
    let diverged = |e: Error| match e {
        Error::InvalidInput(_) => Error::PlantDivergence,
        other => other,
    };

    let k1 = deriv(state)?;
    let k2 = deriv(&shift(state, &k1, 0.5 * dt)).map_err(diverged)?;
    let k3 = deriv(&shift(state, &k2, 0.5 * dt)).map_err(diverged)?;
    let k4 = deriv(&shift(state, &k3, dt)).map_err(diverged)?;
    let next = PlantState {
        q: state.q + (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) * (dt / 6.0),
        qd: state.qd + (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1) * (dt / 6.0),
    };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::PlantDivergence)
    }
}

/// Planar end-effector position `(x, z)`.
pub fn forward_kinematics(q: &Vector2<f64>, p: &ManipulatorParams) -> Vector2<f64> {
    let (s1, c1) = (libm::sin(q[0]), libm::cos(q[0]));
    let (s12, c12) = (libm::sin(q[0] + q[1]), libm::cos(q[0] + q[1]));
    Vector2::new(p.l1 * c1 + p.l2 * c12, p.l1 * s1 + p.l2 * s12)
}

/// Rectangular joint-space region the experiments move in. Used both to
/// place the camera and to lay out the GP training grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Workspace {
    pub q1: [f64; 2],
    pub q2: [f64; 2],
}

impl Default for Workspace {
    fn default() -> Self {
        Self {
            q1: [-1.9, 0.3],
            q2: [-0.5, 1.1],
        }
    }
}

impl Workspace {
    pub fn validate(&self) -> Result<()> {
        for r in [self.q1, self.q2] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(Error::InvalidInput(format!("bad joint range {r:?}")));
            }
        }
        Ok(())
    }

    /// `n × n` uniform grid over the joint ranges, row-major in `q1`.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = Vector2<f64>> + '_ {
        let lerp = move |r: [f64; 2], i: usize| {
            if n <= 1 {
                0.5 * (r[0] + r[1])
            } else {
                r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
            }
        };
        (0..n).flat_map(move |i| (0..n).map(move |j| Vector2::new(lerp(self.q1, i), lerp(self.q2, j))))
    }

    pub fn contains(&self, q: &Vector2<f64>) -> bool {
        (self.q1[0]..=self.q1[1]).contains(&q[0]) && (self.q2[0]..=self.q2[1]).contains(&q[1])
    }
}

/// Radial lens model `p_d = c + (p − c)(1 + k1 r² + k2 r⁴)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraParams {
    k1: f64,
    k2: f64,
    center: Vector2<f64>,
    radius_limit: f64,
}

impl CameraParams {
    pub const DEFAULT_K1: f64 = -0.08;
    pub const DEFAULT_K2: f64 = 0.005;

    /// Builds a camera valid out to `radius_limit` from `center`. Fails if the
    /// radial map `r ↦ r (1 + k1 r² + k2 r⁴)` stops being strictly increasing
    /// anywhere on `[0, radius_limit]`.
    pub fn new(k1: f64, k2: f64, center: [f64; 2], radius_limit: f64) -> Result<Self> {
        if !(k1.is_finite() && k2.is_finite() && center.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidInput("non-finite camera parameters".into()));
        }
        if !(radius_limit.is_finite() && radius_limit > 0.0) {
            return Err(Error::InvalidInput(format!(
                "camera radius limit must be positive, got {radius_limit}"
            )));
        }
        const SAMPLES: usize = 2000;
        for i in 0..=SAMPLES {
            let r = radius_limit * i as f64 / SAMPLES as f64;
            let r2 = r * r;
            let slope = 1.0 + 3.0 * k1 * r2 + 5.0 * k2 * r2 * r2;
            if slope <= 0.0 {
                return Err(Error::NonInvertibleDistortion { radius: r });
            }
        }
        Ok(Self {
            k1,
            k2,
            center: Vector2::from(center),
            radius_limit,
        })
    }

    /// Camera centred on the centroid of the end-effector positions reachable
    /// from `ws`, valid over all of them (plus a 10 % margin).
    pub fn centered_on(k1: f64, k2: f64, ws: &Workspace, arm: &ManipulatorParams) -> Result<Self> {
        let points: alloc::vec::Vec<_> = ws.grid(41).map(|q| forward_kinematics(&q, arm)).collect();
        let centroid = points.iter().fold(Vector2::zeros(), |a, p| a + p) / points.len() as f64;
        let radius = points
            .iter()
            .map(|p| (p - centroid).norm())
            .fold(0.0, f64::max);
        Self::new(k1, k2, [centroid[0], centroid[1]], 1.1 * radius.max(1e-3))
    }

    pub fn undistorted(center: [f64; 2], radius_limit: f64) -> Result<Self> {
        Self::new(0.0, 0.0, center, radius_limit)
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn center(&self) -> Vector2<f64> {
        self.center
    }

    pub fn radius_limit(&self) -> f64 {
        self.radius_limit
    }
}

/// Noiseless distorted image of a planar point.
pub fn camera_project(p: &Vector2<f64>, cam: &CameraParams) -> Result<Vector2<f64>> {
    let d = p - cam.center;
    let r2 = d.norm_squared();
    let r = libm::sqrt(r2);
    if r.is_nan() || r > cam.radius_limit {
        return Err(Error::OutOfWorkspace {
            radius: r,
            limit: cam.radius_limit,
        });
    }
    Ok(cam.center + d * (1.0 + cam.k1 * r2 + cam.k2 * r2 * r2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub sigma_q: f64,
    pub sigma_qd: f64,
    pub sigma_v: f64,
    pub seed: u64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            sigma_q: 0.001,
            sigma_qd: 0.001,
            sigma_v: 0.01,
            seed: 0,
        }
    }
}

impl NoiseParams {
    pub fn noiseless(seed: u64) -> Self {
        Self {
            sigma_q: 0.0,
            sigma_qd: 0.0,
            sigma_v: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = [self.sigma_q, self.sigma_qd, self.sigma_v];
        if s.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "noise standard deviations must be nonnegative, got {s:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FaultKind {
    #[default]
    None,
    /// Position encoder of `joint` (0-based) keeps reporting its reading
    /// from the fault step onwards.
    EncoderFreeze { joint: usize },
    /// Constant offset added to both camera coordinates.
    CameraBias { offset: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FaultSpec {
    pub kind: FaultKind,
    /// Fault onset time in seconds.
    pub onset: f64,
}

impl FaultSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn encoder_freeze(joint: usize, onset: f64) -> Self {
        Self {
            kind: FaultKind::EncoderFreeze { joint },
            onset,
        }
    }

    pub fn camera_bias(offset: f64, onset: f64) -> Self {
        Self {
            kind: FaultKind::CameraBias { offset },
            onset,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.onset.is_finite() && self.onset >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "fault time must be nonnegative, got {}",
                self.onset
            )));
        }
        match self.kind {
            FaultKind::EncoderFreeze { joint } if joint > 1 => Err(Error::InvalidInput(format!(
                "frozen joint index {} out of range (1 or 2)",
                joint + 1
            ))),
            FaultKind::CameraBias { offset } if !offset.is_finite() => {
                Err(Error::InvalidInput("camera bias must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn is_active(&self) -> bool {
        !matches!(self.kind, FaultKind::None)
    }

    /// First step index at which the fault acts, for a given step size.
    pub fn onset_step(&self, dt: f64) -> usize {
        libm::ceil(self.onset / dt - 1e-9).max(0.0) as usize
    }
}

/// One step of sensor output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorReading {
    pub q: Vector2<f64>,
    pub qd: Vector2<f64>,
    /// Distorted planar end-effector position from the camera.
    pub v: Vector2<f64>,
    pub step: usize,
}

impl SensorReading {
    pub fn is_finite(&self) -> bool {
        is_finite2(&self.q) && is_finite2(&self.qd) && is_finite2(&self.v)
    }
}

/// Encoders, velocity sensors and camera of one simulation run.
///
/// Owns the run's noise stream. Six standard normals are drawn every step
/// whatever the fault state, so a fault never shifts the noise sequence.
#[derive(Debug, Clone)]
pub struct Sensors<R> {
    arm: ManipulatorParams,
    camera: CameraParams,
    noise: NoiseParams,
    fault: FaultSpec,
    fault_step: usize,
    frozen: Option<f64>,
    rng: R,
}

impl<R: RngCore> Sensors<R> {
    pub fn new(
        arm: ManipulatorParams,
        camera: CameraParams,
        noise: NoiseParams,
        fault: FaultSpec,
        dt: f64,
        rng: R,
    ) -> Result<Self> {
        noise.validate()?;
        fault.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            arm,
            camera,
            noise,
            fault,
            fault_step: fault.onset_step(dt),
            frozen: None,
            rng,
        })
    }

    /// Noiseless, fault-free camera output for a configuration.
    pub fn ideal_camera(&self, q: &Vector2<f64>) -> Result<Vector2<f64>> {
        camera_project(&forward_kinematics(q, &self.arm), &self.camera)
    }

    fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn sense(&mut self, state: &PlantState, k: usize) -> Result<SensorReading> {
        let n = &self.noise;
        let (sq, sqd, sv) = (n.sigma_q, n.sigma_qd, n.sigma_v);
        let eta: [f64; 6] = core::array::from_fn(|_| self.normal());
        let mut y = SensorReading {
            q: state.q + Vector2::new(eta[0], eta[1]) * sq,
            qd: state.qd + Vector2::new(eta[2], eta[3]) * sqd,
            v: self.ideal_camera(&state.q)? + Vector2::new(eta[4], eta[5]) * sv,
            step: k,
        };
        if k >= self.fault_step {
            match self.fault.kind {
                FaultKind::None => {}
                FaultKind::EncoderFreeze { joint } => {
                    let held = *self.frozen.get_or_insert(y.q[joint]);
                    y.q[joint] = held;
                }
                FaultKind::CameraBias { offset } => {
                    y.v += Vector2::new(offset, offset);
                }
            }
        }
        Ok(y)
    }
}

/// Draws a camera observation with noise, without fault handling. Used to
/// build GP training sets.
pub fn noisy_camera<R: RngCore>(
    q: &Vector2<f64>,
    arm: &ManipulatorParams,
    cam: &CameraParams,
    sigma_v: f64,
    rng: &mut R,
) -> Result<Vector2<f64>> {
    let ex: f64 = StandardNormal.sample(rng);
    let ez: f64 = StandardNormal.sample(rng);
    Ok(camera_project(&forward_kinematics(q, arm), cam)? + Vector2::new(ex, ez) * sigma_v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn arm() -> ManipulatorParams {
        ManipulatorParams::default()
    }

    fn random_state(rng: &mut ChaCha8Rng) -> PlantState {
        PlantState::new(
            [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)],
            [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
        )
    }

    #[test]
    fn hanging_arm_is_an_equilibrium() {
        let s = PlantState::at_rest([-FRAC_PI_2, 0.0]);
        let a = dynamics_accel(&s, &Vector2::zeros(), &arm()).unwrap();
        assert!(a.norm() < 1e-12, "{a:?}");
    }

    #[test]
    fn horizontal_arm_falls() {
        let s = PlantState::at_rest([0.0, 0.0]);
        let a = dynamics_accel(&s, &Vector2::zeros(), &arm()).unwrap();
        assert!(a[0] < 0.0);
    }

    #[test]
    fn acceleration_satisfies_equation_of_motion() {
        let p = arm();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let s = random_state(&mut rng);
            let u = Vector2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let a = dynamics_accel(&s, &u, &p).unwrap();
            let residual = mass_matrix(&s.q, &p) * a
                + coriolis(&s, &p) * s.qd
                + friction_matrix(&p) * s.qd
                + gravity_torque(&s.q, &p)
                - u;
            assert!(residual.norm() < 1e-10, "{residual:?}");
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let s = PlantState::new([f64::NAN, 0.0], [0.0, 0.0]);
        assert!(matches!(
            dynamics_accel(&s, &Vector2::zeros(), &arm()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn mass_matrix_positive_definite_on_grid() {
        let p = arm();
        for i in 0..=36 {
            for j in 0..=36 {
                let q = Vector2::new(-PI + i as f64 * PI / 18.0, -PI + j as f64 * PI / 18.0);
                let m = mass_matrix(&q, &p);
                assert_eq!(m[(0, 1)], m[(1, 0)]);
                let eig = m.symmetric_eigenvalues();
                assert!(eig.min() > 0.0, "{q:?} {eig:?}");
            }
        }
    }

    #[test]
    fn mass_matrix_dot_matches_finite_difference() {
        let p = arm();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = 1e-6;
        for _ in 0..50 {
            let s = random_state(&mut rng);
            let fd = (mass_matrix(&(s.q + s.qd * h), &p) - mass_matrix(&(s.q - s.qd * h), &p))
                / (2.0 * h);
            assert!((fd - mass_matrix_dot(&s, &p)).norm() < 1e-7);
        }
    }

    #[test]
    fn gravity_is_gradient_of_potential() {
        let p = arm();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-6;
        for _ in 0..50 {
            let q = random_state(&mut rng).q;
            let g = gravity_torque(&q, &p);
            for i in 0..2 {
                let mut e = Vector2::zeros();
                e[i] = h;
                let fd = (potential_energy(&(q + e), &p) - potential_energy(&(q - e), &p)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn gravity_balance_is_held_by_rk4() {
        let p = arm();
        let s = PlantState::at_rest([-0.3, 0.7]);
        let u = gravity_torque(&s.q, &p);
        let next = integrate_step(&s, &u, 1e-3, &p).unwrap();
        assert!((next.q - s.q).norm() < 1e-15);
        assert!(next.qd.norm() < 1e-13);
    }

    #[test]
    fn integrator_rejects_bad_step() {
        let s = PlantState::default();
        assert!(integrate_step(&s, &Vector2::zeros(), 0.0, &arm()).is_err());
    }

    #[test]
    fn forward_kinematics_cases() {
        let p = arm();
        let straight = forward_kinematics(&Vector2::new(0.0, 0.0), &p);
        assert!((straight - Vector2::new(2.0, 0.0)).norm() < 1e-15);
        let up = forward_kinematics(&Vector2::new(FRAC_PI_2, 0.0), &p);
        assert!((up - Vector2::new(0.0, 2.0)).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let q = random_state(&mut rng).q;
            assert!(forward_kinematics(&q, &p).norm() <= p.reach() + 1e-12);
        }
    }

    #[test]
    fn camera_projection_cases() {
        let ident = CameraParams::undistorted([0.3, -0.2], 10.0).unwrap();
        let p = Vector2::new(1.2, 0.4);
        assert!((camera_project(&p, &ident).unwrap() - p).amax() < 1e-15);

        let cam = CameraParams::new(-0.08, 0.005, [1.0, -0.5], 5.0).unwrap();
        assert_eq!(camera_project(&cam.center(), &cam).unwrap(), cam.center());

        let cam = CameraParams::new(-0.1, 0.0, [0.0, 0.0], 1.5).unwrap();
        let d = camera_project(&Vector2::new(1.0, 0.0), &cam).unwrap();
        assert!((d - Vector2::new(0.9, 0.0)).norm() < 1e-15);

        assert!(matches!(
            camera_project(&Vector2::new(2.0, 0.0), &cam),
            Err(Error::OutOfWorkspace { .. })
        ));
    }

    #[test]
    fn folding_distortion_is_rejected() {
        // slope 1 − 0.9 r² vanishes at r ≈ 1.05
        assert!(matches!(
            CameraParams::new(-0.3, 0.0, [0.0, 0.0], 2.0),
            Err(Error::NonInvertibleDistortion { .. })
        ));
    }

    #[test]
    fn default_camera_covers_workspace() {
        let ws = Workspace::default();
        let cam = CameraParams::centered_on(
            CameraParams::DEFAULT_K1,
            CameraParams::DEFAULT_K2,
            &ws,
            &arm(),
        )
        .unwrap();
        for q in ws.grid(21) {
            camera_project(&forward_kinematics(&q, &arm()), &cam).unwrap();
        }
    }

    fn sensors(noise: NoiseParams, fault: FaultSpec) -> Sensors<ChaCha8Rng> {
        let ws = Workspace::default();
        let cam = CameraParams::centered_on(-0.08, 0.005, &ws, &arm()).unwrap();
        Sensors::new(arm(), cam, noise, fault, 1e-3, ChaCha8Rng::seed_from_u64(noise.seed)).unwrap()
    }

    #[test]
    fn noiseless_sensing_is_exact() {
        let mut s = sensors(NoiseParams::noiseless(0), FaultSpec::none());
        let st = PlantState::new([-0.4, 0.3], [0.2, -0.1]);
        let y = s.sense(&st, 0).unwrap();
        assert_eq!(y.q, st.q);
        assert_eq!(y.qd, st.qd);
        assert_eq!(y.v, s.ideal_camera(&st.q).unwrap());
    }

    #[test]
    fn same_seed_same_readings() {
        let st = PlantState::new([-0.4, 0.3], [0.2, -0.1]);
        let mut a = sensors(NoiseParams { seed: 9, ..Default::default() }, FaultSpec::none());
        let mut b = sensors(NoiseParams { seed: 9, ..Default::default() }, FaultSpec::none());
        for k in 0..100 {
            assert_eq!(a.sense(&st, k).unwrap(), b.sense(&st, k).unwrap());
        }
    }

    #[test]
    fn faults_are_causally_gated() {
        let noise = NoiseParams { seed: 5, ..Default::default() };
        let mut healthy = sensors(noise, FaultSpec::none());
        let mut frozen = sensors(noise, FaultSpec::encoder_freeze(0, 0.05));
        let mut biased = sensors(noise, FaultSpec::camera_bias(0.04, 0.05));
        let mut held = None;
        for k in 0..100 {
            let st = PlantState::new([-0.5 + 0.01 * k as f64, 0.2], [10.0, 0.0]);
            let h = healthy.sense(&st, k).unwrap();
            let f = frozen.sense(&st, k).unwrap();
            let b = biased.sense(&st, k).unwrap();
            if k < 50 {
                assert_eq!(h, f);
                assert_eq!(h, b);
            } else {
                let value = *held.get_or_insert(h.q[0]);
                assert_eq!(f.q[0], value);
                assert_eq!(f.q[1], h.q[1]);
                assert_eq!(f.v, h.v);
                assert!((b.v - h.v - Vector2::new(0.04, 0.04)).norm() < 1e-12);
                assert_eq!(b.q, h.q);
            }
        }
    }

    #[test]
    fn fault_validation() {
        assert!(FaultSpec::encoder_freeze(2, 1.0).validate().is_err());
        assert!(FaultSpec::camera_bias(0.04, -1.0).validate().is_err());
        assert!(FaultSpec::camera_bias(0.04, 8.0).validate().is_ok());
        assert_eq!(FaultSpec::camera_bias(0.04, 8.0).onset_step(1e-3), 8000);
    }
}

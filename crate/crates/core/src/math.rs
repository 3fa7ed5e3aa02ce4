//! Small helpers shared by the controllers.

use nalgebra::{Matrix2, Vector2};

pub(crate) fn is_finite2(v: &Vector2<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// `ln|P|` for a precision matrix, or `None` when `P` is singular.
///
/// Zeroed precisions (sensors switched off by recovery) contribute nothing
/// to the free-energy bookkeeping instead of `-inf`.
pub(crate) fn log_det2(p: &Matrix2<f64>) -> Option<f64> {
    let d = p.determinant();
    (d > 0.0).then(|| libm::log(d))
}

pub(crate) fn saturate(u: Vector2<f64>, limit: f64) -> Vector2<f64> {
    u.map(|x| x.clamp(-limit, limit))
}

pub(crate) fn quad2(e: &Vector2<f64>, p: &Matrix2<f64>) -> f64 {
    e.dot(&(p * e))
}

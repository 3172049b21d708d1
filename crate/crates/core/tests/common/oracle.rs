//! Wheel-speed oracle built from contact-point velocities, inverted
//! numerically.

use nalgebra::{Matrix4, Vector2, Vector4};
use odd_core::drive::Spacing;
use odd_core::mecanum::RigGeometry;

/// Contact-point velocity of wheel `i` in the body frame for ODD rate `q`.
pub fn contact_velocity(geom: &RigGeometry, d: Spacing, i: usize, q: &Vector4<f64>) -> Vector2<f64> {
    let y_i = geom.wheel_offsets(d)[i];
    let spread = if i < 2 { 0.5 } else { -0.5 };
    Vector2::new(q[0] - q[2] * y_i, q[1] + spread * q[3])
}

/// Row `i` of the oracle: `r θ̇_i` such that the roller-normal component of
/// the hub's rolling velocity matches the contact velocity.
pub fn oracle_wheel_speeds(geom: &RigGeometry, d: Spacing, q: &Vector4<f64>) -> Vector4<f64> {
    Vector4::from_fn(|i, _| {
        let a = geom.roller_angles[i];
        let v = contact_velocity(geom, d, i, q);
        let roller_normal = Vector2::new(a.cos(), a.sin());
        v.dot(&roller_normal) / (a.cos() * geom.wheel_radius)
    })
}

/// Wheel-to-body map by numeric LU solve of the wheel-speed system.
pub fn oracle_body_matrix(geom: &RigGeometry, d: Spacing) -> Option<Matrix4<f64>> {
    let fwd = Matrix4::from_columns(&[0, 1, 2, 3].map(|j| {
        let mut e = Vector4::zeros();
        e[j] = 1.0;
        oracle_wheel_speeds(geom, d, &e)
    }));
    let lu = fwd.lu();
    let cols = [0, 1, 2, 3].map(|j| {
        let mut e = Vector4::zeros();
        e[j] = 1.0;
        lu.solve(&e)
    });
    if cols.iter().any(Option::is_none) {
        return None;
    }
    Some(Matrix4::from_columns(&cols.map(Option::unwrap)))
}


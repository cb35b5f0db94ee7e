//! Small linear-algebra and scalar helpers shared by the modules.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
#[allow(unused_imports)] // f64 has inherent math methods whenever std is in the build graph
use num_traits::Float;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Quat = UnitQuaternion<f64>;

pub const DEG: f64 = core::f64::consts::PI / 180.0;

#[inline]
pub fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

#[inline]
pub fn mat3(a: [[f64; 3]; 3]) -> Mat3 {
    Mat3::new(
        a[0][0], a[0][1], a[0][2], a[1][0], a[1][1], a[1][2], a[2][0], a[2][1], a[2][2],
    )
}

/// Rotation about the x axis by `angle` (right-handed).
pub fn rot_x(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

/// Rotation about the y axis by `angle`. Positive angles pitch the x axis
/// towards -z, i.e. nose-up in a forward-right-down frame.
pub fn rot_y(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Body-to-inertial rotation from ZYX Euler angles.
pub fn from_euler(roll: f64, pitch: f64, yaw: f64) -> Mat3 {
    rot_z(yaw) * rot_y(pitch) * rot_x(roll)
}

/// ZYX Euler angles `(roll, pitch, yaw)` of a body-to-inertial rotation.
pub fn euler_angles(r: &Mat3) -> (f64, f64, f64) {
    let pitch = (-r[(2, 0)]).max(-1.0).min(1.0).asin();
    let roll = r[(2, 1)].atan2(r[(2, 2)]);
    let yaw = r[(1, 0)].atan2(r[(0, 0)]);
    (roll, pitch, yaw)
}

pub fn skew(w: &Vec3) -> Mat3 {
    Mat3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Projects a nearly orthonormal matrix back onto SO(3).
///
/// Newton iteration for the polar factor `R (RᵀR)^-1/2`; converges
/// quadratically for the small drifts produced by one integration step.
pub fn orthonormalize(r: &Mat3) -> Mat3 {
    let mut out = *r;
    for _ in 0..4 {
        let err = out.transpose() * out - Mat3::identity();
        if err.abs().max() < 1e-15 {
            break;
        }
        out = out * (Mat3::identity() * 1.5 - out.transpose() * out * 0.5);
    }
    out
}

/// Max-abs deviation of `RᵀR` from the identity.
pub fn orthonormality_error(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).abs().max()
}

pub fn quat_from_matrix(r: &Mat3) -> Quat {
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r))
}

#[inline]
pub fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

/// Angle wrapped into (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let tau = 2.0 * core::f64::consts::PI;
    let w = a - tau * ((a + core::f64::consts::PI) / tau).floor();
    if w <= -core::f64::consts::PI {
        w + tau
    } else {
        w
    }
}

/// Linear interpolation between `a` and `b`.
#[inline]
pub fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Real root of `a x² + b x + c = 0` with the smallest magnitude.
///
/// Degenerates to the linear solution when `a` is negligible. `None` when no
/// real root exists.
pub fn smallest_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Some(0.0);
    }
    if a.abs() <= 1e-12 * scale {
        if b == 0.0 {
            return None;
        }
        return Some(-c / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    // Numerically stable form: q = -(b + sgn(b) sqrt(disc)) / 2
    let sq = disc.sqrt();
    let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
    let r1 = if q != 0.0 { c / q } else { 0.0 };
    let r2 = q / a;
    Some(if r1.abs() <= r2.abs() { r1 } else { r2 })
}

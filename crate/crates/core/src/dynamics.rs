//! Newton-Euler rigid-body dynamics and fixed-step integration.


use crate::aero::{total_wrench, Wrench};
use crate::math::{orthonormalize, skew, Mat3, Vec3};
use crate::vehicle::{ActuatorSet, VehicleParams};

/// Largest step accepted by [`integrate_step`].
pub const MAX_STEP: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyState {
    /// Inertial position [m] (north-east-down).
    pub position: Vec3,
    /// Inertial velocity [m/s].
    pub velocity: Vec3,
    /// Body-to-inertial rotation.
    pub attitude: Mat3,
    /// Body angular rate [rad/s].
    pub omega: Vec3,
}

impl Default for RigidBodyState {
    fn default() -> Self {
        Self {
            position: Vec3::zeros(),
            velocity: Vec3::zeros(),
            attitude: Mat3::identity(),
            omega: Vec3::zeros(),
        }
    }
}

impl RigidBodyState {
    /// Airspeed in the body frame for an inertial wind.
    pub fn air_velocity_body(&self, wind: &Vec3) -> Vec3 {
        self.attitude.transpose() * (self.velocity - wind)
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|x| x.is_finite())
            && self.velocity.iter().all(|x| x.is_finite())
            && self.attitude.iter().all(|x| x.is_finite())
            && self.omega.iter().all(|x| x.is_finite())
    }

    fn advance(&self, d: &StateDerivative, h: f64) -> Self {
        Self {
            position: self.position + d.position * h,
            velocity: self.velocity + d.velocity * h,
            attitude: self.attitude + d.attitude * h,
            omega: self.omega + d.omega * h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: Mat3,
    pub omega: Vec3,
}

/// Angular acceleration `I⁻¹(M − ω × Iω)`.
pub fn angular_acceleration(inertia: &Mat3, omega: &Vec3, moment: &Vec3) -> Vec3 {
    let rhs = moment - omega.cross(&(inertia * omega));
    inertia
        .cholesky()
        .map(|c| c.solve(&rhs))
        .unwrap_or_else(|| Vec3::from_element(f64::NAN))
}

pub fn state_derivative(s: &RigidBodyState, w: &Wrench, p: &VehicleParams) -> StateDerivative {
    StateDerivative {
        position: s.velocity,
        velocity: p.gravity_vector() + s.attitude * w.force / p.mass,
        attitude: s.attitude * skew(&s.omega),
        omega: angular_acceleration(&p.inertia_matrix(), &s.omega, &w.moment),
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrationError {
    #[error("step {dt} s outside (0, {MAX_STEP}]")]
    InvalidStep { dt: f64 },
    #[error("non-finite state after step (|v| = {speed}, |ω| = {rate})")]
    NonFinite { speed: f64, rate: f64 },
}

/// One classical RK4 step with the wrench supplied by `wrench_of`.
///
/// The attitude is projected back onto SO(3) afterwards.
pub fn integrate_step_with(
    s: &RigidBodyState,
    p: &VehicleParams,
    dt: f64,
    mut wrench_of: impl FnMut(&RigidBodyState) -> Wrench,
) -> Result<RigidBodyState, IntegrationError> {
    if !(dt > 0.0 && dt <= MAX_STEP) {
        return Err(IntegrationError::InvalidStep { dt });
    }
    let mut deriv = |x: &RigidBodyState| state_derivative(x, &wrench_of(x), p);
    let k1 = deriv(s);
    let k2 = deriv(&s.advance(&k1, dt / 2.0));
    let k3 = deriv(&s.advance(&k2, dt / 2.0));
    let k4 = deriv(&s.advance(&k3, dt));
    let h = dt / 6.0;
    let mut next = RigidBodyState {
        position: s.position + (k1.position + (k2.position + k3.position) * 2.0 + k4.position) * h,
        velocity: s.velocity + (k1.velocity + (k2.velocity + k3.velocity) * 2.0 + k4.velocity) * h,
        attitude: s.attitude + (k1.attitude + (k2.attitude + k3.attitude) * 2.0 + k4.attitude) * h,
        omega: s.omega + (k1.omega + (k2.omega + k3.omega) * 2.0 + k4.omega) * h,
    };
    if !next.is_finite() {
        return Err(IntegrationError::NonFinite {
            speed: next.velocity.norm(),
            rate: next.omega.norm(),
        });
    }
    next.attitude = orthonormalize(&next.attitude);
    Ok(next)
}

/// RK4 step of the full model with actuation held over the step.
pub fn integrate_step(
    s: &RigidBodyState,
    act: &ActuatorSet,
    p: &VehicleParams,
    wind: &Vec3,
    dt: f64,
) -> Result<RigidBodyState, IntegrationError> {
    integrate_step_with(s, p, dt, |x| total_wrench(x, act, p, wind).wrench())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{from_euler, mat3, orthonormality_error};

    fn params_with(inertia: [[f64; 3]; 3], gravity: [f64; 3]) -> VehicleParams {
        let mut p = VehicleParams::reference();
        p.inertia = inertia;
        p.gravity = gravity;
        p
    }

    #[test]
    fn free_fall() {
        let p = VehicleParams::reference();
        let d = state_derivative(&RigidBodyState::default(), &Wrench::ZERO, &p);
        assert_eq!(d.velocity, p.gravity_vector());
        assert_eq!(d.omega, Vec3::zeros());
    }

    #[test]
    fn spherical_inertia_has_no_gyroscopic_term() {
        let p = params_with([[0.05, 0.0, 0.0], [0.0, 0.05, 0.0], [0.0, 0.0, 0.05]], [0.0; 3]);
        let s = RigidBodyState {
            omega: Vec3::new(1.0, -2.0, 3.0),
            ..Default::default()
        };
        let d = state_derivative(&s, &Wrench::ZERO, &p);
        assert!(d.omega.norm() < 1e-12);
    }

    #[test]
    fn euler_term_hand_value() {
        // ω × Iω = (1,1,0) × (1,2,0) = (0,0,1) → ω̇ = -I⁻¹(0,0,1) = (0,0,-1/3)
        let p = params_with([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]], [0.0; 3]);
        let s = RigidBodyState {
            omega: Vec3::new(1.0, 1.0, 0.0),
            ..Default::default()
        };
        let d = state_derivative(&s, &Wrench::ZERO, &p);
        assert!((d.omega - Vec3::new(0.0, 0.0, -1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_wrench_drift() {
        let p = params_with(VehicleParams::reference().inertia, [0.0; 3]);
        let s = RigidBodyState {
            velocity: Vec3::new(3.0, -1.0, 0.5),
            ..Default::default()
        };
        let dt = 0.004;
        let next = integrate_step_with(&s, &p, dt, |_| Wrench::ZERO).unwrap();
        assert_eq!(next.position, s.velocity * dt);
        assert_eq!(next.velocity, s.velocity);
    }

    #[test]
    fn rejects_bad_steps() {
        let p = VehicleParams::reference();
        let s = RigidBodyState::default();
        assert!(matches!(
            integrate_step_with(&s, &p, 0.0, |_| Wrench::ZERO),
            Err(IntegrationError::InvalidStep { .. })
        ));
        assert!(integrate_step_with(&s, &p, 0.05, |_| Wrench::ZERO).is_err());
    }

    #[test]
    fn non_finite_state_is_reported() {
        let p = VehicleParams::reference();
        let s = RigidBodyState::default();
        let r = integrate_step_with(&s, &p, 0.01, |_| Wrench::new(Vec3::new(f64::NAN, 0.0, 0.0), Vec3::zeros()));
        assert!(matches!(r, Err(IntegrationError::NonFinite { .. })));
    }

    #[test]
    fn torque_free_spin_conserves_momentum_and_stays_orthonormal() {
        let inertia = [[0.03, 0.0, 0.0], [0.0, 0.06, 0.0], [0.0, 0.0, 0.08]];
        let p = params_with(inertia, [0.0; 3]);
        let i = mat3(inertia);
        let mut s = RigidBodyState {
            velocity: Vec3::new(1.0, 2.0, 0.0),
            attitude: from_euler(0.2, 0.1, -0.4),
            omega: Vec3::new(0.5, 3.0, 0.2),
            ..Default::default()
        };
        let h0 = s.attitude * i * s.omega;
        for _ in 0..2000 {
            s = integrate_step_with(&s, &p, 0.004, |_| Wrench::ZERO).unwrap();
        }
        let h1 = s.attitude * i * s.omega;
        assert!((h1 - h0).norm() < 1e-6 * h0.norm());
        assert!((s.velocity.norm() - 5f64.sqrt()).abs() < 1e-12);
        assert!(orthonormality_error(&s.attitude) < 1e-12);
        assert!((s.attitude.determinant() - 1.0).abs() < 1e-12);
    }
}

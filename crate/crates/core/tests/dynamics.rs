use proptest::prelude::*;
use tiltwing_core::aero::Wrench;
use tiltwing_core::dynamics::{integrate_step, integrate_step_with};
use tiltwing_core::math::{from_euler, orthonormality_error, Vec3};
use tiltwing_core::vehicle::{Actuator, ActuatorSet};
use tiltwing_core::{RigidBodyState, VehicleParams};

fn weightless() -> VehicleParams {
    let mut p = VehicleParams::reference();
    p.gravity = [0.0; 3];
    p
}

fn spin(p: &VehicleParams, start: &RigidBodyState, dt: f64, duration: f64) -> RigidBodyState {
    let n = (duration / dt).round() as usize;
    let mut s = *start;
    for _ in 0..n {
        s = integrate_step_with(&s, p, dt, |_| Wrench::ZERO).unwrap();
    }
    s
}

#[test]
fn rk4_is_fourth_order_on_an_asymmetric_spin() {
    let p = weightless();
    let start = RigidBodyState {
        attitude: from_euler(0.2, -0.1, 1.0),
        omega: Vec3::new(2.0, -3.0, 4.0),
        ..Default::default()
    };
    let dt = 0.02;
    let reference = spin(&p, &start, dt / 32.0, 1.0);
    let err = |s: RigidBodyState| (s.attitude - reference.attitude).norm() + (s.omega - reference.omega).norm();
    let e1 = err(spin(&p, &start, dt, 1.0));
    let e2 = err(spin(&p, &start, dt / 2.0, 1.0));
    let order = (e1 / e2).log2();
    assert!(order >= 3.9, "observed order {order}");
}

#[test]
fn attitude_stays_orthonormal_over_many_steps() {
    let p = weightless();
    let mut s = RigidBodyState {
        omega: Vec3::new(4.0, 1.0, -6.0),
        ..Default::default()
    };
    for _ in 0..100_000 {
        s = integrate_step_with(&s, &p, 0.004, |_| Wrench::ZERO).unwrap();
    }
    assert!(orthonormality_error(&s.attitude) < 1e-8);
}

#[test]
fn full_model_runs_are_bit_identical() {
    let p = VehicleParams::reference();
    let a = ActuatorSet::nominal(0.1, 0.65, 0.1 * p.actuators.wing_tilt_max).with(Actuator::Elevator, 0.1);
    let start = RigidBodyState {
        velocity: Vec3::new(18.0, 0.5, 0.0),
        attitude: from_euler(0.05, 0.02, 0.0),
        ..Default::default()
    };
    let wind = Vec3::new(1.0, -2.0, 0.0);
    let run = || {
        let mut s = start;
        for _ in 0..500 {
            s = integrate_step(&s, &a, &p, &wind, 0.004).unwrap();
        }
        s
    };
    let (x, y) = (run(), run());
    assert_eq!(x.position, y.position);
    assert_eq!(x.velocity, y.velocity);
    assert_eq!(x.attitude, y.attitude);
    assert_eq!(x.omega, y.omega);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn torque_free_flight_conserves_speed_and_angular_momentum(
        v in prop::array::uniform3(-20.0..20.0f64),
        w in prop::array::uniform3(-4.0..4.0f64),
        e in prop::array::uniform3(-1.0..1.0f64),
    ) {
        let p = weightless();
        let start = RigidBodyState {
            position: Vec3::zeros(),
            velocity: Vec3::new(v[0], v[1], v[2]),
            attitude: from_euler(e[0], e[1], e[2] * 3.0),
            omega: Vec3::new(w[0], w[1], w[2]),
        };
        let end = spin(&p, &start, 0.004, 1.0);
        let inertia = p.inertia_matrix();
        let h0 = start.attitude * inertia * start.omega;
        let h1 = end.attitude * inertia * end.omega;
        prop_assert!((end.velocity.norm() - start.velocity.norm()).abs() < 1e-12 * (1.0 + start.velocity.norm()));
        prop_assert!((h1 - h0).norm() < 1e-6 * (1.0 + h0.norm()));
        // Position advances by v dt exactly under zero force.
        prop_assert!((end.position - start.velocity * 1.0).norm() < 1e-9 * (1.0 + start.velocity.norm()));
    }
}

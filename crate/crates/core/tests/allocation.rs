use proptest::prelude::*;
use tiltwing_core::aero::total_wrench;
use tiltwing_core::attitude::{daisy_chain_allocate, dynamic_inversion, nominal_moment_estimate, AllocationConfig};
use tiltwing_core::math::{from_euler, rot_y, vec3, Vec3};
use tiltwing_core::vehicle::{Actuator, ActuatorSet, FuselageParams, PropRole};
use tiltwing_core::{RigidBodyState, VehicleParams};

fn level(speed: f64, pitch: f64) -> RigidBodyState {
    RigidBodyState {
        velocity: Vec3::new(speed, 0.0, 0.0),
        attitude: from_euler(0.0, pitch, 0.0),
        ..Default::default()
    }
}

fn cruise_nominal(p: &VehicleParams) -> ActuatorSet {
    ActuatorSet::nominal(0.05, 0.65, 0.05 * p.actuators.wing_tilt_max)
        .with(Actuator::AileronLeft, 0.07)
        .with(Actuator::AileronRight, -0.07)
}

fn hover_nominal(p: &VehicleParams) -> ActuatorSet {
    ActuatorSet::nominal(1.0, 0.77, p.actuators.wing_tilt_max)
}

#[test]
fn zero_demand_keeps_nominal() {
    let p = VehicleParams::reference();
    let nominal = cruise_nominal(&p);
    let out = daisy_chain_allocate(&Vec3::zeros(), &level(20.0, 0.01), &nominal, &p, &Vec3::zeros(), &AllocationConfig::default());
    assert_eq!(out.command, nominal);
    assert_eq!(out.residual, Vec3::zeros());
    assert!(!out.saturated);
}

#[test]
fn small_cruise_pitch_demand_moves_only_the_elevator() {
    let p = VehicleParams::reference();
    let nominal = cruise_nominal(&p);
    let demand = Vec3::new(0.0, 0.05, 0.0);
    let out = daisy_chain_allocate(&demand, &level(20.0, 0.01), &nominal, &p, &Vec3::zeros(), &AllocationConfig::default());
    assert!(out.residual.norm() < 1e-6, "{:?}", out.residual);
    assert!(out.command.get(Actuator::Elevator).abs() > 1e-3);
    for a in Actuator::ALL.into_iter().filter(|a| *a != Actuator::Elevator) {
        assert!((out.command.get(a) - nominal.get(a)).abs() < 1e-9, "{} moved", a.name());
    }
}

#[test]
fn low_speed_pitch_demand_saturates_elevator_and_engages_tail_propeller() {
    let p = VehicleParams::reference();
    let nominal = hover_nominal(&p);
    // Nose down: the tail propeller lifts the tail.
    let demand = Vec3::new(0.0, -0.8, 0.0);
    let out = daisy_chain_allocate(&demand, &level(1.0, 0.0), &nominal, &p, &Vec3::zeros(), &AllocationConfig::default());
    assert_eq!(out.command.get(Actuator::Elevator).abs(), 1.0);
    assert!(out.command.get(Actuator::ThrottleTail) > 0.1);
    assert!((out.allocated() - demand).norm() < 1e-6);
}

#[test]
fn larger_elevator_authority_never_adds_tail_usage() {
    let p = VehicleParams::reference();
    let mut strong = p.clone();
    strong.actuators.elevator_max *= 1.5;
    let cfg = AllocationConfig::default();
    for speed in [2.0, 5.0, 8.0, 12.0] {
        for m_y in [0.1, 0.3, 0.6, -0.2] {
            let s = level(speed, 0.0);
            let wing = (1.0 - speed / 15.0).max(0.1);
            let nominal = ActuatorSet::nominal(wing, 0.7, wing * p.actuators.wing_tilt_max);
            let demand = Vec3::new(0.0, m_y, 0.0);
            let weak = daisy_chain_allocate(&demand, &s, &nominal, &p, &Vec3::zeros(), &cfg);
            let stronger = daisy_chain_allocate(&demand, &s, &nominal, &strong, &Vec3::zeros(), &cfg);
            let tail = |o: &tiltwing_core::attitude::AllocationResult| o.command.get(Actuator::ThrottleTail);
            assert!(tail(&stronger) <= tail(&weak) + 1e-9, "speed {speed}, demand {m_y}");
        }
    }
}

#[test]
fn symmetric_level_state_has_no_lateral_nominal_moment() {
    let p = VehicleParams::reference();
    for (speed, nominal) in [(20.0, cruise_nominal(&p)), (0.0, hover_nominal(&p))] {
        let m = nominal_moment_estimate(&level(speed, 0.02), &nominal, &p, &Vec3::zeros());
        assert!(m.x.abs() < 1e-9 && m.z.abs() < 1e-9, "{m:?}");
    }
}

#[test]
fn hover_nominal_pitch_moment_matches_moment_arm_oracle() {
    // Propellers only, no airfoils or fuselage: the pitch moment is the
    // thrust times the hub's forward offset from the CG.
    let mut p = VehicleParams::reference();
    p.segments.clear();
    p.fuselage = FuselageParams {
        cd_x: 0.0,
        cd_y: 0.0,
        cd_z: 0.0,
    };
    let throttle = 0.77;
    let tilt = p.actuators.wing_tilt_max;
    let nominal = ActuatorSet::nominal(1.0, throttle, tilt);
    let m = nominal_moment_estimate(&level(0.0, 0.0), &nominal, &p, &Vec3::zeros());
    let mut expect = 0.0;
    for role in [PropRole::Left, PropRole::Right] {
        let pr = p.propeller(role);
        let hub = vec3(p.wing.pivot) + rot_y(tilt) * vec3(pr.position);
        let thrust = p.air_density * (throttle * pr.max_speed).powi(2) * pr.diameter.powi(4) * pr.ct0;
        // thrust along -z at hover: M_y = z F_x − x F_z = x T
        expect += hub.x * thrust;
    }
    assert!((m.y - expect).abs() < 1e-9 * (1.0 + expect.abs()), "{} vs {}", m.y, expect);
}

fn random_case() -> impl Strategy<Value = (RigidBodyState, ActuatorSet, Vec3)> {
    (
        0.0..22.0f64,
        prop::array::uniform3(-0.4..0.4f64),
        prop::array::uniform3(-0.5..0.5f64),
        0.0..1.0f64,
        0.3..0.9f64,
        prop::array::uniform3(-0.6..0.6f64),
    )
        .prop_map(|(speed, e, w, wing, thr, m)| {
            let p = VehicleParams::reference();
            let s = RigidBodyState {
                position: Vec3::zeros(),
                velocity: Vec3::new(speed, e[2] * 2.0, e[0]),
                attitude: from_euler(e[0], e[1], e[2]),
                omega: Vec3::new(w[0], w[1], w[2]),
            };
            let nominal = ActuatorSet::nominal(wing, thr, wing * p.actuators.wing_tilt_max);
            (s, nominal, Vec3::new(m[0], m[1], m[2]))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn allocation_accounting_and_ranges((s, nominal, demand) in random_case()) {
        let p = VehicleParams::reference();
        let out = daisy_chain_allocate(&demand, &s, &nominal, &p, &Vec3::zeros(), &AllocationConfig::default());
        prop_assert!((out.allocated() + out.residual - demand).norm() < 1e-9);
        for a in Actuator::ALL {
            let (lo, hi) = a.range();
            prop_assert!(out.command.get(a) >= lo && out.command.get(a) <= hi, "{} out of range", a.name());
        }
        // The allocated moment is what the model produces on top of nominal.
        let realized = total_wrench(&s, &out.command, &p, &Vec3::zeros()).moment
            - total_wrench(&s, &nominal, &p, &Vec3::zeros()).moment;
        prop_assert!((realized - out.allocated()).norm() < 1e-9);
    }

    #[test]
    fn inversion_reconstructs_the_euler_equation(
        a in prop::array::uniform3(-5.0..5.0f64),
        w in prop::array::uniform3(-3.0..3.0f64),
    ) {
        let p = VehicleParams::reference();
        let inertia = p.inertia_matrix();
        let (accel, omega) = (Vec3::new(a[0], a[1], a[2]), Vec3::new(w[0], w[1], w[2]));
        let m = dynamic_inversion(&accel, &omega, &inertia);
        let back = inertia.try_inverse().unwrap() * (m - omega.cross(&(inertia * omega)));
        prop_assert!((back - accel).norm() < 1e-9 * (1.0 + accel.norm()));
    }
}

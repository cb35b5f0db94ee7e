//! Invariant suites behind `tiltwing check`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tiltwing_core::aero::{airfoil_coefficients, total_wrench};
use tiltwing_core::attitude::{daisy_chain_allocate, AllocationConfig};
use tiltwing_core::cruise::{control_derivatives, CruiseConfig};
use tiltwing_core::dynamics::integrate_step_with;
use tiltwing_core::math::{from_euler, orthonormality_error, Vec3, DEG};
use tiltwing_core::vehicle::{Actuator, ActuatorSet, FuselageParams, PropRole};
use tiltwing_core::{aero::Wrench, RigidBodyState, VehicleParams};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Control derivatives against the closed-form central-difference quotients
/// of a propeller-only vehicle hovering with the wing vertical.
///
/// There the specific force is `-(2T/m)(sin θ, cos θ)` with
/// `T = ρ D⁴ C_T0 (δ η_max)²`, so the quotients are known exactly.
pub fn jacobian_check(p: &VehicleParams) -> CheckResult {
    let mut q = p.clone();
    q.segments.clear();
    q.fuselage = FuselageParams {
        cd_x: 0.0,
        cd_y: 0.0,
        cd_z: 0.0,
    };
    q.propellers.retain(|pr| pr.role != PropRole::Tail);
    let cfg = CruiseConfig::default();
    let prop = q.propeller(PropRole::Left).clone();
    let mut worst: f64 = 0.0;
    for (pitch, throttle) in [(0.0, 0.6), (5.0 * DEG, 0.75), (-8.0 * DEG, 0.9)] {
        let state = RigidBodyState {
            attitude: from_euler(0.0, pitch, 0.3),
            ..Default::default()
        };
        let act = ActuatorSet::nominal(1.0, throttle, q.actuators.wing_tilt_max);
        let j = control_derivatives(&state, &act, &q, &Vec3::zeros(), &cfg, false);
        let k = q.air_density * prop.diameter.powi(4) * prop.ct0 * prop.max_speed.powi(2);
        let thrust = |d: f64| 2.0 * k * d * d / q.mass;
        let h = cfg.pitch_step;
        let dq = cfg.throttle_step;
        let dtheta = thrust(throttle) * h.sin() / h;
        let ddelta = (thrust(throttle + dq) - thrust(throttle - dq)) / (2.0 * dq);
        let expect = [
            [-pitch.cos() * dtheta, -pitch.sin() * ddelta],
            [pitch.sin() * dtheta, -pitch.cos() * ddelta],
        ];
        let scale = expect.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((j[r][c] - expect[r][c]).abs() / scale);
            }
        }
    }
    result("jacobian", worst < 1e-6, format!("max relative deviation {worst:.2e}"))
}

pub fn random_state(rng: &mut ChaCha8Rng, max_speed: f64) -> RigidBodyState {
    let mut u = |a: f64| rng.random_range(-a..a);
    RigidBodyState {
        position: Vec3::zeros(),
        velocity: Vec3::new(u(max_speed), u(max_speed / 4.0), u(max_speed / 4.0)),
        attitude: from_euler(u(0.5), u(0.5), u(3.0)),
        omega: Vec3::new(u(1.0), u(1.0), u(1.0)),
    }
}

pub fn random_actuation(rng: &mut ChaCha8Rng, p: &VehicleParams) -> ActuatorSet {
    let mut a = ActuatorSet::default();
    for act in Actuator::ALL {
        let (lo, hi) = act.range();
        a.set(act, rng.random_range(lo..=hi));
    }
    a.settled(&p.actuators)
}

/// Allocated plus residual moment reproduces the demand.
pub fn allocation_check(p: &VehicleParams, cases: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = AllocationConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let state = random_state(&mut rng, 20.0);
        let wing = rng.random_range(0.0..=1.0);
        let nominal = ActuatorSet::nominal(wing, rng.random_range(0.3..0.9), wing * p.actuators.wing_tilt_max);
        let demand = Vec3::new(
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
        );
        let out = daisy_chain_allocate(&demand, &state, &nominal, p, &Vec3::zeros(), &cfg);
        worst = worst.max((out.allocated() + out.residual - demand).norm());
        let within = Actuator::ALL.iter().all(|&a| {
            let (lo, hi) = a.range();
            let v = out.command.get(a);
            v >= lo && v <= hi
        });
        if !within {
            return result("allocation", false, "command outside actuator range".into());
        }
    }
    result("allocation", worst < 1e-9, format!("{cases} demands, max accounting error {worst:.2e} N·m"))
}

/// Attitude stays orthonormal over many RK4 steps of a tumbling body.
pub fn orthonormality_check(p: &VehicleParams, steps: usize) -> CheckResult {
    let mut s = RigidBodyState {
        omega: Vec3::new(3.0, -2.0, 5.0),
        ..Default::default()
    };
    for _ in 0..steps {
        s = match integrate_step_with(&s, p, 0.004, |_| Wrench::ZERO) {
            Ok(n) => n,
            Err(e) => return result("orthonormality", false, e.to_string()),
        };
    }
    let e = orthonormality_error(&s.attitude);
    result("orthonormality", e < 1e-8, format!("‖RᵀR − I‖ = {e:.2e} after {steps} steps"))
}

/// Observed convergence order of RK4 on a torque-free spin of an asymmetric
/// body, from errors at `dt` and `dt/2` against a `dt/16` reference.
pub fn rk4_order(p: &VehicleParams, dt: f64, duration: f64) -> Result<f64, String> {
    let start = RigidBodyState {
        omega: Vec3::new(3.0, -2.0, 5.0),
        ..Default::default()
    };
    let run = |h: f64| -> Result<RigidBodyState, String> {
        let n = (duration / h).round() as usize;
        let mut s = start;
        for _ in 0..n {
            s = integrate_step_with(&s, p, h, |_| Wrench::ZERO).map_err(|e| e.to_string())?;
        }
        Ok(s)
    };
    let reference = run(dt / 16.0)?;
    let err = |s: &RigidBodyState| (s.attitude - reference.attitude).norm() + (s.omega - reference.omega).norm();
    let coarse = err(&run(dt)?);
    let fine = err(&run(dt / 2.0)?);
    Ok((coarse / fine).log2())
}

pub fn rk4_order_check(p: &VehicleParams) -> CheckResult {
    match rk4_order(p, 0.02, 1.0) {
        Ok(order) => result("rk4 order", order >= 3.9, format!("observed order {order:.3}")),
        Err(e) => result("rk4 order", false, e),
    }
}

/// Airfoil coefficients have no jump at the edges of the stall blend bands.
pub fn stall_continuity_check(p: &VehicleParams) -> CheckResult {
    let mut worst: f64 = 0.0;
    for s in &p.segments {
        for edge in [
            s.stall_pos - s.blend,
            s.stall_pos + s.blend,
            s.stall_neg - s.blend,
            s.stall_neg + s.blend,
        ] {
            let a = airfoil_coefficients(s, edge, 0.0);
            for x in [edge.next_down(), edge.next_up()] {
                let b = airfoil_coefficients(s, x, 0.0);
                worst = worst.max((a.cl - b.cl).abs()).max((a.cd - b.cd).abs()).max((a.cm - b.cm).abs());
            }
        }
    }
    result("stall continuity", worst < 1e-12, format!("max jump {worst:.2e}"))
}

/// Vehicle mirrored in its x-z plane: left and right propellers trade places
/// with reversed spin, and the tail propeller spins the other way.
pub fn mirrored_params(p: &VehicleParams) -> VehicleParams {
    let mut q = p.clone();
    let spin = |r: PropRole| p.propeller(r).spin;
    for pr in &mut q.propellers {
        pr.spin = match pr.role {
            PropRole::Left => -spin(PropRole::Right),
            PropRole::Right => -spin(PropRole::Left),
            PropRole::Tail => -spin(PropRole::Tail),
        };
    }
    q
}

pub fn mirrored_state(s: &RigidBodyState) -> RigidBodyState {
    let (r, pch, y) = tiltwing_core::math::euler_angles(&s.attitude);
    RigidBodyState {
        position: Vec3::new(s.position.x, -s.position.y, s.position.z),
        velocity: Vec3::new(s.velocity.x, -s.velocity.y, s.velocity.z),
        attitude: from_euler(-r, pch, -y),
        omega: Vec3::new(-s.omega.x, s.omega.y, -s.omega.z),
    }
}

pub fn mirrored_actuation(a: &ActuatorSet) -> ActuatorSet {
    let mut m = *a;
    m.set(Actuator::ThrottleLeft, a.get(Actuator::ThrottleRight));
    m.set(Actuator::ThrottleRight, a.get(Actuator::ThrottleLeft));
    m.set(Actuator::AileronLeft, -a.get(Actuator::AileronRight));
    m.set(Actuator::AileronRight, -a.get(Actuator::AileronLeft));
    m.set(Actuator::Rudder, -a.get(Actuator::Rudder));
    m.set(Actuator::TailTilt, -a.get(Actuator::TailTilt));
    m
}

/// The mirrored vehicle in the mirrored state produces the mirrored wrench.
pub fn mirror_check(p: &VehicleParams, cases: usize, seed: u64) -> CheckResult {
    let q = mirrored_params(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let s = random_state(&mut rng, 20.0);
        let a = random_actuation(&mut rng, p);
        let w = total_wrench(&s, &a, p, &Vec3::zeros());
        let m = total_wrench(&mirrored_state(&s), &mirrored_actuation(&a), &q, &Vec3::zeros());
        let ef = Vec3::new(w.force.x - m.force.x, w.force.y + m.force.y, w.force.z - m.force.z);
        let em = Vec3::new(w.moment.x + m.moment.x, w.moment.y - m.moment.y, w.moment.z + m.moment.z);
        let scale = 1.0 + w.force.norm() + w.moment.norm();
        worst = worst.max((ef.norm() + em.norm()) / scale);
    }
    result("mirror symmetry", worst < 1e-9, format!("{cases} states, max relative deviation {worst:.2e}"))
}

pub fn run_all(p: &VehicleParams) -> Vec<CheckResult> {
    vec![
        jacobian_check(p),
        allocation_check(p, 1000, 7),
        rk4_order_check(p),
        orthonormality_check(p, 100_000),
        stall_continuity_check(p),
        mirror_check(p, 1000, 11),
    ]
}

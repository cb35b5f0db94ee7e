//! Velocity control through the trim-map.
//!
//! The commanded airspeed (horizontal along the heading, vertical positive
//! down) is clamped into a band around the measured airspeed and looked up in
//! the trim-map for wing tilt, main throttle, flap and pitch. A PID on the
//! velocity error asks for a corrective force, which a regularized weighted
//! least-squares step turns into corrective pitch and throttle using local
//! control derivatives of the model.

#[allow(unused_imports)] // f64 has inherent math methods whenever std is in the build graph
use num_traits::Float;

use crate::aero::{total_wrench, Source};
use crate::attitude::AttitudeSetpoint;
use crate::dynamics::RigidBodyState;
use crate::math::{clamp, euler_angles, from_euler, Vec3, DEG};
use crate::trim::{TrimError, TrimMap, TrimSolution, HOVER_SPEED};
use crate::vehicle::{Actuator, ActuatorSet, VehicleParams};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Commanded airspeed `[v_ax, v_az]` (forward along the heading, down) and
/// roll angle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CruiseSetpoint {
    pub velocity: [f64; 2],
    pub roll: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PidGains {
    pub p: f64,
    pub i: f64,
    pub d: f64,
    /// Bound on the error integral [m].
    pub integral_limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct CruiseConfig {
    /// Allowed lookup offset below/above the measured horizontal airspeed [m/s].
    pub bound_x: [f64; 2],
    /// Same for the vertical airspeed.
    pub bound_z: [f64; 2],
    pub pid: [PidGains; 2],
    /// Weight of the vertical force error.
    pub weight_z: f64,
    /// Horizontal weight relative to `weight_z` below and above the ramp.
    pub weight_x_low: f64,
    pub weight_x_high: f64,
    /// Airspeeds where the horizontal weight ramps up [m/s].
    pub schedule_speeds: [f64; 2],
    /// Regularization of (θ^c, δ^c), symmetric positive definite.
    pub regularization: [[f64; 2]; 2],
    pub max_corrective_pitch: f64,
    pub pitch_step: f64,
    pub throttle_step: f64,
    /// Floor of the airspeed in the turn-coordination rate [m/s].
    pub turn_min_speed: f64,
}

impl Default for CruiseConfig {
    fn default() -> Self {
        let horizontal = PidGains {
            p: 0.8,
            i: 0.15,
            d: 0.05,
            integral_limit: 2.0,
        };
        // Stiffer on the vertical axis: during decelerations the lookup runs
        // below the actual airspeed and the feed-forward carries excess lift.
        let vertical = PidGains {
            p: 6.0,
            i: 3.0,
            d: 0.05,
            integral_limit: 3.0,
        };
        Self {
            bound_x: [1.5, 3.0],
            bound_z: [1.5, 1.5],
            pid: [horizontal, vertical],
            weight_z: 1.0,
            weight_x_low: 0.01,
            weight_x_high: 1.0,
            schedule_speeds: [12.0, 15.0],
            regularization: [[0.05, 0.0], [0.0, 0.05]],
            max_corrective_pitch: 15.0 * DEG,
            pitch_step: 0.5 * DEG,
            throttle_step: 0.01,
            turn_min_speed: 5.0,
        }
    }
}

impl CruiseConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !self.bound_x.iter().chain(&self.bound_z).all(|b| *b > 0.0) {
            return Err("lookup bounds must be positive");
        }
        if !is_spd(&self.regularization) {
            return Err("regularization must be symmetric positive definite");
        }
        if !(self.weight_z > 0.0 && self.weight_x_low > 0.0 && self.weight_x_high > 0.0) {
            return Err("weights must be positive");
        }
        if !(self.schedule_speeds[1] > self.schedule_speeds[0]) {
            return Err("schedule speeds must be increasing");
        }
        if !(self.max_corrective_pitch > 0.0 && self.pitch_step > 0.0 && self.throttle_step > 0.0) {
            return Err("pitch limit and difference steps must be positive");
        }
        if !(self.turn_min_speed > 0.0) {
            return Err("turn minimum speed must be positive");
        }
        for g in &self.pid {
            if !(g.p >= 0.0 && g.i >= 0.0 && g.d >= 0.0 && g.integral_limit >= 0.0) {
                return Err("PID gains must be non-negative");
            }
        }
        Ok(())
    }

    /// Ramp factor of the speed schedule, 0 below and 1 above it.
    pub fn schedule_ramp(&self, v_ax: f64) -> f64 {
        let [a, b] = self.schedule_speeds;
        clamp((v_ax - a) / (b - a), 0.0, 1.0)
    }
}

pub fn is_spd(m: &[[f64; 2]; 2]) -> bool {
    m[0][1] == m[1][0] && m[0][0] > 0.0 && m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0
}

/// Clamps each component of `desired` into the band around `actual`, keeping
/// a hair inside the band edges.
pub fn lookup_velocity(desired: [f64; 2], actual: [f64; 2], bound_x: [f64; 2], bound_z: [f64; 2]) -> [f64; 2] {
    let band = |d: f64, a: f64, b: [f64; 2]| clamp(d, a - b[0] + 1e-9, a + b[1] - 1e-9);
    [band(desired[0], actual[0], bound_x), band(desired[1], actual[1], bound_z)]
}

/// Trim-map coordinates `(v_a, γ)` of an airspeed `[v_x, v_z]`.
pub fn polar_airspeed(v: [f64; 2]) -> (f64, f64) {
    let va = v[0].hypot(v[1]);
    if va < HOVER_SPEED {
        (va, 0.0)
    } else {
        (va, (-v[1]).atan2(v[0]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: [f64; 2],
    pub last_error: Option<[f64; 2]>,
}

/// Corrective force `m (K_p e + K_i ∫e + K_d ė)` per axis [N].
pub fn velocity_feedback(error: [f64; 2], pid: &mut PidState, gains: &[PidGains; 2], mass: f64, dt: f64) -> [f64; 2] {
    let mut out = [0.0; 2];
    for k in 0..2 {
        let g = &gains[k];
        pid.integral[k] = clamp(pid.integral[k] + error[k] * dt, -g.integral_limit, g.integral_limit);
        let rate = match pid.last_error {
            Some(prev) if dt > 0.0 => (error[k] - prev[k]) / dt,
            _ => 0.0,
        };
        out[k] = mass * (g.p * error[k] + g.i * pid.integral[k] + g.d * rate);
    }
    pid.last_error = Some(error);
    out
}

/// Horizontal and vertical airspeed `[v_ax, v_az]` in the heading frame.
pub fn path_airspeed(state: &RigidBodyState, wind: &Vec3) -> [f64; 2] {
    let (_, _, yaw) = euler_angles(&state.attitude);
    let v = state.velocity - wind;
    [v.x * yaw.cos() + v.y * yaw.sin(), v.z]
}

/// Specific force `[f_x, f_z]` in the heading frame, optionally without the
/// contribution of the segments flagged in `skip`.
fn path_specific_force(
    state: &RigidBodyState,
    act: &ActuatorSet,
    p: &VehicleParams,
    wind: &Vec3,
    skip: &[bool],
) -> [f64; 2] {
    let fm = total_wrench(state, act, p, wind);
    let body = fm
        .partial_sum(|c| match c.source {
            Source::Segment(i) => !skip[i],
            _ => true,
        })
        .force;
    let f = state.attitude * body / p.mass;
    let (_, _, yaw) = euler_angles(&state.attitude);
    [f.x * yaw.cos() + f.y * yaw.sin(), f.z]
}

/// Indices of airfoil segments beyond their stall angles.
pub fn stalled_segments(state: &RigidBodyState, act: &ActuatorSet, p: &VehicleParams, wind: &Vec3) -> alloc::vec::Vec<bool> {
    let fm = total_wrench(state, act, p, wind);
    let mut out = alloc::vec![false; p.segments.len()];
    for c in &fm.breakdown {
        if let (Source::Segment(i), Some(alpha)) = (c.source, c.alpha) {
            out[i] = p.segments[i].is_stalled(alpha);
        }
    }
    out
}

/// Jacobian of the heading-frame specific force with respect to pitch and
/// main throttle, `[[∂f_x/∂θ, ∂f_x/∂δ], [∂f_z/∂θ, ∂f_z/∂δ]]`.
///
/// Central differences on the full model. Segments stalled at the current
/// state do not enter `∂f/∂θ`: their response flips sign across the stall and
/// feeding it back destabilizes pitch.
pub fn control_derivatives(
    state: &RigidBodyState,
    act: &ActuatorSet,
    p: &VehicleParams,
    wind: &Vec3,
    cfg: &CruiseConfig,
    exclude_stalled: bool,
) -> [[f64; 2]; 2] {
    let skip = if exclude_stalled {
        stalled_segments(state, act, p, wind)
    } else {
        alloc::vec![false; p.segments.len()]
    };
    let (roll, pitch, yaw) = euler_angles(&state.attitude);
    let h = cfg.pitch_step;
    let pitched = |d: f64| RigidBodyState {
        attitude: from_euler(roll, pitch + d, yaw),
        ..*state
    };
    let fp = path_specific_force(&pitched(h), act, p, wind, &skip);
    let fm = path_specific_force(&pitched(-h), act, p, wind, &skip);

    let none = alloc::vec![false; p.segments.len()];
    let t = act.get(Actuator::ThrottleLeft);
    let dt = cfg.throttle_step;
    let throttled = |d: f64| {
        act.with(Actuator::ThrottleLeft, t + d)
            .with(Actuator::ThrottleRight, act.get(Actuator::ThrottleRight) + d)
    };
    let gp = path_specific_force(state, &throttled(dt), p, wind, &none);
    let gm = path_specific_force(state, &throttled(-dt), p, wind, &none);
    [
        [(fp[0] - fm[0]) / (2.0 * h), (gp[0] - gm[0]) / (2.0 * dt)],
        [(fp[1] - fm[1]) / (2.0 * h), (gp[1] - gm[1]) / (2.0 * dt)],
    ]
}

/// Unclamped minimizer of `(F − J u)ᵀ W (F − J u) + uᵀ K u`.
pub fn wls_solve(j: &[[f64; 2]; 2], f: &[f64; 2], w: &[[f64; 2]; 2], k: &[[f64; 2]; 2]) -> [f64; 2] {
    let jm = Mat2::from(j);
    let wm = Mat2::from(w);
    let km = Mat2::from(k);
    let jt_w = jm.transpose().mul(&wm);
    let a = jt_w.mul(&jm).add(&km);
    let rhs = jt_w.apply(f);
    a.solve(&rhs)
}

/// Corrective pitch and throttle `(θ^c, δ^c)` for a corrective specific force,
/// clamped to `±max_pitch` and to a total main throttle in `[0, 1]`.
pub fn wls_allocate(
    j: &[[f64; 2]; 2],
    f: &[f64; 2],
    w: &[[f64; 2]; 2],
    k: &[[f64; 2]; 2],
    max_pitch: f64,
    throttle_ff: f64,
) -> [f64; 2] {
    let u = wls_solve(j, f, w, k);
    [
        clamp(u[0], -max_pitch, max_pitch),
        clamp(u[1], -throttle_ff, 1.0 - throttle_ff),
    ]
}

/// Objective of [`wls_solve`].
pub fn wls_objective(u: &[f64; 2], j: &[[f64; 2]; 2], f: &[f64; 2], w: &[[f64; 2]; 2], k: &[[f64; 2]; 2]) -> f64 {
    let r = [
        f[0] - j[0][0] * u[0] - j[0][1] * u[1],
        f[1] - j[1][0] * u[0] - j[1][1] * u[1],
    ];
    let quad = |m: &[[f64; 2]; 2], x: &[f64; 2]| {
        x[0] * (m[0][0] * x[0] + m[0][1] * x[1]) + x[1] * (m[1][0] * x[0] + m[1][1] * x[1])
    };
    quad(w, &r) + quad(k, u)
}

/// Diagonal weighting with the horizontal weight ramped up with airspeed.
pub fn weight_schedule(v_ax: f64, cfg: &CruiseConfig) -> [[f64; 2]; 2] {
    let lo = cfg.weight_x_low * cfg.weight_z;
    let hi = cfg.weight_x_high * cfg.weight_z;
    [[lo + (hi - lo) * cfg.schedule_ramp(v_ax), 0.0], [0.0, cfg.weight_z]]
}

/// Yaw rate of a coordinated turn, `g tan φ / max(v, v_min)`.
pub fn turn_coordination(roll: f64, v_ax: f64, g: f64, min_speed: f64) -> f64 {
    g * roll.tan() / v_ax.max(min_speed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CruiseOutput {
    pub setpoint: AttitudeSetpoint,
    /// Wing command and main throttle `δ_pl,r^n`.
    pub wing: f64,
    pub main_throttle: f64,
    /// Symmetric flap (`δ_al = −δ_ar`) from the trim.
    pub flap: f64,
    pub trim: TrimSolution,
    pub lookup_velocity: [f64; 2],
    pub airspeed: [f64; 2],
    pub force: [f64; 2],
    /// Corrective pitch and throttle.
    pub correction: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
    /// The lookup left the grid or fell back to a nearest feasible node.
    pub lookup_warning: bool,
}

impl CruiseOutput {
    /// Nominal actuation for the attitude controller at a physical wing tilt.
    pub fn nominal(&self, wing_tilt: f64) -> ActuatorSet {
        ActuatorSet::nominal(self.wing, self.main_throttle, wing_tilt)
            .with(Actuator::AileronLeft, self.flap)
            .with(Actuator::AileronRight, -self.flap)
    }
}

/// Trim-map feed-forward plus WLS-allocated PID feedback; holds the PID state.
#[derive(Debug, Clone, PartialEq)]
pub struct CruiseController {
    pub cfg: CruiseConfig,
    pub pid: PidState,
}

impl CruiseController {
    pub fn new(cfg: CruiseConfig) -> Self {
        Self {
            cfg,
            pid: PidState::default(),
        }
    }

    pub fn reset(&mut self) {
        self.pid = PidState::default();
    }

    /// One cruise-loop update. `wing_tilt` is the current physical wing tilt.
    pub fn step(
        &mut self,
        state: &RigidBodyState,
        sp: &CruiseSetpoint,
        map: &TrimMap,
        p: &VehicleParams,
        wind: &Vec3,
        wing_tilt: f64,
        dt: f64,
    ) -> Result<CruiseOutput, TrimError> {
        let cfg = &self.cfg;
        let airspeed = path_airspeed(state, wind);
        let v_lu = lookup_velocity(sp.velocity, airspeed, cfg.bound_x, cfg.bound_z);
        let (va, gamma) = polar_airspeed(v_lu);
        let lookup = map.lookup(va, gamma)?;
        let trim = lookup.solution;

        let error = [v_lu[0] - airspeed[0], v_lu[1] - airspeed[1]];
        let force = velocity_feedback(error, &mut self.pid, &cfg.pid, p.mass, dt);

        let mut act = trim.actuators(p);
        act.wing_tilt = wing_tilt;
        let jacobian = control_derivatives(state, &act, p, wind, cfg, true);
        let w = weight_schedule(airspeed[0], cfg);
        let accel = [force[0] / p.mass, force[1] / p.mass];
        let correction = wls_allocate(
            &jacobian,
            &accel,
            &w,
            &cfg.regularization,
            cfg.max_corrective_pitch,
            trim.main_throttle,
        );

        let yaw_rate = turn_coordination(sp.roll, airspeed[0], p.gravity[2], cfg.turn_min_speed)
            * cfg.schedule_ramp(airspeed[0]);
        Ok(CruiseOutput {
            setpoint: AttitudeSetpoint {
                roll: sp.roll,
                pitch: trim.pitch + correction[0],
                yaw_rate,
            },
            wing: trim.wing,
            main_throttle: trim.main_throttle + correction[1],
            flap: trim.aileron,
            trim,
            lookup_velocity: v_lu,
            airspeed,
            force,
            correction,
            jacobian,
            lookup_warning: lookup.clamped || lookup.fallback,
        })
    }
}

/// Stateless form of [`CruiseController::step`] for callers that keep the
/// PID state themselves.
pub fn cruise_step(
    state: &RigidBodyState,
    sp: &CruiseSetpoint,
    map: &TrimMap,
    p: &VehicleParams,
    cfg: &CruiseConfig,
    pid: &mut PidState,
    wind: &Vec3,
    wing_tilt: f64,
    dt: f64,
) -> Result<CruiseOutput, TrimError> {
    let mut c = CruiseController {
        cfg: *cfg,
        pid: *pid,
    };
    let out = c.step(state, sp, map, p, wind, wing_tilt, dt);
    *pid = c.pid;
    out
}

#[derive(Debug, Clone, Copy)]
struct Mat2([[f64; 2]; 2]);

impl From<&[[f64; 2]; 2]> for Mat2 {
    fn from(m: &[[f64; 2]; 2]) -> Self {
        Mat2(*m)
    }
}

impl Mat2 {
    fn transpose(&self) -> Self {
        let m = self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    fn mul(&self, o: &Self) -> Self {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    fn add(&self, o: &Self) -> Self {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }

    fn apply(&self, x: &[f64; 2]) -> [f64; 2] {
        let m = self.0;
        [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
    }

    fn solve(&self, b: &[f64; 2]) -> [f64; 2] {
        let m = self.0;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        [
            (m[1][1] * b[0] - m[0][1] * b[1]) / det,
            (m[0][0] * b[1] - m[1][0] * b[0]) / det,
        ]
    }
}

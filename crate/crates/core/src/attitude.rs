//! Attitude control: quaternion error feedback, dynamic inversion and
//! daisy-chain control allocation.
//!
//! The outer loop turns roll/pitch errors and the yaw-rate reference into a
//! desired body rate, a rate PID turns that into a desired angular
//! acceleration, and dynamic inversion yields the moment the actuators must
//! add on top of the moment of the nominal actuation. That moment is handed
//! through a chain of actuator blocks; each block only sees what its
//! predecessors could not produce.

#[allow(unused_imports)] // f64 has inherent math methods whenever std is in the build graph
use num_traits::Float;

use crate::aero::total_wrench;
use crate::dynamics::RigidBodyState;
use crate::math::{clamp, from_euler, quat_from_matrix, smallest_root, Mat3, Vec3, DEG};
use crate::vehicle::{Actuator, ActuatorSet, VehicleParams};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttitudeSetpoint {
    pub roll: f64,
    pub pitch: f64,
    pub yaw_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct AttitudeGains {
    /// Attitude-error to rate gain per body axis [1/s].
    pub attitude_p: [f64; 3],
    pub rate_p: [f64; 3],
    pub rate_i: [f64; 3],
    pub rate_d: [f64; 3],
    /// Bound on each rate-error integral [rad].
    pub integral_limit: f64,
    /// Bound on each desired body rate [rad/s].
    pub max_rate: f64,
    /// Pitch-down gain multiplier with the wing fully up.
    pub pitch_down_factor: f64,
    /// Wing tilt range over which the pitch-down multiplier fades in [rad].
    pub schedule_start: f64,
    pub schedule_end: f64,
}

impl Default for AttitudeGains {
    fn default() -> Self {
        Self {
            attitude_p: [6.0; 3],
            rate_p: [8.0; 3],
            rate_i: [2.0; 3],
            rate_d: [0.1; 3],
            integral_limit: 0.5,
            max_rate: 3.0,
            pitch_down_factor: 0.5,
            schedule_start: 70.0 * DEG,
            schedule_end: 90.0 * DEG,
        }
    }
}

impl AttitudeGains {
    /// Multiplier of the pitch gain for nose-down errors at a wing tilt.
    pub fn pitch_down_multiplier(&self, wing_tilt: f64) -> f64 {
        let t = clamp(
            (wing_tilt - self.schedule_start) / (self.schedule_end - self.schedule_start),
            0.0,
            1.0,
        );
        1.0 - (1.0 - self.pitch_down_factor) * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeOutput {
    pub rate_des: Vec3,
    pub accel_des: Vec3,
    /// Rotation-vector attitude error in the body frame [rad].
    pub error: Vec3,
}

/// Cascaded P / rate-PID attitude controller holding the integrator state.
#[derive(Debug, Clone, PartialEq)]
pub struct AttitudeController {
    pub gains: AttitudeGains,
    integral: Vec3,
    last_rate: Option<Vec3>,
}

impl AttitudeController {
    pub fn new(gains: AttitudeGains) -> Self {
        Self {
            gains,
            integral: Vec3::zeros(),
            last_rate: None,
        }
    }

    pub fn reset(&mut self) {
        self.integral = Vec3::zeros();
        self.last_rate = None;
    }

    pub fn integral(&self) -> Vec3 {
        self.integral
    }

    /// Desired angular acceleration for the current state.
    ///
    /// The desired attitude keeps the current heading, so the yaw channel is
    /// driven by the yaw-rate reference alone.
    pub fn update(&mut self, state: &RigidBodyState, sp: &AttitudeSetpoint, wing_tilt: f64, dt: f64) -> AttitudeOutput {
        let g = &self.gains;
        let error = attitude_error(&state.attitude, sp);
        let mut kp = g.attitude_p;
        if error.y < 0.0 {
            kp[1] *= g.pitch_down_multiplier(wing_tilt);
        }
        let yaw_ff = state.attitude.transpose() * Vec3::new(0.0, 0.0, sp.yaw_rate);
        let mut rate_des = Vec3::new(kp[0] * error.x, kp[1] * error.y, kp[2] * error.z) + yaw_ff;
        rate_des.iter_mut().for_each(|r| *r = clamp(*r, -g.max_rate, g.max_rate));

        let rate_err = rate_des - state.omega;
        if dt > 0.0 {
            self.integral += rate_err * dt;
            self.integral
                .iter_mut()
                .for_each(|v| *v = clamp(*v, -g.integral_limit, g.integral_limit));
        }
        let rate_change = match self.last_rate {
            Some(prev) if dt > 0.0 => (state.omega - prev) / dt,
            _ => Vec3::zeros(),
        };
        self.last_rate = Some(state.omega);
        let accel_des = Vec3::from_fn(|i, _| {
            g.rate_p[i] * rate_err[i] + g.rate_i[i] * self.integral[i] - g.rate_d[i] * rate_change[i]
        });
        AttitudeOutput {
            rate_des,
            accel_des,
            error,
        }
    }
}

/// Body-frame rotation vector from the current to the desired attitude
/// (roll and pitch from the setpoint, heading kept).
pub fn attitude_error(attitude: &Mat3, sp: &AttitudeSetpoint) -> Vec3 {
    let (_, _, yaw) = crate::math::euler_angles(attitude);
    let q = quat_from_matrix(attitude);
    let q_des = quat_from_matrix(&from_euler(sp.roll, sp.pitch, yaw));
    let q_err = q.inverse() * q_des;
    let v = q_err.vector();
    let w = q_err.scalar();
    let s = if w < 0.0 { -1.0 } else { 1.0 };
    let n = v.norm();
    if n < 1e-12 {
        return Vec3::new(v[0], v[1], v[2]) * (2.0 * s);
    }
    let angle = 2.0 * n.atan2(w.abs());
    Vec3::new(v[0], v[1], v[2]) * (s * angle / n)
}

/// Single-step convenience wrapper around [`AttitudeController::update`].
pub fn attitude_error_control(
    controller: &mut AttitudeController,
    state: &RigidBodyState,
    sp: &AttitudeSetpoint,
    wing_tilt: f64,
    dt: f64,
) -> Vec3 {
    controller.update(state, sp, wing_tilt, dt).accel_des
}

/// `M_des = I ω̇_des + ω × I ω`.
pub fn dynamic_inversion(accel_des: &Vec3, omega: &Vec3, inertia: &Mat3) -> Vec3 {
    inertia * accel_des + omega.cross(&(inertia * omega))
}

/// Moment of the nominal actuation at the current state.
pub fn nominal_moment_estimate(state: &RigidBodyState, nominal: &ActuatorSet, p: &VehicleParams, wind: &Vec3) -> Vec3 {
    total_wrench(state, nominal, p, wind).moment
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct AllocationConfig {
    /// Weight of roll relative to yaw in the aileron/differential-throttle block.
    pub roll_weight: f64,
    pub yaw_weight: f64,
    pub regularization: f64,
    /// Number of passes through the chain on the remaining residual.
    pub passes: usize,
    /// Residual norm [N·m] below which further passes are skipped.
    pub tolerance: f64,
}

impl Default for AllocationConfig {
    fn default() -> Self {
        Self {
            roll_weight: 2.0,
            yaw_weight: 1.0,
            regularization: 1e-6,
            passes: 4,
            tolerance: 1e-7,
        }
    }
}

/// Chain blocks in allocation order.
pub const BLOCK_NAMES: [&str; 4] = ["elevator", "rudder", "wing", "tail"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationResult {
    pub command: ActuatorSet,
    /// Moment each block added, summed over passes.
    pub blocks: [Vec3; 4],
    pub residual: Vec3,
    /// An actuator limit kept the chain from producing the full moment.
    pub saturated: bool,
    pub passes: usize,
}

impl AllocationResult {
    pub fn allocated(&self) -> Vec3 {
        self.blocks.iter().fold(Vec3::zeros(), |a, b| a + b)
    }
}

struct Chain<'a> {
    state: &'a RigidBodyState,
    p: &'a VehicleParams,
    wind: &'a Vec3,
    cfg: &'a AllocationConfig,
}

/// Increment `Δ` with `a Δ² + b Δ = target`, clamped to `[lo, hi]`.
///
/// Picks the smaller root; without a real root it moves to the extremum of the
/// model inside the box. Reports whether the clamp was active.
fn invert_quadratic(a: f64, b: f64, target: f64, lo: f64, hi: f64) -> (f64, bool) {
    let model = |d: f64| a * d * d + b * d;
    let root = smallest_root(a, b, -target);
    match root {
        Some(d) if d >= lo && d <= hi => (d, false),
        _ => {
            let mut best = (0.0, (model(0.0) - target).abs());
            let mut cands = [lo, hi, if a != 0.0 { -b / (2.0 * a) } else { 0.0 }];
            if let Some(d) = root {
                cands[2] = clamp(d, lo, hi);
            }
            for c in [lo, hi, clamp(cands[2], lo, hi)] {
                let e = (model(c) - target).abs();
                if e < best.1 {
                    best = (c, e);
                }
            }
            (best.0, true)
        }
    }
}

/// Increment `Δ` with `g(x0 + Δ) = 0`, where `g(x0) = -demand`, inside
/// `[lo, hi]`.
///
/// A quadratic model from three samples gives the first guess; the root is
/// then bracketed and polished with the Illinois variant of regula falsi on
/// the true function, so plateaus and curvature in the response are handled.
/// Without a sign change the endpoint with the smallest `|g|` is returned and
/// flagged as clamped.
fn solve_increment(g: impl Fn(f64) -> f64, x0: f64, demand: f64, lo: f64, hi: f64, h: f64, tol: f64) -> (f64, bool) {
    if demand.abs() <= tol {
        return (0.0, false);
    }
    let g0 = -demand;
    let h = h.min((hi - lo) / 4.0);
    let xp = (x0 + h).min(hi);
    let xm = (x0 - h).max(lo);
    let (gp, gm) = (g(xp), g(xm));
    let mut guess = None;
    if xp > x0 && xm < x0 {
        let (a, b) = quadratic_through(xm - x0, gm - g0, xp - x0, gp - g0);
        if a.abs() > 1e-12 || b.abs() > 1e-12 {
            if let (d, false) = invert_quadratic(a, b, demand, lo - x0, hi - x0) {
                guess = Some(x0 + d);
            }
        }
    }
    // candidate brackets on each side of x0, nearest first
    let mut best: Option<(f64, f64)> = None;
    let mut consider = |x: f64, gx: f64| {
        if best.is_none_or(|(_, bg)| gx.abs() < bg.abs()) {
            best = Some((x, gx));
        }
    };
    consider(x0, g0);
    consider(xp, gp);
    consider(xm, gm);
    let mut roots: [Option<f64>; 2] = [None, None];
    for (k, (near, g_near, far)) in [(xp, gp, hi), (xm, gm, lo)].into_iter().enumerate() {
        let (mut a, mut ga) = (x0, g0);
        let (mut b, mut gb) = (near, g_near);
        if (b - a).abs() < 1e-15 {
            continue;
        }
        if ga * gb > 0.0 {
            // extend towards the limit, preferring the model guess
            let mut found = false;
            let mut steps = [f64::NAN; 3];
            if let Some(x) = guess.filter(|x| (x - x0) * (near - x0) > 0.0 && (x - near) * (far - near) > 0.0) {
                steps[0] = x;
            }
            steps[1] = 0.5 * (near + far);
            steps[2] = far;
            for x in steps.into_iter().filter(|x| x.is_finite()) {
                if (x - b) * (far - near) <= 0.0 {
                    continue;
                }
                let gx = g(x);
                consider(x, gx);
                if gx * gb <= 0.0 {
                    a = b;
                    ga = gb;
                    b = x;
                    gb = gx;
                    found = true;
                    break;
                }
                b = x;
                gb = gx;
            }
            if !found {
                continue;
            }
        }
        // Illinois iterations on [a, b] with ga * gb <= 0
        let mut side = 0;
        let mut x = b;
        for _ in 0..60 {
            if gb == 0.0 {
                x = b;
                break;
            }
            if ga == 0.0 {
                x = a;
                break;
            }
            x = (a * gb - b * ga) / (gb - ga);
            let gx = g(x);
            if gx.abs() <= tol * 1e-3 || (b - a).abs() < 1e-13 {
                break;
            }
            if gx * gb < 0.0 {
                a = b;
                ga = gb;
                if side == -1 {
                    ga *= 0.5;
                }
                side = -1;
            } else {
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            }
            b = x;
            gb = gx;
        }
        roots[k] = Some(x);
    }
    let root = match roots {
        [Some(a), Some(b)] => Some(if (a - x0).abs() <= (b - x0).abs() { a } else { b }),
        [a, b] => a.or(b),
    };
    match root {
        Some(x) => (x - x0, false),
        None => (best.map_or(0.0, |(x, _)| x - x0), true),
    }
}

/// Coefficients `(a, b)` of `a d² + b d` through `(d1, y1)` and `(d2, y2)`.
fn quadratic_through(d1: f64, y1: f64, d2: f64, y2: f64) -> (f64, f64) {
    let det = d1 * d2 * (d1 - d2);
    if det.abs() < 1e-300 {
        return (0.0, if d2 != 0.0 { y2 / d2 } else { 0.0 });
    }
    ((y1 * d2 - y2 * d1) / det, (y2 * d1 * d1 - y1 * d2 * d2) / det)
}

impl Chain<'_> {
    fn moment(&self, u: &ActuatorSet) -> Vec3 {
        total_wrench(self.state, u, self.p, self.wind).moment
    }

    /// Moves one actuator so that moment component `axis` changes by
    /// `demand`. Returns whether the actuator limit prevented it.
    fn single(&self, u: &mut ActuatorSet, a: Actuator, axis: usize, demand: f64, h: f64, m0: &Vec3) -> bool {
        let x0 = u.get(a);
        let (lo, hi) = a.range();
        let base = *u;
        let g = |x: f64| self.moment(&base.with(a, x))[axis] - m0[axis] - demand;
        let (d, clamped) = solve_increment(g, x0, demand, lo, hi, h, self.cfg.tolerance);
        u.set(a, x0 + d);
        clamped
    }

    fn wing_block(&self, u: &mut ActuatorSet, demand: &Vec3, m0: &Vec3) -> bool {
        let al = u.get(Actuator::AileronLeft);
        let ar = u.get(Actuator::AileronRight);
        let pl = u.get(Actuator::ThrottleLeft);
        let pr = u.get(Actuator::ThrottleRight);
        let apply = |u: &ActuatorSet, da: f64, dt: f64| {
            u.with(Actuator::AileronLeft, al + da)
                .with(Actuator::AileronRight, ar + da)
                .with(Actuator::ThrottleLeft, pl + dt)
                .with(Actuator::ThrottleRight, pr - dt)
        };
        let lo = [(-1.0 - al).max(-1.0 - ar), (-pl).max(pr - 1.0)];
        let hi = [(1.0 - al).min(1.0 - ar), (1.0 - pl).min(pr)];
        let h = [0.02, 0.01];
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            // one-sided where a bound is too close
            let (dp, dm) = (h[k].min(hi[k]), h[k].min(-lo[k]));
            let step = |s: f64| if k == 0 { apply(u, s, 0.0) } else { apply(u, 0.0, s) };
            let mp = if dp > 0.0 { self.moment(&step(dp)) } else { *m0 };
            let mm = if dm > 0.0 { self.moment(&step(-dm)) } else { *m0 };
            let span = dp + dm;
            if span > 0.0 {
                jac[0][k] = (mp.x - mm.x) / span;
                jac[1][k] = (mp.z - mm.z) / span;
            }
        }
        let w = [self.cfg.roll_weight, self.cfg.yaw_weight];
        let (x, clamped) = box_qp2(&jac, &[demand.x, demand.z], &w, self.cfg.regularization, &lo, &hi);
        *u = apply(u, x[0], x[1]);
        clamped && (demand.x.abs() + demand.z.abs()) > self.cfg.tolerance
    }

    fn tail_block(&self, u: &mut ActuatorSet, demand: &Vec3, m0: &Vec3) -> bool {
        let target = m0 + demand;
        let pitch = |chain: &Self, u: &mut ActuatorSet| -> bool {
            let m = chain.moment(u);
            chain.single(u, Actuator::ThrottleTail, 1, target.y - m.y, 0.05, &m)
        };
        let pitch_limited_before = pitch(self, u);
        let tilt0 = u.get(Actuator::TailTilt);
        let m = self.moment(u);
        let yaw_limited = self.single(u, Actuator::TailTilt, 2, target.z - m.z, 0.05, &m);
        let pitch_limited = pitch(self, u);
        if pitch_limited && !pitch_limited_before {
            // yaw must not cost pitch: shrink the tilt until pitch is attainable
            let tilt1 = u.get(Actuator::TailTilt);
            let (mut ok, mut bad) = (0.0, 1.0);
            for _ in 0..12 {
                let t = 0.5 * (ok + bad);
                let mut trial = u.with(Actuator::TailTilt, tilt0 + t * (tilt1 - tilt0));
                if pitch(self, &mut trial) {
                    bad = t;
                } else {
                    ok = t;
                }
            }
            u.set(Actuator::TailTilt, tilt0 + ok * (tilt1 - tilt0));
            pitch(self, u);
            return true;
        }
        pitch_limited || yaw_limited
    }
}

/// Minimizes `Σ w_i (r_i − (J x)_i)² + ε ‖x‖²` over the box `lo <= x <= hi`.
///
/// The problem is a convex 2-D QP, solved exactly by checking the interior
/// stationary point and the minimizer along each edge. Returns the solution
/// and whether it lies on the boundary while the unconstrained optimum does
/// not.
pub fn box_qp2(j: &[[f64; 2]; 2], r: &[f64; 2], w: &[f64; 2], eps: f64, lo: &[f64; 2], hi: &[f64; 2]) -> ([f64; 2], bool) {
    // objective ½ xᵀ H x − gᵀ x (+ const)
    let h = [
        [
            2.0 * (w[0] * j[0][0] * j[0][0] + w[1] * j[1][0] * j[1][0] + eps),
            2.0 * (w[0] * j[0][0] * j[0][1] + w[1] * j[1][0] * j[1][1]),
        ],
        [
            2.0 * (w[0] * j[0][1] * j[0][0] + w[1] * j[1][1] * j[1][0]),
            2.0 * (w[0] * j[0][1] * j[0][1] + w[1] * j[1][1] * j[1][1] + eps),
        ],
    ];
    let g = [
        2.0 * (w[0] * j[0][0] * r[0] + w[1] * j[1][0] * r[1]),
        2.0 * (w[0] * j[0][1] * r[0] + w[1] * j[1][1] * r[1]),
    ];
    let obj = |x: &[f64; 2]| {
        0.5 * (h[0][0] * x[0] * x[0] + 2.0 * h[0][1] * x[0] * x[1] + h[1][1] * x[1] * x[1]) - g[0] * x[0] - g[1] * x[1]
    };
    let inside = |x: &[f64; 2]| (0..2).all(|k| x[k] >= lo[k] && x[k] <= hi[k]);
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let free = [
        (h[1][1] * g[0] - h[0][1] * g[1]) / det,
        (h[0][0] * g[1] - h[1][0] * g[0]) / det,
    ];
    if inside(&free) {
        return (free, false);
    }
    let mut best: Option<([f64; 2], f64)> = None;
    let mut consider = |x: [f64; 2]| {
        let v = obj(&x);
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((x, v));
        }
    };
    for k in 0..2 {
        let o = 1 - k;
        for fixed in [lo[k], hi[k]] {
            // minimize over x_o with x_k fixed
            let xo = if h[o][o] > 0.0 {
                clamp((g[o] - h[o][k] * fixed) / h[o][o], lo[o], hi[o])
            } else {
                lo[o]
            };
            let mut x = [0.0; 2];
            x[k] = fixed;
            x[o] = xo;
            consider(x);
        }
    }
    (best.map(|b| b.0).unwrap_or([0.0; 2]), true)
}

/// Distributes `m_act` (moment on top of the nominal actuation) over the
/// actuator chain: elevator, rudder, ailerons with differential main throttle,
/// then tail throttle and tail tilt with pitch strictly before yaw.
///
/// Each block's contribution is measured with the full model, so the block
/// moments plus the residual reproduce `m_act`.
pub fn daisy_chain_allocate(
    m_act: &Vec3,
    state: &RigidBodyState,
    nominal: &ActuatorSet,
    p: &VehicleParams,
    wind: &Vec3,
    cfg: &AllocationConfig,
) -> AllocationResult {
    let chain = Chain {
        state,
        p,
        wind,
        cfg,
    };
    let mut saturated = false;
    let mut u = *nominal;
    let m_nominal = chain.moment(&u);
    let mut m_cur = m_nominal;
    let mut blocks = [Vec3::zeros(); 4];
    let mut passes = 0;
    for _ in 0..cfg.passes.max(1) {
        let remaining = m_act - (m_cur - m_nominal);
        if remaining.norm() < cfg.tolerance {
            break;
        }
        passes += 1;
        saturated = false;
        for (k, block) in blocks.iter_mut().enumerate() {
            let demand = m_act - (m_cur - m_nominal);
            saturated |= match k {
                0 => chain.single(&mut u, Actuator::Elevator, 1, demand.y, 0.1, &m_cur),
                1 => chain.single(&mut u, Actuator::Rudder, 2, demand.z, 0.1, &m_cur),
                2 => chain.wing_block(&mut u, &demand, &m_cur),
                _ => chain.tail_block(&mut u, &demand, &m_cur),
            };
            let m_next = chain.moment(&u);
            *block += m_next - m_cur;
            m_cur = m_next;
        }
    }
    let allocated = blocks.iter().fold(Vec3::zeros(), |a, b| a + b);
    AllocationResult {
        command: u,
        blocks,
        residual: m_act - allocated,
        saturated: saturated && (m_act - allocated).norm() > cfg.tolerance,
        passes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rot_y;

    #[test]
    fn at_setpoint_no_acceleration() {
        let mut c = AttitudeController::new(AttitudeGains::default());
        let s = RigidBodyState::default();
        let out = c.update(&s, &AttitudeSetpoint::default(), 0.0, 0.004);
        assert!(out.accel_des.norm() < 1e-15);
    }

    #[test]
    fn roll_error_drives_roll_axis_only() {
        let mut c = AttitudeController::new(AttitudeGains::default());
        let sp = AttitudeSetpoint {
            roll: 10.0 * DEG,
            ..Default::default()
        };
        let out = c.update(&RigidBodyState::default(), &sp, 0.0, 0.004);
        assert!(out.accel_des.x > 0.0);
        assert!(out.accel_des.y.abs() < 1e-12 && out.accel_des.z.abs() < 1e-12);
        assert!((out.error.x - 10.0 * DEG).abs() < 1e-12);
    }

    #[test]
    fn pitch_down_is_softer_near_hover() {
        let g = AttitudeGains::default();
        let s = RigidBodyState::default();
        let run = |pitch: f64| {
            let mut c = AttitudeController::new(g);
            let sp = AttitudeSetpoint {
                pitch,
                ..Default::default()
            };
            c.update(&s, &sp, 90.0 * DEG, 0.004).accel_des.y
        };
        assert!(run(-10.0 * DEG).abs() < run(10.0 * DEG).abs());
        assert_eq!(g.pitch_down_multiplier(60.0 * DEG), 1.0);
        assert!((g.pitch_down_multiplier(80.0 * DEG) - 0.75).abs() < 1e-12);
        assert_eq!(g.pitch_down_multiplier(90.0 * DEG), 0.5);
    }

    #[test]
    fn integral_is_clamped() {
        let g = AttitudeGains::default();
        let mut c = AttitudeController::new(g);
        let sp = AttitudeSetpoint {
            roll: 30.0 * DEG,
            ..Default::default()
        };
        for _ in 0..10_000 {
            c.update(&RigidBodyState::default(), &sp, 0.0, 0.004);
        }
        assert!(c.integral().x <= g.integral_limit);
    }

    #[test]
    fn yaw_rate_reference_enters_about_vertical() {
        let mut c = AttitudeController::new(AttitudeGains::default());
        let s = RigidBodyState {
            attitude: rot_y(20.0 * DEG),
            ..Default::default()
        };
        let sp = AttitudeSetpoint {
            pitch: 20.0 * DEG,
            yaw_rate: 0.5,
            ..Default::default()
        };
        let out = c.update(&s, &sp, 0.0, 0.004);
        let expect = s.attitude.transpose() * Vec3::new(0.0, 0.0, 0.5);
        assert!((out.rate_des - expect).norm() < 1e-9);
    }

    #[test]
    fn inversion_hand_values() {
        let i = Mat3::from_diagonal(&Vec3::new(1.0, 2.0, 3.0));
        let m = dynamic_inversion(&Vec3::zeros(), &Vec3::new(1.0, 1.0, 0.0), &i);
        assert!((m - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
        let a = Vec3::new(0.3, -0.2, 0.1);
        assert_eq!(dynamic_inversion(&a, &Vec3::zeros(), &i), i * a);
        let sph = Mat3::identity() * 0.05;
        assert!(dynamic_inversion(&Vec3::zeros(), &Vec3::new(1.0, -2.0, 0.5), &sph).norm() < 1e-15);
    }

    #[test]
    fn quadratic_inversion_picks_small_root_and_clamps() {
        let (d, c) = invert_quadratic(1.0, 3.0, -2.0, -5.0, 5.0);
        assert!((d + 1.0).abs() < 1e-12 && !c);
        let (d, c) = invert_quadratic(0.0, 2.0, 10.0, -1.0, 1.0);
        assert_eq!(d, 1.0);
        assert!(c);
    }

    #[test]
    fn box_qp_interior_matches_least_squares() {
        let j = [[2.0, 0.5], [0.3, 1.0]];
        let (x, c) = box_qp2(&j, &[0.2, -0.1], &[1.0, 1.0], 0.0, &[-10.0; 2], &[10.0; 2]);
        assert!(!c);
        let r0 = j[0][0] * x[0] + j[0][1] * x[1] - 0.2;
        let r1 = j[1][0] * x[0] + j[1][1] * x[1] + 0.1;
        assert!(r0.abs() < 1e-12 && r1.abs() < 1e-12);
    }
}

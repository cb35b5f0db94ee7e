//! Aerodynamic forces and moments.
//!
//! Each propeller, airfoil segment and the fuselage contributes a body-frame
//! wrench about the CG. Propellers are evaluated first because their thrust
//! sets the slipstream seen by the segments behind them.

use alloc::vec::Vec;

#[allow(unused_imports)] // f64 has inherent math methods whenever std is in the build graph
use num_traits::Float;

use crate::dynamics::RigidBodyState;
use crate::math::{rot_x, rot_y, vec3, Mat3, Vec3};
use crate::vehicle::{
    ActuatorSet, AirfoilSegmentParams, FuselageParams, Mount, PropRole, PropellerParams,
    VehicleParams,
};

/// A force/moment pair in the body frame, moment taken about the CG.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub force: Vec3,
    pub moment: Vec3,
}

impl Wrench {
    pub const ZERO: Wrench = Wrench {
        force: Vec3::new(0.0, 0.0, 0.0),
        moment: Vec3::new(0.0, 0.0, 0.0),
    };

    pub fn new(force: Vec3, moment: Vec3) -> Self {
        Self { force, moment }
    }
}

impl core::ops::Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force + rhs.force, self.moment + rhs.moment)
    }
}

impl core::ops::Sub for Wrench {
    type Output = Wrench;
    fn sub(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force - rhs.force, self.moment - rhs.moment)
    }
}

impl core::ops::Mul<f64> for Wrench {
    type Output = Wrench;
    fn mul(self, k: f64) -> Wrench {
        Wrench::new(self.force * k, self.moment * k)
    }
}

impl core::ops::AddAssign for Wrench {
    fn add_assign(&mut self, rhs: Wrench) {
        self.force += rhs.force;
        self.moment += rhs.moment;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Propeller(PropRole),
    /// Index into [`VehicleParams::segments`].
    Segment(usize),
    Fuselage,
}

/// One entry of the wrench breakdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub source: Source,
    pub wrench: Wrench,
    /// Local airspeed the component saw, slipstream included.
    pub flow: LocalFlow,
    /// Angle of attack, segments only.
    pub alpha: Option<f64>,
    /// Thrust, propellers only.
    pub thrust: Option<f64>,
}

/// Net aerodynamic wrench with its per-component breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceMoment {
    pub force: Vec3,
    pub moment: Vec3,
    pub breakdown: Vec<Contribution>,
}

impl ForceMoment {
    pub fn wrench(&self) -> Wrench {
        Wrench::new(self.force, self.moment)
    }

    pub fn contribution(&self, source: Source) -> Option<&Contribution> {
        self.breakdown.iter().find(|c| c.source == source)
    }

    /// Sum of the breakdown entries accepted by `keep`.
    pub fn partial_sum(&self, mut keep: impl FnMut(&Contribution) -> bool) -> Wrench {
        self.breakdown
            .iter()
            .filter(|c| keep(c))
            .fold(Wrench::ZERO, |acc, c| acc + c.wrench)
    }
}

/// Velocity of a point on the airframe relative to the surrounding air.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalFlow {
    pub velocity: Vec3,
}

/// Local flow resolved along a propeller axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropInflow {
    /// V∥∞, positive when moving forward along the thrust axis.
    pub axial: f64,
    /// V⊥∞ ≥ 0.
    pub radial: f64,
    /// Unit radial direction p⊥ (orthogonal to the axis).
    pub radial_dir: Vec3,
}

/// Local flow resolved in an airfoil segment frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentFlow {
    /// Angle of attack in [-pi, pi].
    pub alpha: f64,
    /// Speed in the lift-drag plane.
    pub speed: f64,
    pub lift_dir: Vec3,
    pub drag_dir: Vec3,
}

impl LocalFlow {
    pub fn propeller_inflow(&self, axis: &Vec3) -> PropInflow {
        let axial = self.velocity.dot(axis);
        let radial_vec = self.velocity - axis * axial;
        let radial = radial_vec.norm();
        let radial_dir = if radial > 1e-12 {
            radial_vec / radial
        } else {
            // any unit vector orthogonal to the axis; the normal force vanishes here
            let trial = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            let v = trial - axis * trial.dot(axis);
            v / v.norm()
        };
        PropInflow {
            axial,
            radial,
            radial_dir,
        }
    }

    /// Resolves the flow in a segment frame whose columns are `(e_x, e_y, e_z)`.
    pub fn segment_flow(&self, frame: &Mat3) -> SegmentFlow {
        let ex = frame.column(0).into_owned();
        let ey = frame.column(1).into_owned();
        let ez = frame.column(2).into_owned();
        let ux = self.velocity.dot(&ex);
        let uz = self.velocity.dot(&ez);
        let speed = (ux * ux + uz * uz).sqrt();
        let alpha = uz.atan2(ux);
        let (drag_dir, lift_dir) = if speed > 0.0 {
            let d = -(ex * ux + ez * uz) / speed;
            (d, d.cross(&ey))
        } else {
            (-ex, -ez)
        };
        SegmentFlow {
            alpha,
            speed,
            lift_dir,
            drag_dir,
        }
    }
}

/// Local airspeed at body position `r`: `v_a + ω × r (+ w)`.
pub fn local_airspeed(r: &Vec3, v_air_body: &Vec3, omega: &Vec3, slipstream: Option<&Vec3>) -> LocalFlow {
    let mut velocity = v_air_body + omega.cross(r);
    if let Some(w) = slipstream {
        velocity += w;
    }
    LocalFlow { velocity }
}

/// Hub position and thrust axis of a propeller in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropPose {
    pub position: Vec3,
    pub axis: Vec3,
}

/// Center of pressure and segment frame in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentPose {
    pub position: Vec3,
    pub frame: Mat3,
}

/// Body-frame placement of every component for a given wing and tail tilt.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub props: [PropPose; 3],
    pub segments: Vec<SegmentPose>,
}

impl Geometry {
    pub fn new(p: &VehicleParams, wing_tilt: f64, tail_tilt: f64) -> Self {
        let wing_rot = rot_y(wing_tilt);
        let tail_rot = rot_x(tail_tilt);
        let pivot = vec3(p.wing.pivot);
        let mut props = [PropPose {
            position: Vec3::zeros(),
            axis: Vec3::x(),
        }; 3];
        for prop in &p.propellers {
            let pose = match prop.role {
                PropRole::Left | PropRole::Right => PropPose {
                    position: pivot + wing_rot * vec3(prop.position),
                    axis: wing_rot * vec3(prop.axis),
                },
                PropRole::Tail => PropPose {
                    position: vec3(prop.position),
                    axis: tail_rot * vec3(prop.axis),
                },
            };
            props[prop.role.index()] = pose;
        }
        let segments = p
            .segments
            .iter()
            .map(|s| match s.mount {
                Mount::Wing => SegmentPose {
                    position: pivot + wing_rot * vec3(s.position),
                    frame: wing_rot * s.local_frame(),
                },
                Mount::Body => SegmentPose {
                    position: vec3(s.position),
                    frame: s.local_frame(),
                },
            })
            .collect();
        Self { props, segments }
    }

    pub fn prop(&self, role: PropRole) -> &PropPose {
        &self.props[role.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropellerWrench {
    pub wrench: Wrench,
    pub thrust: f64,
    pub inflow: PropInflow,
}

/// Thrust, normal force and reactive drag torque of one propeller.
///
/// `speed` is η in rev/s.
pub fn propeller_wrench(
    p: &PropellerParams,
    pose: &PropPose,
    speed: f64,
    flow: &LocalFlow,
    rho: f64,
) -> PropellerWrench {
    let inflow = flow.propeller_inflow(&pose.axis);
    let speed = speed.max(0.0);
    let j = p.advance_ratio(inflow.axial, speed);
    let d = p.diameter;
    let d2 = d * d;
    let thrust = rho * speed * speed * d2 * d2 * p.thrust_coefficient(j);
    let normal = speed * p.normal_force * inflow.radial;
    let force = pose.axis * thrust - inflow.radial_dir * normal;
    let torque = -pose.axis * (rho * speed * speed * d2 * d2 * d * p.torque_coefficient(j) * p.spin);
    let moment = torque + pose.position.cross(&force);
    PropellerWrench {
        wrench: Wrench::new(force, moment),
        thrust,
        inflow,
    }
}

/// Wrench of a propeller as the polynomial `a η² + b η` in its speed.
///
/// Exact while the advance ratio stays inside its clamp range; used to invert
/// moment demands for propeller speed increments.
pub fn propeller_speed_polynomial(
    p: &PropellerParams,
    pose: &PropPose,
    flow: &LocalFlow,
    rho: f64,
) -> (Wrench, Wrench) {
    let inflow = flow.propeller_inflow(&pose.axis);
    let d = p.diameter;
    let d4 = d * d * d * d;
    let axial = inflow.axial.max(0.0);
    let (t2, t1) = (rho * d4 * p.ct0, rho * d4 * p.ct1 * axial / d);
    let (q2, q1) = (rho * d4 * d * p.cq0, rho * d4 * d * p.cq1 * axial / d);
    let f2 = pose.axis * t2;
    let f1 = pose.axis * t1 - inflow.radial_dir * (p.normal_force * inflow.radial);
    let m2 = -pose.axis * (q2 * p.spin) + pose.position.cross(&f2);
    let m1 = -pose.axis * (q1 * p.spin) + pose.position.cross(&f1);
    (Wrench::new(f2, m2), Wrench::new(f1, m1))
}

/// Actuator-disk induced velocity at the propeller hub.
///
/// Zero for non-positive thrust. The radicand is floored at zero for strong
/// descent.
pub fn induced_velocity(p: &PropellerParams, axis: &Vec3, thrust: f64, axial: f64, rho: f64) -> Vec3 {
    if !(thrust > 0.0) {
        return Vec3::zeros();
    }
    let radicand = (axial * axial + 2.0 * thrust / (rho * p.disk_area())).max(0.0);
    axis * (0.5 * (-axial + radicand.sqrt())).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub cl: f64,
    pub cd: f64,
    pub cm: f64,
}

impl Coefficients {
    fn blend(a: Coefficients, b: Coefficients, t: f64) -> Coefficients {
        Coefficients {
            cl: (1.0 - t) * a.cl + t * b.cl,
            cd: (1.0 - t) * a.cd + t * b.cd,
            cm: (1.0 - t) * a.cm + t * b.cm,
        }
    }
}

/// Attached-flow coefficients of the clean airfoil.
pub fn pre_stall_coefficients(s: &AirfoilSegmentParams, alpha: f64) -> Coefficients {
    let c = &s.pre_stall;
    Coefficients {
        cl: c.cl0 + c.cl_alpha * alpha,
        cd: c.cd0 + c.cd_alpha2 * alpha * alpha,
        cm: c.cm0 + c.cm_alpha * alpha,
    }
}

pub fn flat_plate_coefficients(s: &AirfoilSegmentParams, alpha: f64) -> Coefficients {
    let fp = &s.flat_plate;
    let sa = alpha.sin();
    Coefficients {
        cl: fp.cl_45 * (2.0 * alpha).sin(),
        cd: fp.cd_min + (fp.cd_90 - fp.cd_min) * sa * sa,
        cm: -fp.cm_max * (alpha.signum() * alpha * alpha / core::f64::consts::PI).sin(),
    }
}

/// Increments of a control-surface deflection, applied in every flow regime.
pub fn deflection_increments(s: &AirfoilSegmentParams, deflection: f64) -> Coefficients {
    let c = &s.pre_stall;
    Coefficients {
        cl: c.cl_delta * deflection,
        cd: c.cd_delta2 * deflection * deflection,
        cm: c.cm_delta * deflection,
    }
}

/// Lift, drag and moment coefficients over the full ±180° range.
///
/// Attached-flow model between the stall angles, flat plate beyond, linear
/// blend in coefficient space over `stall ± blend` at both stall angles. The
/// control-surface increments are added on top, so a flap keeps its
/// authority on a stalled segment.
pub fn airfoil_coefficients(s: &AirfoilSegmentParams, alpha: f64, deflection: f64) -> Coefficients {
    let pos_lo = s.stall_pos - s.blend;
    let pos_hi = s.stall_pos + s.blend;
    let neg_lo = s.stall_neg - s.blend;
    let neg_hi = s.stall_neg + s.blend;
    let base = if alpha >= pos_hi || alpha <= neg_lo {
        flat_plate_coefficients(s, alpha)
    } else if alpha > pos_lo {
        let t = (alpha - pos_lo) / (pos_hi - pos_lo);
        Coefficients::blend(pre_stall_coefficients(s, alpha), flat_plate_coefficients(s, alpha), t)
    } else if alpha < neg_hi {
        let t = (neg_hi - alpha) / (neg_hi - neg_lo);
        Coefficients::blend(pre_stall_coefficients(s, alpha), flat_plate_coefficients(s, alpha), t)
    } else {
        pre_stall_coefficients(s, alpha)
    };
    let d = deflection_increments(s, deflection);
    Coefficients {
        cl: base.cl + d.cl,
        cd: base.cd + d.cd,
        cm: base.cm + d.cm,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentWrench {
    pub wrench: Wrench,
    pub alpha: f64,
}

/// Lift, drag and quarter-chord moment of one airfoil segment, transported to
/// the CG.
pub fn segment_wrench(
    s: &AirfoilSegmentParams,
    pose: &SegmentPose,
    flow: &LocalFlow,
    deflection: f64,
    rho: f64,
) -> SegmentWrench {
    let sf = flow.segment_flow(&pose.frame);
    if sf.speed <= 0.0 {
        return SegmentWrench {
            wrench: Wrench::ZERO,
            alpha: sf.alpha,
        };
    }
    let c = airfoil_coefficients(s, sf.alpha, deflection);
    let q_area = 0.5 * rho * sf.speed * sf.speed * s.chord * s.span;
    let force = sf.lift_dir * (c.cl * q_area) + sf.drag_dir * (c.cd * q_area);
    let ey = pose.frame.column(1).into_owned();
    let pitching = ey * (c.cm * q_area * s.chord);
    SegmentWrench {
        wrench: Wrench::new(force, pitching + pose.position.cross(&force)),
        alpha: sf.alpha,
    }
}

/// Quadratic drag of the fuselage; no moment.
pub fn fuselage_wrench(v_air_body: &Vec3, f: &FuselageParams, rho: f64) -> Wrench {
    let sq = |x: f64| x * x.abs();
    let force = -Vec3::new(f.cd_x * sq(v_air_body.x), f.cd_y * sq(v_air_body.y), f.cd_z * sq(v_air_body.z))
        * (rho / 2.0);
    Wrench::new(force, Vec3::zeros())
}

/// Net aerodynamic wrench for a state, actuation and inertial wind.
pub fn total_wrench(
    state: &RigidBodyState,
    act: &ActuatorSet,
    p: &VehicleParams,
    wind: &Vec3,
) -> ForceMoment {
    let v_air_body = state.air_velocity_body(wind);
    let geometry = Geometry::new(p, act.wing_tilt, act.tail_tilt(&p.actuators));
    wrench_with_geometry(&geometry, &v_air_body, &state.omega, act, p)
}

/// [`total_wrench`] for a precomputed geometry and body-frame airspeed.
pub fn wrench_with_geometry(
    geometry: &Geometry,
    v_air_body: &Vec3,
    omega: &Vec3,
    act: &ActuatorSet,
    p: &VehicleParams,
) -> ForceMoment {
    let rho = p.air_density;
    let mut breakdown = Vec::with_capacity(p.propellers.len() + p.segments.len() + 1);
    let mut slipstream = [Vec3::zeros(); 3];

    for prop in &p.propellers {
        let pose = geometry.prop(prop.role);
        let flow = local_airspeed(&pose.position, v_air_body, omega, None);
        let out = propeller_wrench(prop, pose, act.prop_speed(prop), &flow, rho);
        slipstream[prop.role.index()] =
            induced_velocity(prop, &pose.axis, out.thrust, out.inflow.axial, rho);
        breakdown.push(Contribution {
            source: Source::Propeller(prop.role),
            wrench: out.wrench,
            flow,
            alpha: None,
            thrust: Some(out.thrust),
        });
    }

    for (i, (seg, pose)) in p.segments.iter().zip(&geometry.segments).enumerate() {
        let w = seg.slipstream.map(|role| slipstream[role.index()]);
        let flow = local_airspeed(&pose.position, v_air_body, omega, w.as_ref());
        let deflection = act.surface_deflection(seg.surface, &p.actuators);
        let out = segment_wrench(seg, pose, &flow, deflection, rho);
        breakdown.push(Contribution {
            source: Source::Segment(i),
            wrench: out.wrench,
            flow,
            alpha: Some(out.alpha),
            thrust: None,
        });
    }

    breakdown.push(Contribution {
        source: Source::Fuselage,
        wrench: fuselage_wrench(v_air_body, &p.fuselage, rho),
        flow: LocalFlow {
            velocity: *v_air_body,
        },
        alpha: None,
        thrust: None,
    });

    let total = breakdown.iter().fold(Wrench::ZERO, |acc, c| acc + c.wrench);
    ForceMoment {
        force: total.force,
        moment: total.moment,
        breakdown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{from_euler, DEG};
    use crate::vehicle::Actuator;

    fn prop(d: f64, ct0: f64) -> PropellerParams {
        PropellerParams {
            role: PropRole::Left,
            position: [0.0; 3],
            axis: [1.0, 0.0, 0.0],
            diameter: d,
            ct0,
            ct1: -0.1,
            cq0: 0.005,
            cq1: -0.003,
            normal_force: 5e-4,
            spin: 1.0,
            max_speed: 150.0,
        }
    }

    fn pose_x() -> PropPose {
        PropPose {
            position: Vec3::new(0.1, -0.2, 0.0),
            axis: Vec3::x(),
        }
    }

    #[test]
    fn local_airspeed_identity_without_rotation() {
        let v = Vec3::new(3.0, -1.0, 2.0);
        let f = local_airspeed(&Vec3::new(0.4, 0.1, 0.0), &v, &Vec3::zeros(), None);
        assert_eq!(f.velocity, v);
    }

    #[test]
    fn local_airspeed_cross_product_and_slipstream() {
        let r = Vec3::new(1.0, 0.0, 0.0);
        let w = Vec3::new(0.0, 1.0, 0.0);
        let f = local_airspeed(&r, &Vec3::zeros(), &w, None);
        assert_eq!(f.velocity, Vec3::new(0.0, 0.0, -1.0));
        let s = Vec3::new(5.0, 0.0, 0.0);
        let f = local_airspeed(&r, &Vec3::zeros(), &w, Some(&s));
        assert_eq!(f.velocity, Vec3::new(5.0, 0.0, -1.0));
    }

    #[test]
    fn inflow_decomposition_is_orthonormal() {
        let f = LocalFlow {
            velocity: Vec3::new(3.0, 4.0, -2.0),
        };
        let axis = Vec3::new(0.6, 0.0, -0.8);
        let i = f.propeller_inflow(&axis);
        assert!(i.radial >= 0.0);
        assert!(i.radial_dir.dot(&axis).abs() < 1e-14);
        assert!((i.radial_dir.norm() - 1.0).abs() < 1e-14);
        let back = axis * i.axial + i.radial_dir * i.radial;
        assert!((back - f.velocity).norm() < 1e-14);
    }

    #[test]
    fn zero_speed_propeller_is_inert() {
        let flow = LocalFlow {
            velocity: Vec3::new(10.0, 2.0, 1.0),
        };
        let out = propeller_wrench(&prop(0.28, 0.09), &pose_x(), 0.0, &flow, 1.225);
        assert_eq!(out.wrench, Wrench::ZERO);
    }

    #[test]
    fn static_thrust_hand_value() {
        // 1.225 · 100² · 0.3⁴ · 0.09
        let out = propeller_wrench(&prop(0.3, 0.09), &pose_x(), 100.0, &LocalFlow::default(), 1.225);
        assert!((out.thrust - 8.930_25).abs() < 1e-9);
        assert!((out.wrench.force - Vec3::x() * out.thrust).norm() < 1e-12);
    }

    #[test]
    fn spin_flip_negates_reactive_torque_only() {
        let mut p = prop(0.28, 0.09);
        let pose = PropPose {
            position: Vec3::zeros(),
            axis: Vec3::x(),
        };
        let flow = LocalFlow {
            velocity: Vec3::new(4.0, 1.0, 0.0),
        };
        let a = propeller_wrench(&p, &pose, 90.0, &flow, 1.225);
        p.spin = -1.0;
        let b = propeller_wrench(&p, &pose, 90.0, &flow, 1.225);
        assert_eq!(a.thrust, b.thrust);
        assert_eq!(a.wrench.force, b.wrench.force);
        assert!((a.wrench.moment + b.wrench.moment).norm() < 1e-15);
    }

    #[test]
    fn advance_ratio_clamp_prevents_reverse_thrust() {
        let p = prop(0.28, 0.09);
        let flow = LocalFlow {
            velocity: Vec3::new(60.0, 0.0, 0.0),
        };
        let out = propeller_wrench(&p, &pose_x(), 50.0, &flow, 1.225);
        assert!(out.thrust >= 0.0);
        assert!(out.thrust.abs() < 1e-12);
    }

    #[test]
    fn speed_polynomial_matches_direct_evaluation() {
        let p = prop(0.28, 0.09);
        let pose = pose_x();
        let flow = LocalFlow {
            velocity: Vec3::new(6.0, 1.5, -2.0),
        };
        let (a, b) = propeller_speed_polynomial(&p, &pose, &flow, 1.225);
        for eta in [60.0, 100.0, 150.0] {
            let direct = propeller_wrench(&p, &pose, eta, &flow, 1.225).wrench;
            let poly = a * (eta * eta) + b * eta;
            assert!((direct.force - poly.force).norm() < 1e-10);
            assert!((direct.moment - poly.moment).norm() < 1e-10);
        }
    }

    #[test]
    fn induced_velocity_cases() {
        let p = prop(0.3, 0.09);
        let a = p.disk_area();
        let w = induced_velocity(&p, &Vec3::x(), 10.0, 0.0, 1.225);
        let expected = (10.0 / (2.0 * 1.225 * a)).sqrt();
        assert!((w.norm() - expected).abs() < 1e-12);
        // momentum-theory value for T = 10 N, D = 0.3 m
        assert!((w.norm() - 7.60).abs() < 5e-3);
        assert_eq!(induced_velocity(&p, &Vec3::x(), 0.0, 5.0, 1.225), Vec3::zeros());
        assert_eq!(induced_velocity(&p, &Vec3::x(), -3.0, 5.0, 1.225), Vec3::zeros());
        let descent = induced_velocity(&p, &Vec3::x(), 10.0, -4.0, 1.225);
        assert!(descent.x > 0.0 && descent.x.is_finite());
    }

    fn wing_segment() -> AirfoilSegmentParams {
        VehicleParams::reference().segments[1].clone()
    }

    #[test]
    fn flat_plate_reference_angles() {
        let s = wing_segment();
        let c = airfoil_coefficients(&s, core::f64::consts::FRAC_PI_4, 0.0);
        assert!((c.cl - s.flat_plate.cl_45).abs() < 1e-15);
        let c = airfoil_coefficients(&s, core::f64::consts::FRAC_PI_2, 0.0);
        assert!((c.cd - s.flat_plate.cd_90).abs() < 1e-15);
    }

    #[test]
    fn symmetric_section_at_zero_alpha() {
        let s = wing_segment();
        let c = airfoil_coefficients(&s, 0.0, 0.0);
        assert_eq!(c.cl, 0.0);
        assert_eq!(c.cm, 0.0);
    }

    #[test]
    fn coefficients_continuous_at_blend_edges() {
        let s = wing_segment();
        let edges = [
            s.stall_pos - s.blend,
            s.stall_pos + s.blend,
            s.stall_neg - s.blend,
            s.stall_neg + s.blend,
        ];
        for e in edges {
            for defl in [0.0, 0.3, -0.2] {
                let lo = airfoil_coefficients(&s, e - 1e-15, defl);
                let hi = airfoil_coefficients(&s, e + 1e-15, defl);
                assert!((lo.cl - hi.cl).abs() < 1e-12, "cl jump at {e}");
                assert!((lo.cd - hi.cd).abs() < 1e-12, "cd jump at {e}");
                assert!((lo.cm - hi.cm).abs() < 1e-12, "cm jump at {e}");
            }
        }
        let a = airfoil_coefficients(&s, -core::f64::consts::PI, 0.0);
        let b = airfoil_coefficients(&s, core::f64::consts::PI, 0.0);
        assert!((a.cl - b.cl).abs() < 1e-12 && (a.cd - b.cd).abs() < 1e-12 && (a.cm - b.cm).abs() < 1e-12);
    }

    fn straight_pose() -> SegmentPose {
        SegmentPose {
            position: Vec3::new(0.0, 0.3, 0.0),
            frame: Mat3::identity(),
        }
    }

    #[test]
    fn segment_without_flow_is_inert() {
        let out = segment_wrench(&wing_segment(), &straight_pose(), &LocalFlow::default(), 0.1, 1.225);
        assert_eq!(out.wrench, Wrench::ZERO);
    }

    #[test]
    fn segment_wrench_scales_with_speed_squared() {
        let s = wing_segment();
        let f1 = LocalFlow {
            velocity: Vec3::new(8.0, 0.5, 1.0),
        };
        let f2 = LocalFlow {
            velocity: f1.velocity * 2.0,
        };
        let a = segment_wrench(&s, &straight_pose(), &f1, 0.1, 1.225).wrench;
        let b = segment_wrench(&s, &straight_pose(), &f2, 0.1, 1.225).wrench;
        assert!((b.force - a.force * 4.0).norm() < 1e-12);
        assert!((b.moment - a.moment * 4.0).norm() < 1e-12);
    }

    #[test]
    fn zero_alpha_symmetric_segment_only_drags() {
        let s = wing_segment();
        let f = LocalFlow {
            velocity: Vec3::new(10.0, 0.0, 0.0),
        };
        let out = segment_wrench(&s, &straight_pose(), &f, 0.0, 1.225).wrench;
        // ½ρV² c Δy C_D0 against e_x
        let expected = 0.5 * 1.225 * 100.0 * s.chord * s.span * s.pre_stall.cd0;
        assert!((out.force - Vec3::new(-expected, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn positive_alpha_lifts_upwards() {
        let s = wing_segment();
        let f = LocalFlow {
            velocity: Vec3::new(10.0, 0.0, 1.0),
        };
        let out = segment_wrench(&s, &straight_pose(), &f, 0.0, 1.225).wrench;
        assert!(out.force.z < 0.0);
    }

    #[test]
    fn fuselage_cases() {
        let f = FuselageParams {
            cd_x: 0.05,
            cd_y: 0.1,
            cd_z: 0.2,
        };
        assert_eq!(fuselage_wrench(&Vec3::zeros(), &f, 1.225), Wrench::ZERO);
        let a = fuselage_wrench(&Vec3::new(2.0, 0.0, 0.0), &f, 1.225);
        assert!((a.force.x + 0.1225).abs() < 1e-15);
        let b = fuselage_wrench(&Vec3::new(-2.0, 0.0, 0.0), &f, 1.225);
        assert_eq!(a.force.x, -b.force.x);
        assert_eq!(a.moment, Vec3::zeros());
    }

    fn hover_state() -> RigidBodyState {
        RigidBodyState::default()
    }

    #[test]
    fn idle_vehicle_at_rest_has_no_wrench() {
        let p = VehicleParams::reference();
        let fm = total_wrench(&hover_state(), &ActuatorSet::default(), &p, &Vec3::zeros());
        assert_eq!(fm.force, Vec3::zeros());
        assert_eq!(fm.moment, Vec3::zeros());
    }

    #[test]
    fn symmetric_state_has_no_lateral_wrench() {
        let p = VehicleParams::reference();
        let mut s = hover_state();
        s.attitude = from_euler(0.0, 0.1, 0.0);
        s.velocity = Vec3::new(12.0, 0.0, 1.0);
        s.omega = Vec3::new(0.0, 0.3, 0.0);
        let act = ActuatorSet::default()
            .with(Actuator::Wing, 0.3)
            .with(Actuator::ThrottleLeft, 0.6)
            .with(Actuator::ThrottleRight, 0.6)
            .with(Actuator::AileronLeft, 0.2)
            .with(Actuator::AileronRight, -0.2)
            .with(Actuator::Elevator, -0.3)
            .settled(&p.actuators);
        let fm = total_wrench(&s, &act, &p, &Vec3::zeros());
        assert!(fm.force.y.abs() < 1e-9);
        assert!(fm.moment.x.abs() < 1e-9);
        assert!(fm.moment.z.abs() < 1e-9);
    }

    #[test]
    fn breakdown_sums_to_total() {
        let p = VehicleParams::reference();
        let mut s = hover_state();
        s.velocity = Vec3::new(7.0, 1.0, -0.5);
        s.omega = Vec3::new(0.2, -0.1, 0.3);
        let act = ActuatorSet::default()
            .with(Actuator::Wing, 0.6)
            .with(Actuator::ThrottleLeft, 0.7)
            .with(Actuator::ThrottleRight, 0.5)
            .with(Actuator::ThrottleTail, 0.4)
            .with(Actuator::Rudder, 0.3)
            .with(Actuator::TailTilt, -0.5)
            .settled(&p.actuators);
        let fm = total_wrench(&s, &act, &p, &Vec3::new(1.0, 0.0, 0.0));
        let sum = fm.partial_sum(|_| true);
        assert!((sum.force - fm.force).norm() <= 1e-9 * fm.force.norm().max(1.0));
        assert!((sum.moment - fm.moment).norm() <= 1e-9 * fm.moment.norm().max(1.0));
    }

    #[test]
    fn unbinding_slipstream_matches_free_stream_when_props_idle() {
        let mut p = VehicleParams::reference();
        let mut s = hover_state();
        s.velocity = Vec3::new(9.0, 0.0, 0.5);
        let act = ActuatorSet::default().with(Actuator::Wing, 0.2).settled(&p.actuators);
        let bound = total_wrench(&s, &act, &p, &Vec3::zeros());
        for seg in &mut p.segments {
            seg.slipstream = None;
        }
        let free = total_wrench(&s, &act, &p, &Vec3::zeros());
        assert_eq!(bound.force, free.force);
        assert_eq!(bound.moment, free.moment);
    }

    #[test]
    fn hover_thrust_balance() {
        // 1-D oracle: ρη²D⁴C_T0 per main prop with the tail off, wing vertical.
        let p = VehicleParams::reference();
        let main = p.propeller(PropRole::Left);
        let rho = p.air_density;
        let t_each = p.weight() / 2.0;
        let eta = (t_each / (rho * main.diameter.powi(4) * main.ct0)).sqrt();
        let delta = eta / main.max_speed;
        let act = ActuatorSet::default()
            .with(Actuator::Wing, 1.0)
            .with(Actuator::ThrottleLeft, delta)
            .with(Actuator::ThrottleRight, delta)
            .settled(&p.actuators);
        assert!((act.wing_tilt - 90.0 * DEG).abs() < 1e-12);
        let fm = total_wrench(&hover_state(), &act, &p, &Vec3::zeros());
        let fz_inertial = fm.force.z;
        // only slipstream drag on the immersed wing segments separates the two
        assert!((fz_inertial + p.weight()).abs() < 0.02 * p.weight());
        assert!(fz_inertial + p.weight() > 0.0);
    }
}

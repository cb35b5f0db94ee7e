//! Physical description of the vehicle and its actuators.
//!
//! Everything here is plain data so it can be (de)serialized as a config file.
//! Vectors are stored as arrays; the aero code converts them on use.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::math::{mat3, rot_x, rot_y, vec3, Mat3, Vec3, DEG};

/// Below this speed [rev/s] the advance ratio is taken as zero.
pub const MIN_PROP_SPEED: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid parameter `{field}`: {reason}")]
pub struct ParamError {
    pub field: String,
    pub reason: String,
}

impl ParamError {
    fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PropRole {
    /// Left main propeller, mounted on the tilting wing.
    Left,
    /// Right main propeller, mounted on the tilting wing.
    Right,
    /// Tail propeller; its axis tilts about the body x axis.
    Tail,
}

impl PropRole {
    pub const ALL: [PropRole; 3] = [PropRole::Left, PropRole::Right, PropRole::Tail];

    pub fn index(self) -> usize {
        match self {
            PropRole::Left => 0,
            PropRole::Right => 1,
            PropRole::Tail => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PropRole::Left => "pl",
            PropRole::Right => "pr",
            PropRole::Tail => "pt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Mount {
    /// Fixed to the fuselage; coordinates are body-frame.
    Body,
    /// Tilts with the wing; coordinates are relative to the wing pivot in the
    /// wing frame (equal to the body frame at zero tilt).
    Wing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Surface {
    None,
    AileronLeft,
    AileronRight,
    Elevator,
    Rudder,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PropellerParams {
    pub role: PropRole,
    /// Hub position [m]. Wing-frame relative to the pivot for the main
    /// propellers, body frame for the tail propeller.
    pub position: [f64; 3],
    /// Forward (thrust) axis at zero wing / tail tilt.
    pub axis: [f64; 3],
    /// Diameter [m].
    pub diameter: f64,
    /// `C_T(J) = ct0 + ct1 J`
    pub ct0: f64,
    pub ct1: f64,
    /// `C_Q(J) = cq0 + cq1 J`
    pub cq0: f64,
    pub cq1: f64,
    /// Lumped normal-force constant [N·s²/(rev·m)].
    pub normal_force: f64,
    /// +1 if the propeller turns positively about its forward axis.
    pub spin: f64,
    /// Speed at full throttle [rev/s]; the throttle map is `η = δ η_max`.
    pub max_speed: f64,
}

impl PropellerParams {
    /// Advance ratio clamped to the range where `C_T >= 0`.
    pub fn advance_ratio(&self, axial_speed: f64, speed: f64) -> f64 {
        if speed < MIN_PROP_SPEED {
            return 0.0;
        }
        let j = axial_speed / (speed * self.diameter);
        j.max(0.0).min(self.max_advance_ratio())
    }

    pub fn max_advance_ratio(&self) -> f64 {
        if self.ct1 < 0.0 {
            -self.ct0 / self.ct1
        } else {
            f64::INFINITY
        }
    }

    pub fn thrust_coefficient(&self, j: f64) -> f64 {
        self.ct0 + self.ct1 * j
    }

    pub fn torque_coefficient(&self, j: f64) -> f64 {
        self.cq0 + self.cq1 * j
    }

    pub fn disk_area(&self) -> f64 {
        core::f64::consts::PI * self.diameter * self.diameter / 4.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PreStallCoefficients {
    pub cl0: f64,
    pub cl_alpha: f64,
    pub cl_delta: f64,
    pub cd0: f64,
    pub cd_alpha2: f64,
    /// Quadratic drag of the control-surface deflection.
    #[cfg_attr(feature = "serde", serde(default))]
    pub cd_delta2: f64,
    pub cm0: f64,
    pub cm_alpha: f64,
    pub cm_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FlatPlateCoefficients {
    /// Lift coefficient at 45°.
    pub cl_45: f64,
    pub cd_min: f64,
    /// Drag coefficient broadside to the flow.
    pub cd_90: f64,
    pub cm_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AirfoilSegmentParams {
    pub name: String,
    pub mount: Mount,
    /// Center of pressure [m] in mount coordinates.
    pub position: [f64; 3],
    /// Rotation of the segment frame about its chord (x) axis [rad];
    /// `-pi/2` turns a horizontal segment into a vertical fin.
    pub roll: f64,
    /// Incidence about the segment span axis [rad].
    pub incidence: f64,
    pub chord: f64,
    pub span: f64,
    pub pre_stall: PreStallCoefficients,
    pub stall_neg: f64,
    pub stall_pos: f64,
    /// Half-width of the stall blend band [rad].
    pub blend: f64,
    pub flat_plate: FlatPlateCoefficients,
    pub surface: Surface,
    /// Propeller whose slipstream immerses this segment.
    pub slipstream: Option<PropRole>,
}

impl AirfoilSegmentParams {
    /// Segment frame in mount coordinates; columns are `(e_x, e_y, e_z)`.
    pub fn local_frame(&self) -> Mat3 {
        rot_x(self.roll) * rot_y(self.incidence)
    }

    /// True when `alpha` is outside the attached-flow interval.
    pub fn is_stalled(&self, alpha: f64) -> bool {
        alpha <= self.stall_neg || alpha >= self.stall_pos
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FuselageParams {
    /// Lumped drag coefficient × area per body axis [m²].
    pub cd_x: f64,
    pub cd_y: f64,
    pub cd_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct WingParams {
    /// Tilt pivot [m], body frame.
    pub pivot: [f64; 3],
    /// Tip-to-tip span [m].
    pub span: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ActuatorLimits {
    /// Wing tilt at full command [rad]; zero command is cruise.
    pub wing_tilt_max: f64,
    /// Time for a full tilt up (towards hover) [s].
    pub tilt_up_time: f64,
    /// Time for a full tilt down [s].
    pub tilt_down_time: f64,
    pub aileron_max: f64,
    pub elevator_max: f64,
    pub rudder_max: f64,
    pub tail_tilt_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct VehicleParams {
    pub mass: f64,
    /// Body-frame inertia tensor [kg·m²], row-major.
    pub inertia: [[f64; 3]; 3],
    /// Inertial gravity vector [m/s²].
    pub gravity: [f64; 3],
    pub air_density: f64,
    pub wing: WingParams,
    pub actuators: ActuatorLimits,
    pub fuselage: FuselageParams,
    pub propellers: Vec<PropellerParams>,
    pub segments: Vec<AirfoilSegmentParams>,
}

impl VehicleParams {
    pub fn inertia_matrix(&self) -> Mat3 {
        mat3(self.inertia)
    }

    pub fn gravity_vector(&self) -> Vec3 {
        vec3(self.gravity)
    }

    pub fn propeller(&self, role: PropRole) -> &PropellerParams {
        self.propellers
            .iter()
            .find(|p| p.role == role)
            .expect("validated params carry every propeller role")
    }

    /// Total weight force magnitude [N].
    pub fn weight(&self) -> f64 {
        self.mass * self.gravity_vector().norm()
    }

    /// Checks every invariant; the error names the offending field.
    pub fn validate(&self) -> Result<(), ParamError> {
        fn positive(field: &str, v: f64) -> Result<(), ParamError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ParamError::new(field, format!("must be > 0, got {v}")))
            }
        }
        fn non_negative(field: &str, v: f64) -> Result<(), ParamError> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(ParamError::new(field, format!("must be >= 0, got {v}")))
            }
        }
        fn finite(field: &str, v: &[f64]) -> Result<(), ParamError> {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(ParamError::new(field, "must be finite"))
            }
        }

        positive("mass", self.mass)?;
        positive("air_density", self.air_density)?;
        finite("gravity", &self.gravity)?;
        for row in &self.inertia {
            finite("inertia", row)?;
        }
        let inertia = self.inertia_matrix();
        if (inertia - inertia.transpose()).abs().max() > 1e-12 * inertia.abs().max() {
            return Err(ParamError::new("inertia", "must be symmetric"));
        }
        if inertia.cholesky().is_none() {
            return Err(ParamError::new("inertia", "must be positive definite"));
        }

        finite("wing.pivot", &self.wing.pivot)?;
        positive("wing.span", self.wing.span)?;

        let a = &self.actuators;
        positive("actuators.wing_tilt_max", a.wing_tilt_max)?;
        positive("actuators.tilt_up_time", a.tilt_up_time)?;
        positive("actuators.tilt_down_time", a.tilt_down_time)?;
        positive("actuators.aileron_max", a.aileron_max)?;
        positive("actuators.elevator_max", a.elevator_max)?;
        positive("actuators.rudder_max", a.rudder_max)?;
        positive("actuators.tail_tilt_max", a.tail_tilt_max)?;

        non_negative("fuselage.cd_x", self.fuselage.cd_x)?;
        non_negative("fuselage.cd_y", self.fuselage.cd_y)?;
        non_negative("fuselage.cd_z", self.fuselage.cd_z)?;

        if self.propellers.len() != 3 {
            return Err(ParamError::new(
                "propellers",
                format!("expected exactly 3 propellers, got {}", self.propellers.len()),
            ));
        }
        for role in PropRole::ALL {
            let count = self.propellers.iter().filter(|p| p.role == role).count();
            if count != 1 {
                return Err(ParamError::new(
                    "propellers",
                    format!("expected one `{}` propeller, got {count}", role.name()),
                ));
            }
        }
        for (i, p) in self.propellers.iter().enumerate() {
            let f = |name: &str| format!("propellers[{i}].{name}");
            finite(&f("position"), &p.position)?;
            finite(&f("axis"), &p.axis)?;
            if (vec3(p.axis).norm() - 1.0).abs() > 1e-9 {
                return Err(ParamError::new(f("axis"), "must be a unit vector"));
            }
            positive(&f("diameter"), p.diameter)?;
            positive(&f("ct0"), p.ct0)?;
            finite(&f("ct1"), &[p.ct1, p.cq0, p.cq1])?;
            positive(&f("normal_force"), p.normal_force)?;
            positive(&f("max_speed"), p.max_speed)?;
            if p.spin != 1.0 && p.spin != -1.0 {
                return Err(ParamError::new(f("spin"), "must be +1 or -1"));
            }
        }

        if self.segments.is_empty() {
            return Err(ParamError::new("segments", "at least one segment required"));
        }
        for (i, s) in self.segments.iter().enumerate() {
            let f = |name: &str| format!("segments[{i}].{name}");
            finite(&f("position"), &s.position)?;
            finite(&f("roll"), &[s.roll, s.incidence])?;
            positive(&f("chord"), s.chord)?;
            positive(&f("span"), s.span)?;
            let c = &s.pre_stall;
            finite(
                &f("pre_stall"),
                &[c.cl0, c.cl_alpha, c.cl_delta, c.cd0, c.cd_alpha2, c.cd_delta2, c.cm0, c.cm_alpha, c.cm_delta],
            )?;
            if !(s.stall_neg < 0.0 && s.stall_pos > 0.0) {
                return Err(ParamError::new(
                    f("stall_neg"),
                    "stall angles must satisfy stall_neg < 0 < stall_pos",
                ));
            }
            positive(&f("blend"), s.blend)?;
            if s.stall_neg + s.blend >= s.stall_pos - s.blend {
                return Err(ParamError::new(f("blend"), "blend bands overlap"));
            }
            if s.stall_neg - s.blend <= -core::f64::consts::PI
                || s.stall_pos + s.blend >= core::f64::consts::PI
            {
                return Err(ParamError::new(f("blend"), "blend band exceeds ±pi"));
            }
            let fp = &s.flat_plate;
            non_negative(&f("flat_plate.cl_45"), fp.cl_45)?;
            non_negative(&f("flat_plate.cd_min"), fp.cd_min)?;
            non_negative(&f("flat_plate.cd_90"), fp.cd_90)?;
            non_negative(&f("flat_plate.cm_max"), fp.cm_max)?;
            if let Some(role) = s.slipstream {
                if role == PropRole::Tail && s.mount == Mount::Wing {
                    return Err(ParamError::new(
                        f("slipstream"),
                        "wing segments can only be immersed by a main propeller",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Reference parameter set for a 1.9 kg, 0.94 m span tiltwing.
    ///
    /// Mass and span are measured values; propeller and airfoil constants are
    /// textbook estimates that have not been identified on the airframe.
    pub fn reference() -> Self {
        let wing_airfoil = PreStallCoefficients {
            cl0: 0.0,
            cl_alpha: 4.5,
            cl_delta: 1.8,
            cd0: 0.02,
            cd_alpha2: 1.0,
            cd_delta2: 1.0,
            cm0: 0.0,
            cm_alpha: 0.0,
            cm_delta: -0.4,
        };
        let tail_airfoil = PreStallCoefficients {
            cl0: 0.0,
            cl_alpha: 3.5,
            cl_delta: 2.0,
            cd0: 0.02,
            cd_alpha2: 0.8,
            cd_delta2: 1.0,
            cm0: 0.0,
            cm_alpha: 0.0,
            cm_delta: -0.3,
        };
        let flat_plate = FlatPlateCoefficients {
            cl_45: 1.0,
            cd_min: 0.02,
            cd_90: 1.2,
            cm_max: 0.4,
        };
        let segment = |name: &str,
                       mount: Mount,
                       position: [f64; 3],
                       chord: f64,
                       span: f64,
                       airfoil: PreStallCoefficients,
                       surface: Surface,
                       slipstream: Option<PropRole>| AirfoilSegmentParams {
            name: name.to_string(),
            mount,
            position,
            roll: 0.0,
            incidence: 0.0,
            chord,
            span,
            pre_stall: airfoil,
            stall_neg: -16.0 * DEG,
            stall_pos: 16.0 * DEG,
            blend: 5.0 * DEG,
            flat_plate,
            surface,
            slipstream,
        };

        let mut segments = Vec::new();
        // Four segments per half-wing; the middle two sit in the slipstream.
        let wing_y = [0.085, 0.195, 0.305, 0.415];
        for (side, sign, prop, aileron) in [
            ("l", -1.0, PropRole::Left, Surface::AileronLeft),
            ("r", 1.0, PropRole::Right, Surface::AileronRight),
        ] {
            for (k, y) in wing_y.iter().enumerate() {
                let immersed = k == 1 || k == 2;
                segments.push(segment(
                    &format!("wing_{side}{}", k + 1),
                    Mount::Wing,
                    [0.0, sign * y, 0.0],
                    0.18,
                    0.11,
                    wing_airfoil,
                    if k == 0 { Surface::None } else { aileron },
                    if immersed { Some(prop) } else { None },
                ));
            }
        }
        segments.push(segment(
            "htail_l",
            Mount::Body,
            [-0.55, -0.10, 0.0],
            0.11,
            0.12,
            tail_airfoil,
            Surface::Elevator,
            None,
        ));
        segments.push(segment(
            "htail_c",
            Mount::Body,
            [-0.55, 0.0, 0.0],
            0.11,
            0.08,
            tail_airfoil,
            Surface::Elevator,
            Some(PropRole::Tail),
        ));
        segments.push(segment(
            "htail_r",
            Mount::Body,
            [-0.55, 0.10, 0.0],
            0.11,
            0.12,
            tail_airfoil,
            Surface::Elevator,
            None,
        ));
        let mut fin = segment(
            "vtail",
            Mount::Body,
            [-0.56, 0.0, -0.09],
            0.12,
            0.14,
            PreStallCoefficients {
                cl_alpha: 3.0,
                cl_delta: 1.8,
                ..tail_airfoil
            },
            Surface::Rudder,
            None,
        );
        fin.roll = -90.0 * DEG;
        segments.push(fin);

        let main = |role, y: f64, spin| PropellerParams {
            role,
            position: [0.17, y, 0.0],
            axis: [1.0, 0.0, 0.0],
            diameter: 0.28,
            ct0: 0.09,
            ct1: -0.10,
            cq0: 0.005,
            cq1: -0.003,
            normal_force: 5e-4,
            spin,
            max_speed: 150.0,
        };

        Self {
            mass: 1.9,
            inertia: [[0.030, 0.0, 0.0], [0.0, 0.060, 0.0], [0.0, 0.0, 0.080]],
            gravity: [0.0, 0.0, 9.81],
            air_density: 1.225,
            wing: WingParams {
                pivot: [0.02, 0.0, -0.04],
                span: 0.94,
            },
            actuators: ActuatorLimits {
                wing_tilt_max: 90.0 * DEG,
                tilt_up_time: 5.0,
                tilt_down_time: 10.0,
                aileron_max: 25.0 * DEG,
                elevator_max: 25.0 * DEG,
                rudder_max: 25.0 * DEG,
                tail_tilt_max: 30.0 * DEG,
            },
            fuselage: FuselageParams {
                cd_x: 0.004,
                cd_y: 0.03,
                cd_z: 0.04,
            },
            propellers: vec![
                main(PropRole::Left, -0.22, 1.0),
                main(PropRole::Right, 0.22, -1.0),
                PropellerParams {
                    role: PropRole::Tail,
                    position: [-0.58, 0.0, -0.02],
                    axis: [0.0, 0.0, -1.0],
                    diameter: 0.15,
                    ct0: 0.10,
                    ct1: -0.12,
                    cq0: 0.006,
                    cq1: -0.004,
                    normal_force: 2e-4,
                    spin: 1.0,
                    max_speed: 220.0,
                },
            ],
            segments,
        }
    }
}

/// Index of each normalized command inside [`ActuatorSet::commands`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Actuator {
    Wing,
    ThrottleLeft,
    ThrottleRight,
    ThrottleTail,
    AileronLeft,
    AileronRight,
    Elevator,
    Rudder,
    TailTilt,
}

impl Actuator {
    pub const ALL: [Actuator; 9] = [
        Actuator::Wing,
        Actuator::ThrottleLeft,
        Actuator::ThrottleRight,
        Actuator::ThrottleTail,
        Actuator::AileronLeft,
        Actuator::AileronRight,
        Actuator::Elevator,
        Actuator::Rudder,
        Actuator::TailTilt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Actuator::Wing => "w",
            Actuator::ThrottleLeft => "pl",
            Actuator::ThrottleRight => "pr",
            Actuator::ThrottleTail => "pt",
            Actuator::AileronLeft => "al",
            Actuator::AileronRight => "ar",
            Actuator::Elevator => "e",
            Actuator::Rudder => "r",
            Actuator::TailTilt => "tt",
        }
    }

    /// Admissible command range.
    pub fn range(self) -> (f64, f64) {
        match self {
            Actuator::Wing
            | Actuator::ThrottleLeft
            | Actuator::ThrottleRight
            | Actuator::ThrottleTail => (0.0, 1.0),
            _ => (-1.0, 1.0),
        }
    }
}

/// Normalized commands for all nine actuators plus the physical wing tilt.
///
/// Throttles, surfaces and the tail tilt follow their commands instantly; the
/// wing tilt is rate limited (see [`apply_actuator_rates`]). Aileron commands
/// are signed so that positive values on either side roll right, i.e. equal
/// trailing-edge-down deflection on both sides is `al = -ar`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorSet {
    pub commands: [f64; 9],
    /// Physical wing tilt ζ_w [rad]; 0 is cruise, 90° hover.
    pub wing_tilt: f64,
}

impl ActuatorSet {
    pub fn get(&self, a: Actuator) -> f64 {
        self.commands[a as usize]
    }

    pub fn set(&mut self, a: Actuator, value: f64) {
        self.commands[a as usize] = value;
    }

    pub fn with(mut self, a: Actuator, value: f64) -> Self {
        self.set(a, value);
        self
    }

    /// Actuation with the wing tilt already at its commanded position.
    pub fn settled(mut self, limits: &ActuatorLimits) -> Self {
        self.wing_tilt = self.get(Actuator::Wing).max(0.0).min(1.0) * limits.wing_tilt_max;
        self
    }

    /// Clamps every command into its admissible range.
    pub fn clamped(mut self) -> Self {
        for a in Actuator::ALL {
            let (lo, hi) = a.range();
            self.set(a, self.get(a).max(lo).min(hi));
        }
        self
    }

    pub fn throttle(&self, role: PropRole) -> f64 {
        match role {
            PropRole::Left => self.get(Actuator::ThrottleLeft),
            PropRole::Right => self.get(Actuator::ThrottleRight),
            PropRole::Tail => self.get(Actuator::ThrottleTail),
        }
    }

    /// Propeller speed η [rev/s].
    pub fn prop_speed(&self, p: &PropellerParams) -> f64 {
        self.throttle(p.role).max(0.0).min(1.0) * p.max_speed
    }

    /// Control-surface deflection ζ_cs [rad], trailing edge down positive.
    pub fn surface_deflection(&self, surface: Surface, limits: &ActuatorLimits) -> f64 {
        let c = |a: Actuator| self.get(a).max(-1.0).min(1.0);
        match surface {
            Surface::None => 0.0,
            Surface::AileronLeft => c(Actuator::AileronLeft) * limits.aileron_max,
            Surface::AileronRight => -c(Actuator::AileronRight) * limits.aileron_max,
            Surface::Elevator => c(Actuator::Elevator) * limits.elevator_max,
            Surface::Rudder => c(Actuator::Rudder) * limits.rudder_max,
        }
    }

    pub fn tail_tilt(&self, limits: &ActuatorLimits) -> f64 {
        self.get(Actuator::TailTilt).max(-1.0).min(1.0) * limits.tail_tilt_max
    }

    /// Nominal actuation: attitude effectors centered, tail propeller off,
    /// wing and main throttle as given.
    pub fn nominal(wing: f64, main_throttle: f64, wing_tilt: f64) -> Self {
        let mut out = Self {
            commands: [0.0; 9],
            wing_tilt,
        };
        out.set(Actuator::Wing, wing);
        out.set(Actuator::ThrottleLeft, main_throttle);
        out.set(Actuator::ThrottleRight, main_throttle);
        out
    }
}

/// Advances the actuator states towards `command` over `dt` seconds.
///
/// Commands are clamped to their ranges and taken over immediately except for
/// the wing tilt, which moves towards its target at the tilt-up or tilt-down
/// rate and never overshoots.
pub fn apply_actuator_rates(
    current: &ActuatorSet,
    command: &ActuatorSet,
    limits: &ActuatorLimits,
    dt: f64,
) -> ActuatorSet {
    let mut next = command.clamped();
    let target = next.get(Actuator::Wing) * limits.wing_tilt_max;
    let delta = target - current.wing_tilt;
    let max_step = if delta >= 0.0 {
        limits.wing_tilt_max / limits.tilt_up_time * dt
    } else {
        limits.wing_tilt_max / limits.tilt_down_time * dt
    };
    next.wing_tilt = if delta.abs() <= max_step {
        target
    } else {
        current.wing_tilt + max_step.copysign(delta)
    };
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_params_are_valid() {
        let p = VehicleParams::reference();
        p.validate().unwrap();
        assert_eq!(p.mass, 1.9);
        assert_eq!(p.wing.span, 0.94);
        // four segments per half-wing, three tail-plane segments, one fin
        assert_eq!(p.segments.len(), 12);
        let wing_tip = p
            .segments
            .iter()
            .filter(|s| s.mount == Mount::Wing)
            .map(|s| s.position[1].abs() + s.span / 2.0)
            .fold(0.0, f64::max);
        assert!((wing_tip - 0.47).abs() < 1e-12);
    }

    #[test]
    fn negative_mass_is_rejected() {
        let mut p = VehicleParams::reference();
        p.mass = -1.0;
        let err = p.validate().unwrap_err();
        assert_eq!(err.field, "mass");
    }

    #[test]
    fn missing_tail_propeller_is_rejected() {
        let mut p = VehicleParams::reference();
        p.propellers.pop();
        assert_eq!(p.validate().unwrap_err().field, "propellers");
    }

    #[test]
    fn non_spd_inertia_is_rejected() {
        let mut p = VehicleParams::reference();
        p.inertia[2][2] = -0.1;
        assert_eq!(p.validate().unwrap_err().field, "inertia");
        let mut p = VehicleParams::reference();
        p.inertia[0][1] = 0.01;
        assert_eq!(p.validate().unwrap_err().field, "inertia");
    }

    #[test]
    fn bad_stall_angles_are_rejected() {
        let mut p = VehicleParams::reference();
        p.segments[3].stall_neg = 0.1;
        assert_eq!(p.validate().unwrap_err().field, "segments[3].stall_neg");
    }

    fn limits() -> ActuatorLimits {
        VehicleParams::reference().actuators
    }

    #[test]
    fn tilt_up_rate() {
        let cur = ActuatorSet::default();
        let cmd = ActuatorSet::default().with(Actuator::Wing, 1.0);
        let next = apply_actuator_rates(&cur, &cmd, &limits(), 1.0);
        assert!((next.wing_tilt - 18.0 * DEG).abs() < 1e-12);
    }

    #[test]
    fn tilt_down_rate() {
        let cur = ActuatorSet {
            wing_tilt: 90.0 * DEG,
            ..Default::default()
        };
        let cmd = ActuatorSet::default();
        let next = apply_actuator_rates(&cur, &cmd, &limits(), 1.0);
        assert!((next.wing_tilt - 81.0 * DEG).abs() < 1e-12);
    }

    #[test]
    fn command_equal_to_state_is_fixed_point() {
        let l = limits();
        let cur = ActuatorSet::default()
            .with(Actuator::Wing, 0.5)
            .with(Actuator::Elevator, -0.3)
            .with(Actuator::ThrottleLeft, 0.6)
            .settled(&l);
        let next = apply_actuator_rates(&cur, &cur, &l, 0.004);
        assert_eq!(next, cur);
    }

    #[test]
    fn out_of_range_commands_are_clamped() {
        let cmd = ActuatorSet::default()
            .with(Actuator::ThrottleTail, 1.7)
            .with(Actuator::Rudder, -3.0);
        let next = apply_actuator_rates(&ActuatorSet::default(), &cmd, &limits(), 0.01);
        assert_eq!(next.get(Actuator::ThrottleTail), 1.0);
        assert_eq!(next.get(Actuator::Rudder), -1.0);
    }

    #[test]
    fn aileron_sign_convention() {
        let l = limits();
        let a = ActuatorSet::default()
            .with(Actuator::AileronLeft, 0.5)
            .with(Actuator::AileronRight, -0.5);
        // symmetric (flap-like) deflection
        assert_eq!(
            a.surface_deflection(Surface::AileronLeft, &l),
            a.surface_deflection(Surface::AileronRight, &l)
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rate_limiter_never_overshoots(start in 0.0..1.0f64, cmd in -0.2..1.2f64, dt in 1e-4..3.0f64) {
                let l = limits();
                let cur = ActuatorSet::default().with(Actuator::Wing, start).settled(&l);
                let c = ActuatorSet::default().with(Actuator::Wing, cmd);
                let next = apply_actuator_rates(&cur, &c, &l, dt);
                let target = cmd.max(0.0).min(1.0) * l.wing_tilt_max;
                let (lo, hi) = if cur.wing_tilt <= target { (cur.wing_tilt, target) } else { (target, cur.wing_tilt) };
                prop_assert!(next.wing_tilt >= lo - 1e-15 && next.wing_tilt <= hi + 1e-15);
            }

            #[test]
            fn rate_limiter_is_time_consistent(start in 0.0..1.0f64, cmd in 0.0..1.0f64, dt1 in 1e-3..4.0f64, dt2 in 1e-3..4.0f64) {
                let l = limits();
                let cur = ActuatorSet::default().with(Actuator::Wing, start).settled(&l);
                let c = ActuatorSet::default().with(Actuator::Wing, cmd);
                let once = apply_actuator_rates(&cur, &c, &l, dt1 + dt2);
                let mid = apply_actuator_rates(&cur, &c, &l, dt1);
                let twice = apply_actuator_rates(&mid, &c, &l, dt2);
                prop_assert!((once.wing_tilt - twice.wing_tilt).abs() < 1e-12);
            }
        }
    }
}

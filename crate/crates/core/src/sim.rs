//! Closed-loop scenario execution.
//!
//! Dynamics and the attitude loop run at the base rate, the cruise loop at a
//! fifth of it. Every dynamics tick appends one [`LogRow`].

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 has inherent math methods whenever std is in the build graph
use num_traits::Float;

use crate::aero::total_wrench;
use crate::attitude::{
    daisy_chain_allocate, dynamic_inversion, nominal_moment_estimate, AllocationConfig, AttitudeController,
    AttitudeGains, AttitudeSetpoint,
};
use crate::cruise::{path_airspeed, CruiseConfig, CruiseController, CruiseSetpoint};
use crate::dynamics::{integrate_step, IntegrationError, RigidBodyState};
use crate::math::{euler_angles, Vec3};
use crate::trim::{TrimError, TrimMap};
use crate::vehicle::{apply_actuator_rates, Actuator, ActuatorSet, VehicleParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    /// Raw actuator commands, no controller.
    OpenLoop,
    /// Attitude setpoints with manual wing and main throttle.
    Attitude,
    /// Airspeed setpoints through the trim-map.
    Cruise,
}

impl ControlMode {
    pub fn name(self) -> &'static str {
        match self {
            ControlMode::OpenLoop => "open_loop",
            ControlMode::Attitude => "attitude",
            ControlMode::Cruise => "cruise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Actuators(ActuatorSet),
    Attitude {
        setpoint: AttitudeSetpoint,
        wing: f64,
        main_throttle: f64,
        flap: f64,
    },
    Cruise(CruiseSetpoint),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedCommand {
    pub time: f64,
    pub command: Command,
}

/// Constant inertial wind with step changes at given times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WindProfile {
    pub base: Vec3,
    pub steps: Vec<(f64, Vec3)>,
}

impl WindProfile {
    pub fn at(&self, t: f64) -> Vec3 {
        self.steps
            .iter()
            .take_while(|(ts, _)| *ts <= t)
            .last()
            .map_or(self.base, |(_, w)| *w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub mode: ControlMode,
    pub initial: RigidBodyState,
    /// Initial actuator positions; derived from the first command (or the
    /// trim-map in cruise mode) when absent.
    pub initial_actuators: Option<ActuatorSet>,
    pub wind: WindProfile,
    pub timeline: Vec<TimedCommand>,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("duration must be positive")]
    Duration,
    #[error("timeline is empty")]
    EmptyTimeline,
    #[error("timeline times must be strictly increasing and non-negative")]
    Timestamps,
    #[error("wind step times must be strictly increasing")]
    WindSteps,
    #[error("command at t = {time} s does not match mode {mode}")]
    ModeMismatch { time: f64, mode: &'static str },
    #[error("cruise mode requires a trim map")]
    MissingMap,
    #[error("initial actuators: {0}")]
    InitialLookup(TrimError),
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(ScenarioError::Duration);
        }
        if self.timeline.is_empty() {
            return Err(ScenarioError::EmptyTimeline);
        }
        if self.timeline[0].time < 0.0 || self.timeline.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(ScenarioError::Timestamps);
        }
        if self.wind.steps.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(ScenarioError::WindSteps);
        }
        for c in &self.timeline {
            let ok = matches!(
                (self.mode, &c.command),
                (ControlMode::OpenLoop, Command::Actuators(_))
                    | (ControlMode::Attitude, Command::Attitude { .. })
                    | (ControlMode::Cruise, Command::Cruise(_))
            );
            if !ok {
                return Err(ScenarioError::ModeMismatch {
                    time: c.time,
                    mode: self.mode.name(),
                });
            }
        }
        Ok(())
    }

    /// Command active at time `t` (the first one before its start time).
    pub fn command_at(&self, t: f64) -> &Command {
        let idx = self.timeline.iter().take_while(|c| c.time <= t).count();
        &self.timeline[idx.saturating_sub(1)].command
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub rate: f64,
    /// Cruise-loop period in dynamics ticks.
    pub cruise_divider: usize,
    pub attitude: AttitudeGains,
    pub allocation: AllocationConfig,
    pub cruise: CruiseConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            rate: 250.0,
            cruise_divider: 5,
            attitude: AttitudeGains::default(),
            allocation: AllocationConfig::default(),
            cruise: CruiseConfig::default(),
        }
    }
}

/// One dynamics tick. Angles in radians; NaN marks quantities the active
/// mode does not produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub time: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    /// Roll, pitch, yaw.
    pub euler: [f64; 3],
    pub omega: [f64; 3],
    /// Forward and down airspeed in the heading frame.
    pub airspeed: [f64; 2],
    pub wind: [f64; 3],
    pub command: [f64; 9],
    pub wing_tilt: f64,
    pub attitude_setpoint: [f64; 3],
    pub velocity_setpoint: [f64; 2],
    pub lookup_velocity: [f64; 2],
    pub trim_throttle: f64,
    pub trim_pitch: f64,
    pub trim_wing: f64,
    /// Corrective pitch and throttle.
    pub correction: [f64; 2],
    pub corrective_force: [f64; 2],
    pub moment_des: [f64; 3],
    pub moment_nominal: [f64; 3],
    pub allocated: [[f64; 3]; 4],
    pub residual: [f64; 3],
    pub force: [f64; 3],
    pub moment: [f64; 3],
    pub saturated: bool,
    pub lookup_warning: bool,
}

impl LogRow {
    pub fn columns() -> Vec<String> {
        use alloc::format;
        let mut c: Vec<String> = Vec::new();
        let mut push = |prefix: &str, names: &[&str]| {
            for n in names {
                c.push(if n.is_empty() { prefix.into() } else { format!("{prefix}_{n}") });
            }
        };
        push("time", &[""]);
        push("pos", &["n", "e", "d"]);
        push("vel", &["n", "e", "d"]);
        push("att", &["roll", "pitch", "yaw"]);
        push("omega", &["x", "y", "z"]);
        push("va", &["x", "z"]);
        push("wind", &["n", "e", "d"]);
        let names: Vec<&str> = Actuator::ALL.iter().map(|a| a.name()).collect();
        push("cmd", &names);
        push("wing_tilt", &[""]);
        push("sp", &["roll", "pitch", "yaw_rate"]);
        push("sp_va", &["x", "z"]);
        push("lu_va", &["x", "z"]);
        push("trim", &["throttle", "pitch", "wing"]);
        push("corr", &["pitch", "throttle"]);
        push("fc", &["x", "z"]);
        push("m_des", &["x", "y", "z"]);
        push("m_hat", &["x", "y", "z"]);
        for b in crate::attitude::BLOCK_NAMES {
            push(&format!("alloc_{b}"), &["x", "y", "z"]);
        }
        push("m_res", &["x", "y", "z"]);
        push("force", &["x", "y", "z"]);
        push("moment", &["x", "y", "z"]);
        push("saturated", &[""]);
        push("lookup_warning", &[""]);
        c
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(80);
        v.push(self.time);
        v.extend_from_slice(&self.position);
        v.extend_from_slice(&self.velocity);
        v.extend_from_slice(&self.euler);
        v.extend_from_slice(&self.omega);
        v.extend_from_slice(&self.airspeed);
        v.extend_from_slice(&self.wind);
        v.extend_from_slice(&self.command);
        v.push(self.wing_tilt);
        v.extend_from_slice(&self.attitude_setpoint);
        v.extend_from_slice(&self.velocity_setpoint);
        v.extend_from_slice(&self.lookup_velocity);
        v.extend_from_slice(&[self.trim_throttle, self.trim_pitch, self.trim_wing]);
        v.extend_from_slice(&self.correction);
        v.extend_from_slice(&self.corrective_force);
        v.extend_from_slice(&self.moment_des);
        v.extend_from_slice(&self.moment_nominal);
        for b in &self.allocated {
            v.extend_from_slice(b);
        }
        v.extend_from_slice(&self.residual);
        v.extend_from_slice(&self.force);
        v.extend_from_slice(&self.moment);
        v.push(self.saturated as u8 as f64);
        v.push(self.lookup_warning as u8 as f64);
        v
    }

    /// Inverse of [`LogRow::values`].
    pub fn from_values(v: &[f64]) -> Option<Self> {
        if v.len() != Self::columns().len() {
            return None;
        }
        let mut it = v.iter().copied();
        let mut take = |n: usize| -> [f64; 9] {
            let mut a = [0.0; 9];
            for x in a.iter_mut().take(n) {
                *x = it.next().unwrap_or(f64::NAN);
            }
            a
        };
        let t3 = |a: [f64; 9]| [a[0], a[1], a[2]];
        let t2 = |a: [f64; 9]| [a[0], a[1]];
        let time = take(1)[0];
        let position = t3(take(3));
        let velocity = t3(take(3));
        let euler = t3(take(3));
        let omega = t3(take(3));
        let airspeed = t2(take(2));
        let wind = t3(take(3));
        let command = take(9);
        let wing_tilt = take(1)[0];
        let attitude_setpoint = t3(take(3));
        let velocity_setpoint = t2(take(2));
        let lookup_velocity = t2(take(2));
        let trim = take(3);
        let correction = t2(take(2));
        let corrective_force = t2(take(2));
        let moment_des = t3(take(3));
        let moment_nominal = t3(take(3));
        let allocated = [t3(take(3)), t3(take(3)), t3(take(3)), t3(take(3))];
        let residual = t3(take(3));
        let force = t3(take(3));
        let moment = t3(take(3));
        let flags = take(2);
        Some(Self {
            time,
            position,
            velocity,
            euler,
            omega,
            airspeed,
            wind,
            command,
            wing_tilt,
            attitude_setpoint,
            velocity_setpoint,
            lookup_velocity,
            trim_throttle: trim[0],
            trim_pitch: trim[1],
            trim_wing: trim[2],
            correction,
            corrective_force,
            moment_des,
            moment_nominal,
            allocated,
            residual,
            force,
            moment,
            saturated: flags[0] != 0.0,
            lookup_warning: flags[1] != 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimFault {
    Integration { time: f64, error: IntegrationError },
    Lookup { time: f64, error: TrimError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub scenario: String,
    pub mode: ControlMode,
    pub rows: Vec<LogRow>,
    pub fault: Option<SimFault>,
}

fn v3(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Initial actuator positions of a scenario, settled.
pub fn initial_actuators(
    sc: &Scenario,
    p: &VehicleParams,
    map: Option<&TrimMap>,
) -> Result<ActuatorSet, ScenarioError> {
    if let Some(a) = sc.initial_actuators {
        return Ok(a.clamped().settled(&p.actuators));
    }
    let out = match sc.timeline.first().map(|c| c.command) {
        Some(Command::Actuators(a)) => a,
        Some(Command::Attitude {
            wing,
            main_throttle,
            flap,
            ..
        }) => ActuatorSet::nominal(wing, main_throttle, 0.0)
            .with(Actuator::AileronLeft, flap)
            .with(Actuator::AileronRight, -flap),
        Some(Command::Cruise(_)) => {
            let map = map.ok_or(ScenarioError::MissingMap)?;
            let va = path_airspeed(&sc.initial, &sc.wind.at(0.0));
            let (speed, gamma) = crate::cruise::polar_airspeed(va);
            let trim = map.lookup(speed, gamma).map_err(ScenarioError::InitialLookup)?.solution;
            trim.actuators(p)
        }
        None => return Err(ScenarioError::EmptyTimeline),
    };
    Ok(out.clamped().settled(&p.actuators))
}

/// Runs a scenario to its end or to the first fault.
pub fn run_scenario(
    sc: &Scenario,
    p: &VehicleParams,
    map: Option<&TrimMap>,
    cfg: &SimConfig,
) -> Result<RunLog, ScenarioError> {
    sc.validate()?;
    if sc.mode == ControlMode::Cruise && map.is_none() {
        return Err(ScenarioError::MissingMap);
    }
    let dt = 1.0 / cfg.rate;
    let ticks = (sc.duration * cfg.rate).round() as usize;
    let inertia = p.inertia_matrix();
    let mut state = sc.initial;
    let mut act = initial_actuators(sc, p, map)?;
    let mut attitude = AttitudeController::new(cfg.attitude);
    let mut cruise = CruiseController::new(cfg.cruise);
    let mut cruise_out = None;
    let mut rows = Vec::with_capacity(ticks);
    let mut fault = None;

    for k in 0..ticks {
        let t = k as f64 * dt;
        let wind = sc.wind.at(t);
        let nan2 = [f64::NAN; 2];
        let nan3 = [f64::NAN; 3];
        let mut row = LogRow {
            time: t,
            position: v3(&state.position),
            velocity: v3(&state.velocity),
            euler: {
                let (r, pch, y) = euler_angles(&state.attitude);
                [r, pch, y]
            },
            omega: v3(&state.omega),
            airspeed: path_airspeed(&state, &wind),
            wind: v3(&wind),
            command: [0.0; 9],
            wing_tilt: act.wing_tilt,
            attitude_setpoint: nan3,
            velocity_setpoint: nan2,
            lookup_velocity: nan2,
            trim_throttle: f64::NAN,
            trim_pitch: f64::NAN,
            trim_wing: f64::NAN,
            correction: nan2,
            corrective_force: nan2,
            moment_des: nan3,
            moment_nominal: nan3,
            allocated: [nan3; 4],
            residual: nan3,
            force: nan3,
            moment: nan3,
            saturated: false,
            lookup_warning: false,
        };

        let attitude_cmd = match *sc.command_at(t) {
            Command::Actuators(a) => {
                row.command = a.commands;
                None
            }
            Command::Attitude {
                setpoint,
                wing,
                main_throttle,
                flap,
            } => Some((
                setpoint,
                ActuatorSet::nominal(wing, main_throttle, act.wing_tilt)
                    .with(Actuator::AileronLeft, flap)
                    .with(Actuator::AileronRight, -flap),
            )),
            Command::Cruise(sp) => {
                if k % cfg.cruise_divider.max(1) == 0 || cruise_out.is_none() {
                    let cdt = dt * cfg.cruise_divider.max(1) as f64;
                    match cruise.step(&state, &sp, map.expect("checked above"), p, &wind, act.wing_tilt, cdt) {
                        Ok(o) => cruise_out = Some(o),
                        Err(error) => {
                            fault = Some(SimFault::Lookup { time: t, error });
                            break;
                        }
                    }
                }
                let o = cruise_out.expect("set above");
                row.velocity_setpoint = sp.velocity;
                row.lookup_velocity = o.lookup_velocity;
                row.trim_throttle = o.trim.main_throttle;
                row.trim_pitch = o.trim.pitch;
                row.trim_wing = o.trim.wing;
                row.correction = o.correction;
                row.corrective_force = o.force;
                row.lookup_warning = o.lookup_warning;
                Some((o.setpoint, o.nominal(act.wing_tilt)))
            }
        };

        if let Some((setpoint, nominal)) = attitude_cmd {
            let out = attitude.update(&state, &setpoint, act.wing_tilt, dt);
            let m_des = dynamic_inversion(&out.accel_des, &state.omega, &inertia);
            let m_hat = nominal_moment_estimate(&state, &nominal, p, &wind);
            let alloc = daisy_chain_allocate(&(m_des - m_hat), &state, &nominal, p, &wind, &cfg.allocation);
            row.command = alloc.command.commands;
            row.attitude_setpoint = [setpoint.roll, setpoint.pitch, setpoint.yaw_rate];
            row.moment_des = v3(&m_des);
            row.moment_nominal = v3(&m_hat);
            for (dst, b) in row.allocated.iter_mut().zip(&alloc.blocks) {
                *dst = v3(b);
            }
            row.residual = v3(&alloc.residual);
            row.saturated = alloc.saturated;
        }

        let command = ActuatorSet {
            commands: row.command,
            wing_tilt: act.wing_tilt,
        };
        act = apply_actuator_rates(&act, &command, &p.actuators, dt);
        let fm = total_wrench(&state, &act, p, &wind);
        row.force = v3(&fm.force);
        row.moment = v3(&fm.moment);
        rows.push(row);

        match integrate_step(&state, &act, p, &wind, dt) {
            Ok(next) => state = next,
            Err(error) => {
                fault = Some(SimFault::Integration { time: t, error });
                break;
            }
        }
    }

    Ok(RunLog {
        scenario: sc.name.clone(),
        mode: sc.mode,
        rows,
        fault,
    })
}

//! Scenario files (TOML).
//!
//! ```toml
//! name = "hover_steps"
//! mode = "attitude"        # open_loop | attitude | cruise
//! duration = 12.0
//!
//! [initial]
//! position = [0.0, 0.0, -20.0]
//! euler = [0.0, 0.0, 0.0]  # roll, pitch, yaw [rad]
//!
//! [[timeline]]
//! time = 0.0
//! wing = 1.0
//! throttle = 0.77
//! roll = 0.26
//! ```
//!
//! Timeline entries carry the fields of their mode: `commands` (nine
//! normalized actuator commands) for open loop; `roll`, `pitch`, `yaw_rate`,
//! `wing`, `throttle`, `flap` for attitude; `vx`, `vz`, `roll` for cruise.
//! Airspeeds are forward and down in m/s, angles in radians.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tiltwing_core::attitude::AttitudeSetpoint;
use tiltwing_core::cruise::CruiseSetpoint;
use tiltwing_core::math::{euler_angles, from_euler, Vec3};
use tiltwing_core::sim::{Command, ControlMode, Scenario, TimedCommand, WindProfile};
use tiltwing_core::{ActuatorSet, RigidBodyState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeFile {
    OpenLoop,
    Attitude,
    Cruise,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialFile {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub euler: [f64; 3],
    pub omega: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorsFile {
    pub commands: [f64; 9],
    pub wing_tilt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GustFile {
    pub time: f64,
    pub wind: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindFile {
    pub base: [f64; 3],
    pub steps: Vec<GustFile>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryFile {
    pub time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commands: Option<[f64; 9]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roll: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yaw_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub throttle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub mode: ModeFile,
    pub duration: f64,
    #[serde(default)]
    pub initial: InitialFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_actuators: Option<ActuatorsFile>,
    #[serde(default)]
    pub wind: WindFile,
    pub timeline: Vec<EntryFile>,
}

impl ScenarioFile {
    pub fn to_scenario(&self) -> Result<Scenario> {
        let mode = match self.mode {
            ModeFile::OpenLoop => ControlMode::OpenLoop,
            ModeFile::Attitude => ControlMode::Attitude,
            ModeFile::Cruise => ControlMode::Cruise,
        };
        let timeline = self
            .timeline
            .iter()
            .map(|e| entry_command(mode, e).map(|command| TimedCommand { time: e.time, command }))
            .collect::<Result<Vec<_>>>()?;
        let i = &self.initial;
        let sc = Scenario {
            name: self.name.clone(),
            mode,
            initial: RigidBodyState {
                position: Vec3::from(i.position),
                velocity: Vec3::from(i.velocity),
                attitude: from_euler(i.euler[0], i.euler[1], i.euler[2]),
                omega: Vec3::from(i.omega),
            },
            initial_actuators: self.initial_actuators.as_ref().map(|a| ActuatorSet {
                commands: a.commands,
                wing_tilt: a.wing_tilt,
            }),
            wind: WindProfile {
                base: Vec3::from(self.wind.base),
                steps: self.wind.steps.iter().map(|g| (g.time, Vec3::from(g.wind))).collect(),
            },
            timeline,
            duration: self.duration,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_scenario(sc: &Scenario) -> Self {
        let (r, p, y) = euler_angles(&sc.initial.attitude);
        let arr = |v: &Vec3| [v.x, v.y, v.z];
        Self {
            name: sc.name.clone(),
            mode: match sc.mode {
                ControlMode::OpenLoop => ModeFile::OpenLoop,
                ControlMode::Attitude => ModeFile::Attitude,
                ControlMode::Cruise => ModeFile::Cruise,
            },
            duration: sc.duration,
            initial: InitialFile {
                position: arr(&sc.initial.position),
                velocity: arr(&sc.initial.velocity),
                euler: [r, p, y],
                omega: arr(&sc.initial.omega),
            },
            initial_actuators: sc.initial_actuators.map(|a| ActuatorsFile {
                commands: a.commands,
                wing_tilt: a.wing_tilt,
            }),
            wind: WindFile {
                base: arr(&sc.wind.base),
                steps: sc
                    .wind
                    .steps
                    .iter()
                    .map(|(t, w)| GustFile {
                        time: *t,
                        wind: arr(w),
                    })
                    .collect(),
            },
            timeline: sc
                .timeline
                .iter()
                .map(|c| {
                    let mut e = EntryFile {
                        time: c.time,
                        ..Default::default()
                    };
                    match c.command {
                        Command::Actuators(a) => e.commands = Some(a.commands),
                        Command::Attitude {
                            setpoint,
                            wing,
                            main_throttle,
                            flap,
                        } => {
                            e.roll = Some(setpoint.roll);
                            e.pitch = Some(setpoint.pitch);
                            e.yaw_rate = Some(setpoint.yaw_rate);
                            e.wing = Some(wing);
                            e.throttle = Some(main_throttle);
                            e.flap = Some(flap);
                        }
                        Command::Cruise(sp) => {
                            e.vx = Some(sp.velocity[0]);
                            e.vz = Some(sp.velocity[1]);
                            e.roll = Some(sp.roll);
                        }
                    }
                    e
                })
                .collect(),
        }
    }
}

fn entry_command(mode: ControlMode, e: &EntryFile) -> Result<Command> {
    let t = e.time;
    let stray = |names: &[(&str, bool)]| -> Result<()> {
        for (n, present) in names {
            if *present {
                bail!("timeline entry at t = {t}: field `{n}` does not belong to mode {}", mode.name());
            }
        }
        Ok(())
    };
    Ok(match mode {
        ControlMode::OpenLoop => {
            stray(&[
                ("roll", e.roll.is_some()),
                ("pitch", e.pitch.is_some()),
                ("yaw_rate", e.yaw_rate.is_some()),
                ("wing", e.wing.is_some()),
                ("throttle", e.throttle.is_some()),
                ("flap", e.flap.is_some()),
                ("vx", e.vx.is_some()),
                ("vz", e.vz.is_some()),
            ])?;
            let commands = e.commands.with_context(|| format!("timeline entry at t = {t} needs `commands`"))?;
            Command::Actuators(ActuatorSet {
                commands,
                wing_tilt: 0.0,
            })
        }
        ControlMode::Attitude => {
            stray(&[
                ("commands", e.commands.is_some()),
                ("vx", e.vx.is_some()),
                ("vz", e.vz.is_some()),
            ])?;
            Command::Attitude {
                setpoint: AttitudeSetpoint {
                    roll: e.roll.unwrap_or(0.0),
                    pitch: e.pitch.unwrap_or(0.0),
                    yaw_rate: e.yaw_rate.unwrap_or(0.0),
                },
                wing: e.wing.with_context(|| format!("timeline entry at t = {t} needs `wing`"))?,
                main_throttle: e
                    .throttle
                    .with_context(|| format!("timeline entry at t = {t} needs `throttle`"))?,
                flap: e.flap.unwrap_or(0.0),
            }
        }
        ControlMode::Cruise => {
            stray(&[
                ("commands", e.commands.is_some()),
                ("pitch", e.pitch.is_some()),
                ("yaw_rate", e.yaw_rate.is_some()),
                ("wing", e.wing.is_some()),
                ("throttle", e.throttle.is_some()),
                ("flap", e.flap.is_some()),
            ])?;
            Command::Cruise(CruiseSetpoint {
                velocity: [
                    e.vx.with_context(|| format!("timeline entry at t = {t} needs `vx`"))?,
                    e.vz.unwrap_or(0.0),
                ],
                roll: e.roll.unwrap_or(0.0),
            })
        }
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let f: ScenarioFile = toml::from_str(text).context("parsing scenario")?;
    f.to_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("in {}", path.display()))
}

pub fn scenario_to_toml(sc: &Scenario) -> Result<String> {
    Ok(toml::to_string(&ScenarioFile::from_scenario(sc))?)
}

//! Vehicle and controller configuration files (TOML).

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tiltwing_core::attitude::{AllocationConfig, AttitudeGains};
use tiltwing_core::cruise::CruiseConfig;
use tiltwing_core::sim::SimConfig;
use tiltwing_core::trim::TrimConfig;
use tiltwing_core::VehicleParams;

pub fn parse_vehicle(text: &str) -> Result<VehicleParams> {
    let p: VehicleParams = toml::from_str(text).context("parsing vehicle config")?;
    p.validate().context("validating vehicle config")?;
    Ok(p)
}

pub fn load_vehicle(path: &Path) -> Result<VehicleParams> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_vehicle(&text).with_context(|| format!("in {}", path.display()))
}

/// Comment block written above generated vehicle files.
pub const VEHICLE_HEADER: &str = "\
# Tiltwing vehicle parameters. SI units, body frame forward-right-down.
# Mass, inertia and geometry describe the reference airframe. The propeller
# constants and the airfoil coefficients (lift slopes, stall angles, drag and
# flat-plate values) are literature-style defaults, not identified on a real
# vehicle.
";

pub fn vehicle_to_toml(p: &VehicleParams) -> Result<String> {
    Ok(toml::to_string(p)?)
}

/// Controller, simulation and trim settings. Every table is optional and
/// falls back to the built-in defaults field by field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// Dynamics and attitude-loop rate [Hz].
    pub rate: f64,
    /// Cruise-loop period in dynamics ticks.
    pub cruise_divider: usize,
    pub attitude: AttitudeGains,
    pub allocation: AllocationConfig,
    pub cruise: CruiseConfig,
    pub trim: TrimConfig,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            rate: sim.rate,
            cruise_divider: sim.cruise_divider,
            attitude: sim.attitude,
            allocation: sim.allocation,
            cruise: sim.cruise,
            trim: TrimConfig::default(),
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && 1.0 / self.rate <= tiltwing_core::dynamics::MAX_STEP) {
            bail!("rate must be at least {} Hz", 1.0 / tiltwing_core::dynamics::MAX_STEP);
        }
        if self.cruise_divider == 0 {
            bail!("cruise_divider must be at least 1");
        }
        self.cruise.validate().map_err(anyhow::Error::msg)?;
        let a = &self.attitude;
        if !(a.schedule_end > a.schedule_start && a.pitch_down_factor > 0.0 && a.max_rate > 0.0) {
            bail!("attitude schedule needs end > start, a positive pitch-down factor and max rate");
        }
        if self.allocation.passes == 0 {
            bail!("allocation needs at least one pass");
        }
        Ok(())
    }

    pub fn sim(&self) -> SimConfig {
        SimConfig {
            rate: self.rate,
            cruise_divider: self.cruise_divider,
            attitude: self.attitude,
            allocation: self.allocation,
            cruise: self.cruise,
        }
    }
}

pub fn parse_controller(text: &str) -> Result<ControllerConfig> {
    let c: ControllerConfig = toml::from_str(text).context("parsing controller config")?;
    c.validate()?;
    Ok(c)
}

/// Controller settings from `path`, or the defaults.
pub fn load_controller(path: Option<&Path>) -> Result<ControllerConfig> {
    match path {
        None => Ok(ControllerConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_controller(&text).with_context(|| format!("in {}", p.display()))
        }
    }
}

//! Flight model, trim optimization and control stack for an over-actuated
//! tiltwing VTOL UAV.
//!
//! The crate is `no_std` (it needs `alloc`) so the controllers can be reused on
//! embedded targets. File formats, the CLI and everything else touching the OS
//! live in the `tiltwing` crate.
//!
//! Conventions: body frame forward-right-down with origin in the CG, inertial
//! frame north-east-down. Airspeed is the velocity of the vehicle relative to
//! the air mass.
//!
//! - [`vehicle`]: physical parameters, actuators and their limits
//! - [`aero`]: propeller, airfoil and fuselage forces and the net wrench
//! - [`dynamics`]: rigid-body equations of motion and RK4 integration
//! - [`lm`]: bound-constrained Levenberg-Marquardt
//! - [`trim`]: trim problem, trim points and the trim-map
//! - [`attitude`]: attitude controller, dynamic inversion, daisy-chain allocation
//! - [`cruise`]: trim-map feed-forward with WLS-allocated velocity feedback
//! - [`sim`]: closed-loop scenarios and run logs
//! - [`metrics`]: tracking metrics computed from run logs

#![no_std]
#![allow(clippy::too_many_arguments)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod aero;
pub mod attitude;
pub mod cruise;
pub mod dynamics;
pub mod lm;
pub mod math;
pub mod metrics;
pub mod sim;
pub mod trim;
pub mod vehicle;

pub use aero::{total_wrench, ForceMoment, LocalFlow, Source};
pub use dynamics::{RigidBodyState, StateDerivative};
pub use trim::{TrimMap, TrimPoint};
pub use vehicle::{ActuatorSet, VehicleParams};

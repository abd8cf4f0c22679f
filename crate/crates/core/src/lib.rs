//! Runtime safety net for 2D waypoint-following ground robots.
//!
//! The crate holds the pure, allocation-light parts of the system: the
//! monitor formulas gating untrusted control decisions, a sound interval
//! evaluation of those formulas, the relative-frame kinematics with an exact
//! closed-form flow, plan-graph geometry and the reference controllers.
//!
//! Everything here is `no_std` (with `alloc` for plan graphs). File formats,
//! the simulation harness and the command line live in the `safenet` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod controllers;
pub mod dynamics;
pub mod interval;
pub mod monitor;
pub mod plan;
pub mod toy;
pub mod types;

mod math;

pub use monitor::{FailedClause, MonitorVerdict};
pub use types::{euclid_norm, inf_norm, normalize_angle, Params, ParamsError, RelWaypoint, VehicleState, WorldPose};

//! Relative-frame plant, its exact flow, and the world-frame unicycle.
//!
//! In the vehicle frame the robot sits at the origin facing +x and the
//! waypoint moves toward it:
//!
//! ```text
//! x' = v(k·y − 1),  y' = −v·k·x,  v' = a,  t' = 1,   v ≥ 0
//! ```
//!
//! For fixed `k ≠ 0` the waypoint rotates about `(0, 1/k)` by `−k·s` where
//! `s` is the arc length driven. Speed stays linear in time until it hits
//! zero, where the robot stops (it never reverses).

use core::fmt;

use crate::math;
use crate::types::{normalize_angle, WorldPose};

/// Default RK4 substeps per control cycle.
pub const DEFAULT_SUBSTEPS: u32 = 20;

/// Waypoint position in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelPoint {
    pub x: f64,
    pub y: f64,
}

impl RelPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        math::hypot(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &WorldPoint) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Time derivatives of `(x, y, v, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantRate {
    pub dx: f64,
    pub dy: f64,
    pub dv: f64,
    pub dt: f64,
}

pub fn plant_derivative(pt: RelPoint, v: f64, a: f64, k: f64) -> PlantRate {
    PlantRate { dx: v * (k * pt.y - 1.0), dy: -v * k * pt.x, dv: a, dt: 1.0 }
}

/// Time the flow can run before speed reaches zero, capped at `t`.
#[inline]
fn time_until_stop(v0: f64, a: f64, t: f64) -> f64 {
    if a < 0.0 {
        t.min((v0 / -a).max(0.0))
    } else {
        t
    }
}

#[inline]
fn end_speed(v0: f64, a: f64, t: f64, t_run: f64) -> f64 {
    if t_run < t {
        0.0
    } else {
        (v0 + a * t_run).max(0.0)
    }
}

/// `sin(u)/k` and `(1 − cos u)/k` for `u = k·s`, well-conditioned as `k → 0`.
fn arc_offsets(k: f64, s: f64) -> (f64, f64) {
    if k == 0.0 {
        return (s, 0.0);
    }
    let u = k * s;
    let half = math::sin(0.5 * u);
    (math::sin(u) / k, 2.0 * half * half / k)
}

/// Exact flow of the relative plant for duration `t`.
pub fn closed_form_relative(pt0: RelPoint, v0: f64, a: f64, k: f64, t: f64) -> (RelPoint, f64) {
    let t_run = time_until_stop(v0, a, t.max(0.0));
    let s = v0 * t_run + 0.5 * a * t_run * t_run;
    let v = end_speed(v0, a, t, t_run);
    if k == 0.0 {
        return (RelPoint::new(pt0.x - s, pt0.y), v);
    }
    let u = k * s;
    let (su, cu) = (math::sin(u), math::cos(u));
    let (ox, oy) = arc_offsets(k, s);
    (RelPoint::new(cu * pt0.x + su * pt0.y - ox, -su * pt0.x + cu * pt0.y + oy), v)
}

/// Largest frame rotation per relative-frame RK4 step, rad.
pub const MAX_SUBSTEP_TURN: f64 = 0.01;

/// Requested step count, raised so no step turns by more than
/// [`MAX_SUBSTEP_TURN`].
fn step_count(substeps: u32, k: f64, v: f64, a: f64, t_run: f64) -> u32 {
    let turn = (k * (v * t_run + 0.5 * a * t_run * t_run)).abs();
    substeps.max(1).max(math::ceil(turn / MAX_SUBSTEP_TURN).min(1e6) as u32)
}

/// Classical RK4 on the relative plant with at least `substeps` equal steps.
///
/// The relative frame rotates with the robot, so the truncation error grows
/// with the target distance times the fifth power of the turn per step; more
/// steps are taken when a step would turn by more than [`MAX_SUBSTEP_TURN`].
pub fn step_relative(pt: RelPoint, v: f64, a: f64, k: f64, dt: f64, substeps: u32) -> (RelPoint, f64) {
    let t_run = time_until_stop(v, a, dt.max(0.0));
    let n = step_count(substeps, k, v, a, t_run);
    let h = t_run / n as f64;
    let f = |x: f64, y: f64, v: f64| (v * (k * y - 1.0), -v * k * x);
    let (mut x, mut y, mut vel) = (pt.x, pt.y, v);
    for i in 0..n {
        // speeds from the start value so rounding does not accumulate
        let v_mid = v + (i as f64 + 0.5) * h * a;
        let v_end = v + (i + 1) as f64 * h * a;
        let (k1x, k1y) = f(x, y, vel);
        let (k2x, k2y) = f(x + 0.5 * h * k1x, y + 0.5 * h * k1y, v_mid);
        let (k3x, k3y) = f(x + 0.5 * h * k2x, y + 0.5 * h * k2y, v_mid);
        let (k4x, k4y) = f(x + h * k3x, y + h * k3y, v_end);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        vel = v_end;
    }
    let v_out = if t_run < dt { 0.0 } else { vel.max(0.0) };
    (RelPoint::new(x, y), v_out)
}

/// Actuation error between commanded and realized curvature/acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    pub curvature_gain_error: f64,
    /// 1/m
    pub curvature_bias: f64,
    pub accel_gain_error: f64,
    /// Cycle durations are drawn from `[T(1 − jitter), T]`.
    pub cycle_jitter: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceError {
    GainOutOfRange(f64),
    JitterOutOfRange(f64),
    NotFinite,
}

impl fmt::Display for DisturbanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisturbanceError::GainOutOfRange(g) => write!(f, "gain error {g} outside (-1, 1)"),
            DisturbanceError::JitterOutOfRange(j) => write!(f, "cycle jitter {j} outside [0, 1)"),
            DisturbanceError::NotFinite => f.write_str("disturbance values must be finite"),
        }
    }
}

impl core::error::Error for DisturbanceError {}

impl Disturbance {
    pub const NONE: Disturbance = Disturbance {
        curvature_gain_error: 0.0,
        curvature_bias: 0.0,
        accel_gain_error: 0.0,
        cycle_jitter: 0.0,
        seed: 0,
    };

    pub fn new(
        curvature_gain_error: f64,
        curvature_bias: f64,
        accel_gain_error: f64,
        cycle_jitter: f64,
        seed: u64,
    ) -> Result<Self, DisturbanceError> {
        if ![curvature_gain_error, curvature_bias, accel_gain_error, cycle_jitter].iter().all(|v| v.is_finite()) {
            return Err(DisturbanceError::NotFinite);
        }
        for g in [curvature_gain_error, accel_gain_error] {
            if g.abs() >= 1.0 {
                return Err(DisturbanceError::GainOutOfRange(g));
            }
        }
        if !(0.0..1.0).contains(&cycle_jitter) {
            return Err(DisturbanceError::JitterOutOfRange(cycle_jitter));
        }
        Ok(Self { curvature_gain_error, curvature_bias, accel_gain_error, cycle_jitter, seed })
    }

    pub fn actual_curvature(&self, commanded: f64) -> f64 {
        commanded * (1.0 + self.curvature_gain_error) + self.curvature_bias
    }

    pub fn actual_accel(&self, commanded: f64) -> f64 {
        commanded * (1.0 + self.accel_gain_error)
    }
}

/// Integrates the world-frame unicycle under the disturbed actuation for `dt`
/// seconds with at least [`DEFAULT_SUBSTEPS`] RK4 steps.
pub fn world_step(
    pose: WorldPose,
    v: f64,
    kappa_cmd: f64,
    a_cmd: f64,
    dt: f64,
    dist: &Disturbance,
) -> (WorldPose, f64) {
    world_step_n(pose, v, kappa_cmd, a_cmd, dt, dist, DEFAULT_SUBSTEPS)
}

pub fn world_step_n(
    pose: WorldPose,
    v: f64,
    kappa_cmd: f64,
    a_cmd: f64,
    dt: f64,
    dist: &Disturbance,
    substeps: u32,
) -> (WorldPose, f64) {
    let kappa = dist.actual_curvature(kappa_cmd);
    let a = dist.actual_accel(a_cmd);
    let t_run = time_until_stop(v, a, dt.max(0.0));
    let n = step_count(substeps, kappa, v, a, t_run);
    let h = t_run / n as f64;
    // state (X, Y, ψ); v is linear in time and handled exactly
    let f = |psi: f64, v: f64| (v * math::cos(psi), v * math::sin(psi), v * kappa);
    let (mut x, mut y, mut psi, mut vel) = (pose.x, pose.y, pose.heading, v);
    for i in 0..n {
        let v_mid = v + (i as f64 + 0.5) * h * a;
        let v_end = v + (i + 1) as f64 * h * a;
        let k1 = f(psi, vel);
        let k2 = f(psi + 0.5 * h * k1.2, v_mid);
        let k3 = f(psi + 0.5 * h * k2.2, v_mid);
        let k4 = f(psi + h * k3.2, v_end);
        x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        psi += h / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);
        vel = v_end;
    }
    let v_out = if t_run < dt { 0.0 } else { vel.max(0.0) };
    (WorldPose { x, y, heading: normalize_angle(psi) }, v_out)
}

/// World point expressed in the body frame of `pose`.
pub fn to_relative(pose: &WorldPose, world: WorldPoint) -> RelPoint {
    let (dx, dy) = (world.x - pose.x, world.y - pose.y);
    let (s, c) = (math::sin(pose.heading), math::cos(pose.heading));
    RelPoint::new(c * dx + s * dy, -s * dx + c * dy)
}

pub fn from_relative(pose: &WorldPose, rel: RelPoint) -> WorldPoint {
    let (s, c) = (math::sin(pose.heading), math::cos(pose.heading));
    WorldPoint::new(pose.x + c * rel.x - s * rel.y, pose.y + s * rel.x + c * rel.y)
}

//! Shared domain types and norms.

use core::f64::consts::PI;
use core::fmt;

use crate::math;

/// Symbolic constants of the monitor formulas.
///
/// All four are strictly positive; [`Params::new`] is the only way to build
/// one, so every `Params` in circulation satisfies that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    accel_max: f64,
    brake_max: f64,
    cycle_max: f64,
    eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamsError {
    NonPositive { field: &'static str, value: f64 },
}

impl fmt::Display for ParamsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamsError::NonPositive { field, value } => {
                write!(f, "parameter {field} must be finite and > 0, got {value}")
            }
        }
    }
}

impl core::error::Error for ParamsError {}

impl Params {
    /// `accel_max` (A) and `brake_max` (B) in m/s², `cycle_max` (T) in s,
    /// `eps` (ε, goal radius and annulus half-width) in m.
    pub fn new(accel_max: f64, brake_max: f64, cycle_max: f64, eps: f64) -> Result<Self, ParamsError> {
        for (field, value) in
            [("accel_max", accel_max), ("brake_max", brake_max), ("cycle_max", cycle_max), ("eps", eps)]
        {
            // NaN fails this comparison too.
            if !(value > 0.0 && value.is_finite()) {
                return Err(ParamsError::NonPositive { field, value });
            }
        }
        Ok(Self { accel_max, brake_max, cycle_max, eps })
    }

    #[inline]
    pub fn accel_max(&self) -> f64 {
        self.accel_max
    }

    #[inline]
    pub fn brake_max(&self) -> f64 {
        self.brake_max
    }

    #[inline]
    pub fn cycle_max(&self) -> f64 {
        self.cycle_max
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn with_eps(self, eps: f64) -> Result<Self, ParamsError> {
        Self::new(self.accel_max, self.brake_max, self.cycle_max, eps)
    }

    pub fn with_cycle(self, cycle_max: f64) -> Result<Self, ParamsError> {
        Self::new(self.accel_max, self.brake_max, cycle_max, self.eps)
    }
}

/// A waypoint in the vehicle frame: `x` forward, `y` to the left.
///
/// `k` is the curvature of the arc the controller declares it will follow,
/// `[vl, vh]` the speed interval that must hold on arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelWaypoint {
    pub x: f64,
    pub y: f64,
    pub k: f64,
    pub vl: f64,
    pub vh: f64,
}

impl RelWaypoint {
    pub const fn new(x: f64, y: f64, k: f64, vl: f64, vh: f64) -> Self {
        Self { x, y, k, vl, vh }
    }

    pub fn with_k(self, k: f64) -> Self {
        Self { k, ..self }
    }

    pub fn with_pos(self, x: f64, y: f64) -> Self {
        Self { x, y, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// Speed, m/s. Never negative in a well-formed state.
    pub v: f64,
    /// Commanded acceleration, m/s².
    pub a: f64,
    /// Time since the start of the current control cycle, s.
    pub t: f64,
}

/// World-frame pose. The heading is kept in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl WorldPose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { x, y, heading: normalize_angle(heading) }
    }
}

/// Maps an angle to (−π, π]; both −π and π map to π.
pub fn normalize_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let turns = libm::ceil((theta - PI) / (2.0 * PI));
    let r = theta - 2.0 * PI * turns;
    // Rounding in the subtraction can land a hair outside the range.
    if r <= -PI {
        r + 2.0 * PI
    } else if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `max(|x|, |y|)`.
#[inline]
pub fn inf_norm(x: f64, y: f64) -> f64 {
    let (ax, ay) = (x.abs(), y.abs());
    if ax >= ay {
        ax
    } else {
        ay
    }
}

#[inline]
pub fn euclid_norm(x: f64, y: f64) -> f64 {
    math::hypot(x, y)
}

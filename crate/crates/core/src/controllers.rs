//! Untrusted steering controllers and acceleration selection.
//!
//! Steering sign convention: the band residual `e` grows as the robot drifts
//! left of the declared arc (for `k = 0`, `e = −y`), so both controllers
//! steer by subtracting a term proportional to `e`.

use core::fmt;

use crate::dynamics::RelPoint;
use crate::monitor::{band_residual, fallback_accel, go};
use crate::types::{Params, RelWaypoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdGains {
    pub kp: f64,
    pub kd: f64,
    pub curvature_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainsError;

impl fmt::Display for GainsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("gains must be finite and non-negative, with curvature_max > 0")
    }
}

impl core::error::Error for GainsError {}

impl PdGains {
    pub fn new(kp: f64, kd: f64, curvature_max: f64) -> Result<Self, GainsError> {
        let ok = [kp, kd, curvature_max].iter().all(|g| g.is_finite() && *g >= 0.0) && curvature_max > 0.0;
        if ok {
            Ok(Self { kp, kd, curvature_max })
        } else {
            Err(GainsError)
        }
    }
}

/// Signed band residual of `rel` against the arc of curvature `k`.
pub fn cross_track_error(rel: RelPoint, k: f64, eps: f64) -> f64 {
    band_residual(rel.x, rel.y, k, eps)
}

/// Hard steering toward the arc outside a deadband.
pub fn bang_bang(rel: RelPoint, k_seg: f64, eps: f64, deadband: f64, kappa_max: f64) -> f64 {
    let e = cross_track_error(rel, k_seg, eps);
    if e.abs() <= deadband {
        k_seg
    } else {
        k_seg - kappa_max * e.signum()
    }
}

pub fn pd(rel: RelPoint, prev_e: f64, dt: f64, k_seg: f64, eps: f64, g: &PdGains) -> f64 {
    let e = cross_track_error(rel, k_seg, eps);
    let raw = k_seg - g.kp * e - g.kd * (e - prev_e) / dt;
    raw.clamp(-g.curvature_max, g.curvature_max)
}

const GRID: usize = 64;
const BISECT_TOL: f64 = 1e-6;

/// Largest acceleration in `[−B, min(A, (target − v)/T)]` that passes Go, or
/// the fallback if none does.
pub fn choose_accel(wp: &RelWaypoint, v: f64, p: &Params, target_speed: f64) -> f64 {
    let lo_bound = -p.brake_max();
    let hi = ((target_speed - v) / p.cycle_max()).min(p.accel_max()).max(lo_bound);
    let passes = |a: f64| go(wp, v, a, p).passed();
    if passes(hi) {
        return hi;
    }
    // Scan downward for the first passing candidate; the passing set is an
    // interval in a, so the gap above it is then closed by bisection.
    let mut fail = hi;
    let mut pass = None;
    for i in 1..=GRID {
        let a = hi + (lo_bound - hi) * (i as f64 / GRID as f64);
        if passes(a) {
            pass = Some(a);
            break;
        }
        fail = a;
    }
    let Some(mut pass) = pass else {
        return fallback_accel(v, p);
    };
    while fail - pass > BISECT_TOL {
        let mid = 0.5 * (pass + fail);
        if passes(mid) {
            pass = mid;
        } else {
            fail = mid;
        }
    }
    if passes(pass) {
        pass
    } else {
        fallback_accel(v, p)
    }
}

/// The three-case reference controller: speed up below `vl`, hold inside the
/// limits, brake above `vh`.
pub fn liveness_accel(v: f64, vl: f64, vh: f64, accel_max: f64, brake_max: f64) -> f64 {
    if v < vl {
        accel_max
    } else if v <= vh {
        0.0
    } else {
        -brake_max
    }
}

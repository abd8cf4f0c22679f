//! Outward-rounded interval arithmetic and a sound interval evaluation of the
//! controller monitor.
//!
//! Each primitive rounds its lower bound toward −∞ and its upper bound toward
//! +∞. Rounding errors are detected exactly with error-free transformations
//! (two-sum, fma residuals), so an exact operation yields a zero-width result
//! and an inexact one widens by a single ulp on the side the error lies on.
//! The result of every operation therefore encloses both the real result and
//! the round-to-nearest result for any operands drawn from the inputs.
//!
//! The interval formulas mirror the operation order of [`crate::monitor`]
//! so that, for any point inside a box, the point evaluation's intermediate
//! floats lie inside the corresponding intervals.

use core::fmt;
use core::ops::{Add, Mul, Neg, Not, Sub};

use crate::math;
use crate::monitor::FailedClause;
use crate::types::Params;

// Below this magnitude fma residuals may underflow; fall back to
// unconditional widening.
const TINY: f64 = 1e-290;

/// Closed interval `[lo, hi]` with `lo ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalError {
    Malformed { lo: f64, hi: f64 },
}

impl fmt::Display for IntervalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalError::Malformed { lo, hi } => write!(f, "malformed interval [{lo}, {hi}]"),
        }
    }
}

impl core::error::Error for IntervalError {}

#[inline]
fn widen_both(x: f64) -> (f64, f64) {
    (x.next_down(), x.next_up())
}

#[inline]
fn bounds_from_error(r: f64, err: f64) -> (f64, f64) {
    if !r.is_finite() || r.abs() < TINY {
        widen_both(r)
    } else if err > 0.0 {
        (r, r.next_up())
    } else if err < 0.0 {
        (r.next_down(), r)
    } else {
        (r, r)
    }
}

/// Bounds on the exact sum `a + b`.
fn sum_bounds(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return widen_both(s);
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err > 0.0 {
        (s, s.next_up())
    } else if err < 0.0 {
        (s.next_down(), s)
    } else {
        (s, s)
    }
}

fn prod_bounds(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if a == 0.0 || b == 0.0 {
        return (p, p);
    }
    bounds_from_error(p, math::fma(a, b, -p))
}

fn quot_bounds(a: f64, b: f64) -> (f64, f64) {
    let q = a / b;
    if a == 0.0 {
        return (q, q);
    }
    // a − q·b carries the sign of the true residual; divide by sign(b).
    let r = math::fma(-q, b, a);
    bounds_from_error(q, if b > 0.0 { r } else { -r })
}

impl Interval {
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        // NaN fails the comparison.
        if lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(IntervalError::Malformed { lo, hi })
        }
    }

    /// Degenerate interval `[x, x]`.
    ///
    /// # Panics
    /// If `x` is NaN.
    pub fn point(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN is not an interval endpoint");
        Self { lo: x, hi: x }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    fn from_parts(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() {
            Self::ENTIRE
        } else {
            Self { lo, hi }
        }
    }

    pub fn abs(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            Self { lo: -self.hi, hi: -self.lo }
        } else {
            Self { lo: 0.0, hi: (-self.lo).max(self.hi) }
        }
    }

    pub fn square(self) -> Self {
        let a = self.abs();
        Self::from_parts(prod_bounds(a.lo, a.lo).0, prod_bounds(a.hi, a.hi).1)
    }

    pub fn max(self, other: Self) -> Self {
        Self { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }

    /// `None` when the divisor contains zero.
    pub fn checked_div(self, rhs: Self) -> Option<Self> {
        if rhs.contains_zero() {
            return None;
        }
        let c = [
            quot_bounds(self.lo, rhs.lo),
            quot_bounds(self.lo, rhs.hi),
            quot_bounds(self.hi, rhs.lo),
            quot_bounds(self.hi, rhs.hi),
        ];
        Some(Self::from_parts(
            c.iter().map(|b| b.0).fold(f64::INFINITY, f64::min),
            c.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max),
        ))
    }

    /// `self ≤ rhs` over every pair of points.
    pub fn le(self, rhs: Self) -> Tri {
        if self.hi <= rhs.lo {
            Tri::True
        } else if self.lo > rhs.hi {
            Tri::False
        } else {
            Tri::Unknown
        }
    }

    /// `self < rhs` over every pair of points.
    pub fn lt(self, rhs: Self) -> Tri {
        if self.hi < rhs.lo {
            Tri::True
        } else if self.lo >= rhs.hi {
            Tri::False
        } else {
            Tri::Unknown
        }
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::from_parts(sum_bounds(self.lo, rhs.lo).0, sum_bounds(self.hi, rhs.hi).1)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        self + (-rhs)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let c = [
            prod_bounds(self.lo, rhs.lo),
            prod_bounds(self.lo, rhs.hi),
            prod_bounds(self.hi, rhs.lo),
            prod_bounds(self.hi, rhs.hi),
        ];
        Interval::from_parts(
            c.iter().map(|b| b.0).fold(f64::INFINITY, f64::min),
            c.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// Three-valued (Kleene) truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    pub fn and(self, rhs: Tri) -> Tri {
        match (self, rhs) {
            (Tri::False, _) | (_, Tri::False) => Tri::False,
            (Tri::True, Tri::True) => Tri::True,
            _ => Tri::Unknown,
        }
    }

    pub fn or(self, rhs: Tri) -> Tri {
        match (self, rhs) {
            (Tri::True, _) | (_, Tri::True) => Tri::True,
            (Tri::False, Tri::False) => Tri::False,
            _ => Tri::Unknown,
        }
    }
}

impl Not for Tri {
    type Output = Tri;

    fn not(self) -> Tri {
        match self {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Unknown => Tri::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalVerdict {
    DefinitelyTrue,
    DefinitelyFalse,
    Unknown,
}

impl IntervalVerdict {
    /// Only `DefinitelyTrue` counts as a pass.
    pub fn passed(self) -> bool {
        self == IntervalVerdict::DefinitelyTrue
    }
}

impl From<Tri> for IntervalVerdict {
    fn from(t: Tri) -> Self {
        match t {
            Tri::True => IntervalVerdict::DefinitelyTrue,
            Tri::False => IntervalVerdict::DefinitelyFalse,
            Tri::Unknown => IntervalVerdict::Unknown,
        }
    }
}

/// Relative waypoint whose fields are known only up to intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalWaypoint {
    pub x: Interval,
    pub y: Interval,
    pub k: Interval,
    pub vl: Interval,
    pub vh: Interval,
}

impl IntervalWaypoint {
    pub fn point(wp: &crate::types::RelWaypoint) -> Self {
        Self {
            x: Interval::point(wp.x),
            y: Interval::point(wp.y),
            k: Interval::point(wp.k),
            vl: Interval::point(wp.vl),
            vh: Interval::point(wp.vh),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalReport {
    pub verdict: IntervalVerdict,
    /// First clause not known to hold; `None` when the verdict is definite true.
    pub first_unsettled: FailedClause,
}

struct Clauses {
    verdict: Tri,
    first: FailedClause,
}

impl Clauses {
    fn new() -> Self {
        Self { verdict: Tri::True, first: FailedClause::None }
    }

    fn push(&mut self, t: Tri, clause: FailedClause) {
        if t != Tri::True && self.first == FailedClause::None {
            self.first = clause;
        }
        self.verdict = self.verdict.and(t);
    }
}

/// Interval evaluation of `Feas ∧ Go`.
pub fn interval_eval_controller(wp: &IntervalWaypoint, v: Interval, a: Interval, p: &Params) -> IntervalReport {
    let pt = Interval::point;
    let eps = pt(p.eps());
    let (big_a, big_b, t) = (p.accel_max(), p.brake_max(), p.cycle_max());
    let mut c = Clauses::new();

    // Feas
    c.push((wp.k.abs() * eps).le(pt(1.0)), FailedClause::AnnScale);
    let residual = match (wp.k * (wp.x.square() + wp.y.square() - eps * eps)).checked_div(pt(2.0)) {
        Some(r) => (r - wp.y).abs().lt(eps),
        None => Tri::Unknown,
    };
    c.push(residual, FailedClause::AnnBand);
    c.push(wp.x.le(pt(0.0)).not(), FailedClause::Ahead);
    c.push(pt(0.0).le(wp.vl).and(wp.vl.lt(wp.vh)), FailedClause::LimitsOrder);
    let gap = wp.vh - wp.vl;
    c.push((pt(big_a) * pt(t)).le(gap), FailedClause::LimitGapA);
    c.push((pt(big_b) * pt(t)).le(gap), FailedClause::LimitGapB);

    // Go
    c.push((-pt(big_b)).le(a).and(a.le(pt(big_a))), FailedClause::AccelRange);
    let end = v + a * pt(t);
    c.push(pt(0.0).le(end), FailedClause::NonNegSpeed);
    let cf = pt(1.0) + wp.k.abs() * eps;
    let bloat = cf * cf;
    let dist = wp.x.abs().max(wp.y.abs());
    let travel = v * pt(t) + pt(0.5) * a * pt(t) * pt(t);

    let within_upper = v.le(wp.vh).and(end.le(wp.vh));
    let upper_far = match (end.square() - wp.vh * wp.vh).checked_div(pt(2.0) * pt(big_b)) {
        Some(tail) => (bloat * (travel + tail) + eps).le(dist),
        None => Tri::Unknown,
    };
    c.push(within_upper.or(upper_far), FailedClause::UpperSpeed);

    let within_lower = wp.vl.le(v).and(wp.vl.le(end));
    let lower_far = match (wp.vl * wp.vl - end.square()).checked_div(pt(2.0) * pt(big_a)) {
        Some(tail) => (bloat * (travel + tail) + eps).le(dist),
        None => Tri::Unknown,
    };
    c.push(within_lower.or(lower_far), FailedClause::LowerSpeed);

    IntervalReport { verdict: c.verdict.into(), first_unsettled: c.first }
}

//! Point-mode monitor formulas.
//!
//! The controller monitor is `Feas ∧ Go`, the plant monitor is the loop
//! invariant `J` plus the plant's domain constraints. Every check reports the
//! first clause that failed, in the fixed order of [`FailedClause`].

use core::fmt;

use crate::types::{inf_norm, Params, RelWaypoint};

/// Clauses of the monitor formulas, in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FailedClause {
    None,
    /// `|k|·ε ≤ 1`
    AnnScale,
    /// `|k(x²+y²−ε²)/2 − y| < ε`
    AnnBand,
    /// `x > 0`
    Ahead,
    /// `0 ≤ vl < vh`
    LimitsOrder,
    /// `A·T ≤ vh − vl`
    LimitGapA,
    /// `B·T ≤ vh − vl`
    LimitGapB,
    /// `−B ≤ a ≤ A`
    AccelRange,
    /// `v + a·T ≥ 0`
    NonNegSpeed,
    /// the upper speed-limit clause (Go) or `Lim(v, vh, B)` (J)
    UpperSpeed,
    /// the lower speed-limit clause (Go) or `Lim(vl, v, A)` (J)
    LowerSpeed,
    /// elapsed cycle time `≤ T`
    CycleTime,
    /// `v ≥ 0`
    PlantDomain,
}

impl FailedClause {
    pub const ALL: [FailedClause; 13] = [
        FailedClause::None,
        FailedClause::AnnScale,
        FailedClause::AnnBand,
        FailedClause::Ahead,
        FailedClause::LimitsOrder,
        FailedClause::LimitGapA,
        FailedClause::LimitGapB,
        FailedClause::AccelRange,
        FailedClause::NonNegSpeed,
        FailedClause::UpperSpeed,
        FailedClause::LowerSpeed,
        FailedClause::CycleTime,
        FailedClause::PlantDomain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FailedClause::None => "None",
            FailedClause::AnnScale => "AnnScale",
            FailedClause::AnnBand => "AnnBand",
            FailedClause::Ahead => "Ahead",
            FailedClause::LimitsOrder => "LimitsOrder",
            FailedClause::LimitGapA => "LimitGapA",
            FailedClause::LimitGapB => "LimitGapB",
            FailedClause::AccelRange => "AccelRange",
            FailedClause::NonNegSpeed => "NonNegSpeed",
            FailedClause::UpperSpeed => "UpperSpeed",
            FailedClause::LowerSpeed => "LowerSpeed",
            FailedClause::CycleTime => "CycleTime",
            FailedClause::PlantDomain => "PlantDomain",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for FailedClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Pass, or the first violated clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MonitorVerdict {
    failed: FailedClause,
}

impl MonitorVerdict {
    pub const PASS: MonitorVerdict = MonitorVerdict { failed: FailedClause::None };

    pub fn fail(clause: FailedClause) -> Self {
        Self { failed: clause }
    }

    #[inline]
    pub fn passed(&self) -> bool {
        self.failed == FailedClause::None
    }

    #[inline]
    pub fn failed_clause(&self) -> FailedClause {
        self.failed
    }

    /// Keeps the first failure.
    pub fn and_then(self, next: impl FnOnce() -> MonitorVerdict) -> MonitorVerdict {
        if self.passed() {
            next()
        } else {
            self
        }
    }

    fn check(self, ok: bool, clause: FailedClause) -> MonitorVerdict {
        if self.passed() && !ok {
            MonitorVerdict::fail(clause)
        } else {
            self
        }
    }
}

impl fmt::Display for MonitorVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            f.write_str("pass")
        } else {
            self.failed.fmt(f)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonitorError {
    NonPositiveAccel(f64),
}

impl fmt::Display for MonitorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonitorError::NonPositiveAccel(a) => write!(f, "acceleration bound must be > 0, got {a}"),
        }
    }
}

impl core::error::Error for MonitorError {}

// Comparisons loosened by a fixed absolute slack. Zero slack gives the exact
// formulas; numeric oracles use a tiny positive slack to absorb rounding.
#[derive(Clone, Copy)]
struct Cmp {
    slack: f64,
}

impl Cmp {
    const EXACT: Cmp = Cmp { slack: 0.0 };

    #[inline]
    fn le(self, a: f64, b: f64) -> bool {
        a <= b + self.slack
    }

    #[inline]
    fn lt(self, a: f64, b: f64) -> bool {
        a < b + self.slack
    }
}

/// Signed annulus residual `k(x²+y²−ε²)/2 − y`.
#[inline]
pub fn band_residual(x: f64, y: f64, k: f64, eps: f64) -> f64 {
    k * (x * x + y * y - eps * eps) / 2.0 - y
}

/// Squared bloat factor `(1 + |k|ε)²` for curved paths.
#[inline]
pub fn bloat_sq(k: f64, eps: f64) -> f64 {
    let c = 1.0 + k.abs() * eps;
    c * c
}

fn ann_verdict(wp: &RelWaypoint, eps: f64, cmp: Cmp) -> MonitorVerdict {
    MonitorVerdict::PASS
        .check(cmp.le(wp.k.abs() * eps, 1.0), FailedClause::AnnScale)
        .check(cmp.lt(band_residual(wp.x, wp.y, wp.k, eps).abs(), eps), FailedClause::AnnBand)
}

/// Whether the waypoint lies in the annular section of curvature `wp.k` and
/// half-width `eps`.
pub fn ann(wp: &RelWaypoint, eps: f64) -> bool {
    ann_verdict(wp, eps, Cmp::EXACT).passed()
}

fn limits_verdict(v: MonitorVerdict, wp: &RelWaypoint, p: &Params, cmp: Cmp) -> MonitorVerdict {
    let gap = wp.vh - wp.vl;
    v.check(cmp.le(0.0, wp.vl) && wp.vl < wp.vh, FailedClause::LimitsOrder)
        .check(cmp.le(p.accel_max() * p.cycle_max(), gap), FailedClause::LimitGapA)
        .check(cmp.le(p.brake_max() * p.cycle_max(), gap), FailedClause::LimitGapB)
}

/// Feasibility of a declared waypoint, curvature and speed interval.
pub fn feas(wp: &RelWaypoint, p: &Params) -> MonitorVerdict {
    let v = ann_verdict(wp, p.eps(), Cmp::EXACT).check(wp.x > 0.0, FailedClause::Ahead);
    limits_verdict(v, wp, p, Cmp::EXACT)
}

/// Distance needed to change speed from `v1` to `v2` at rate `acc` along a
/// bloated arc of curvature `k`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN
pub fn delta_lim(v1: f64, v2: f64, acc: f64, k: f64, eps: f64) -> Result<f64, MonitorError> {
    if !(acc > 0.0) {
        return Err(MonitorError::NonPositiveAccel(acc));
    }
    Ok(delta_lim_unchecked(v1, v2, acc, k, eps))
}

#[inline]
fn delta_lim_unchecked(v1: f64, v2: f64, acc: f64, k: f64, eps: f64) -> f64 {
    bloat_sq(k, eps) * ((v1 * v1 - v2 * v2) / (2.0 * acc))
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn lim_cmp(v1: f64, v2: f64, acc: f64, wp: &RelWaypoint, eps: f64, cmp: Cmp) -> bool {
    if !(acc > 0.0) {
        return false;
    }
    cmp.le(v1, v2) || cmp.le(delta_lim_unchecked(v1, v2, acc, wp.k, eps) + eps, inf_norm(wp.x, wp.y))
}

/// `v1 ≤ v2`, or the gap closes at rate `acc` before the goal region.
///
/// A non-positive `acc` is outside the contract and evaluates to `false`.
pub fn lim(v1: f64, v2: f64, acc: f64, wp: &RelWaypoint, eps: f64) -> bool {
    lim_cmp(v1, v2, acc, wp, eps, Cmp::EXACT)
}

/// Distance covered in one full cycle at constant acceleration.
#[inline]
pub fn cycle_distance(v: f64, a: f64, t: f64) -> f64 {
    v * t + 0.5 * a * t * t
}

/// Admissibility of acceleration `a` at speed `v` for the declared waypoint.
pub fn go(wp: &RelWaypoint, v: f64, a: f64, p: &Params) -> MonitorVerdict {
    let (big_a, big_b, t, eps) = (p.accel_max(), p.brake_max(), p.cycle_max(), p.eps());
    let end = v + a * t;
    let bloat = bloat_sq(wp.k, eps);
    let dist = inf_norm(wp.x, wp.y);
    let travel = cycle_distance(v, a, t);

    let upper =
        (v <= wp.vh && end <= wp.vh) || bloat * (travel + (end * end - wp.vh * wp.vh) / (2.0 * big_b)) + eps <= dist;
    let lower =
        (wp.vl <= v && wp.vl <= end) || bloat * (travel + (wp.vl * wp.vl - end * end) / (2.0 * big_a)) + eps <= dist;

    MonitorVerdict::PASS
        .check(-big_b <= a && a <= big_a, FailedClause::AccelRange)
        .check(end >= 0.0, FailedClause::NonNegSpeed)
        .check(upper, FailedClause::UpperSpeed)
        .check(lower, FailedClause::LowerSpeed)
}

fn invariant_cmp(wp: &RelWaypoint, v: f64, p: &Params, cmp: Cmp) -> MonitorVerdict {
    let verdict = limits_verdict(ann_verdict(wp, p.eps(), cmp), wp, p, cmp);
    verdict
        .check(lim_cmp(v, wp.vh, p.brake_max(), wp, p.eps(), cmp), FailedClause::UpperSpeed)
        .check(lim_cmp(wp.vl, v, p.accel_max(), wp, p.eps(), cmp), FailedClause::LowerSpeed)
}

/// Loop invariant: on the annulus, sane limits, and both speed limits still
/// reachable with full acceleration / braking.
pub fn invariant_j(wp: &RelWaypoint, v: f64, p: &Params) -> MonitorVerdict {
    invariant_cmp(wp, v, p, Cmp::EXACT)
}

/// [`invariant_j`] with every comparison loosened by `slack`.
pub fn invariant_j_with_slack(wp: &RelWaypoint, v: f64, p: &Params, slack: f64) -> MonitorVerdict {
    invariant_cmp(wp, v, p, Cmp { slack })
}

pub fn controller_monitor(wp: &RelWaypoint, v: f64, a: f64, p: &Params) -> MonitorVerdict {
    feas(wp, p).and_then(|| go(wp, v, a, p))
}

/// Checks the sensed post-cycle state against the modelled plant.
pub fn plant_monitor(wp: &RelWaypoint, v: f64, elapsed: f64, p: &Params) -> MonitorVerdict {
    invariant_j(wp, v, p)
        .check(elapsed <= p.cycle_max(), FailedClause::CycleTime)
        .check(v >= 0.0, FailedClause::PlantDomain)
}

/// Maximum braking, clamped so the robot stops no earlier than the end of
/// the cycle instead of reversing.
pub fn fallback_accel(v: f64, p: &Params) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    (-p.brake_max()).max(-v / p.cycle_max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn p(a: f64, b: f64, t: f64, eps: f64) -> Params {
        Params::new(a, b, t, eps).unwrap()
    }

    #[test]
    fn ann_examples() {
        assert!(ann(&RelWaypoint::new(5.0, 0.0, 0.0, 0.0, 1.0), 1.0));
        // residual |−0.4·14.25/2 + 3| = 0.15
        let wp = RelWaypoint::new(2.5, -3.0, -0.4, 0.0, 1.0);
        assert!((band_residual(wp.x, wp.y, wp.k, 1.0) - 0.15).abs() < 1e-12);
        assert!(ann(&wp, 1.0));
        assert!(!ann(&RelWaypoint::new(2.5, -3.0, 0.0, 0.0, 1.0), 1.0));
        let scale = RelWaypoint::new(1.0, 0.0, 1.5, 0.0, 1.0);
        assert!(!ann(&scale, 1.0));
        assert_eq!(ann_verdict(&scale, 1.0, Cmp::EXACT).failed_clause(), FailedClause::AnnScale);
    }

    #[test]
    fn feas_examples() {
        let p = p(1.0, 1.0, 0.5, 1.0);
        assert!(feas(&RelWaypoint::new(5.0, 0.0, 0.0, 1.0, 2.0), &p).passed());
        assert_eq!(feas(&RelWaypoint::new(-1.0, 0.0, 0.0, 1.0, 2.0), &p).failed_clause(), FailedClause::Ahead);
        assert_eq!(feas(&RelWaypoint::new(5.0, 0.0, 0.0, 2.0, 2.0), &p).failed_clause(), FailedClause::LimitsOrder);
        assert_eq!(feas(&RelWaypoint::new(5.0, 0.0, 0.0, 1.0, 1.4), &p).failed_clause(), FailedClause::LimitGapA);
        let pb = Params::new(0.5, 2.0, 0.5, 1.0).unwrap();
        assert_eq!(feas(&RelWaypoint::new(5.0, 0.0, 0.0, 1.0, 1.5), &pb).failed_clause(), FailedClause::LimitGapB);
    }

    #[test]
    fn delta_lim_examples() {
        assert_eq!(delta_lim(3.0, 1.0, 1.0, 0.0, 1.0).unwrap(), 4.0);
        assert_eq!(delta_lim(2.5, 2.5, 0.3, 0.7, 1.0).unwrap(), 0.0);
        assert_eq!(delta_lim(3.0, 1.0, 1.0, 1.0, 1.0).unwrap(), 16.0);
        assert!(delta_lim(3.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(delta_lim(3.0, 1.0, -1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn lim_examples() {
        let near = RelWaypoint::new(0.1, 0.0, 0.0, 0.0, 1.0);
        assert!(lim(1.0, 2.0, 1.0, &near, 0.5));
        assert!(lim(3.0, 1.0, 1.0, &RelWaypoint::new(5.0, 0.0, 0.0, 0.0, 1.0), 0.5));
        assert!(lim(3.0, 1.0, 1.0, &RelWaypoint::new(2.0, -5.0, 0.0, 0.0, 1.0), 0.5));
        assert!(!lim(3.0, 1.0, 1.0, &RelWaypoint::new(4.0, 0.0, 0.0, 0.0, 1.0), 0.5));
        assert!(!lim(3.0, 1.0, 0.0, &RelWaypoint::new(400.0, 0.0, 0.0, 0.0, 1.0), 0.5));
    }

    #[test]
    fn go_examples() {
        let p = p(1.0, 1.0, 0.5, 0.5);
        assert!(go(&RelWaypoint::new(5.0, 0.0, 0.0, 1.0, 2.0), 1.5, 0.0, &p).passed());
        // 2.375 + (4.5² − 2²)/2 = 10.5, plus ε = 11 ≤ 12
        assert!(go(&RelWaypoint::new(12.0, 0.0, 0.0, 1.0, 2.0), 5.0, -1.0, &p).passed());
        assert_eq!(
            go(&RelWaypoint::new(10.9, 0.0, 0.0, 1.0, 2.0), 5.0, -1.0, &p).failed_clause(),
            FailedClause::UpperSpeed
        );
        assert_eq!(
            go(&RelWaypoint::new(12.0, 0.0, 0.0, 1.0, 2.0), 1.5, 2.0, &p).failed_clause(),
            FailedClause::AccelRange
        );
        assert_eq!(
            go(&RelWaypoint::new(12.0, 0.0, 0.0, 1.0, 2.0), 0.2, -1.0, &p).failed_clause(),
            FailedClause::NonNegSpeed
        );
        // too slow and too close: 0.025 + 0.495 + 0.5 > 0.6
        assert_eq!(
            go(&RelWaypoint::new(0.6, 0.0, 0.0, 1.0, 2.0), 0.0, 0.2, &p).failed_clause(),
            FailedClause::LowerSpeed
        );
    }

    #[test]
    fn go_boundary_is_inclusive() {
        // required distance 10.5 + ε exactly
        let p = p(1.0, 1.0, 0.5, 0.5);
        assert!(go(&RelWaypoint::new(11.0, 0.0, 0.0, 1.0, 2.0), 5.0, -1.0, &p).passed());
        assert!(!go(&RelWaypoint::new(11.0 - 1e-12, 0.0, 0.0, 1.0, 2.0), 5.0, -1.0, &p).passed());
    }

    #[test]
    fn invariant_examples() {
        let p = p(1.0, 1.0, 0.5, 0.5);
        assert!(invariant_j(&RelWaypoint::new(12.0, 0.0, 0.0, 1.0, 2.0), 1.5, &p).passed());
        // δLim(5, 2, 1) = 10.5; 10.5 + 0.5 ≤ 12
        assert!(invariant_j(&RelWaypoint::new(12.0, 0.0, 0.0, 1.0, 2.0), 5.0, &p).passed());
        assert_eq!(
            invariant_j(&RelWaypoint::new(3.0, 0.0, 0.0, 1.0, 2.0), 5.0, &p).failed_clause(),
            FailedClause::UpperSpeed
        );
        assert_eq!(
            invariant_j(&RelWaypoint::new(0.9, 0.0, 0.0, 1.0, 2.0), 0.0, &p).failed_clause(),
            FailedClause::LowerSpeed
        );
    }

    #[test]
    fn slack_only_loosens() {
        let p = p(1.0, 1.0, 0.5, 0.5);
        let wp = RelWaypoint::new(11.0 - 1e-12, 0.0, 0.0, 1.0, 2.0);
        assert!(!invariant_j(&wp, 5.0, &p).passed());
        assert!(invariant_j_with_slack(&wp, 5.0, &p, 1e-9).passed());
    }

    #[test]
    fn controller_monitor_composition() {
        let p = p(1.0, 1.0, 0.5, 0.5);
        assert!(controller_monitor(&RelWaypoint::new(12.0, 0.0, 0.0, 1.0, 2.0), 5.0, -1.0, &p).passed());
        // feasibility failure dominates a go failure
        assert_eq!(
            controller_monitor(&RelWaypoint::new(-1.0, 0.0, 0.0, 1.0, 2.0), 1.5, 2.0, &p).failed_clause(),
            FailedClause::Ahead
        );
        assert_eq!(
            controller_monitor(&RelWaypoint::new(10.9, 0.0, 0.0, 1.0, 2.0), 5.0, -1.0, &p).failed_clause(),
            FailedClause::UpperSpeed
        );
    }

    #[test]
    fn plant_monitor_examples() {
        let p = p(1.0, 1.0, 0.5, 0.5);
        let wp = RelWaypoint::new(12.0, 0.0, 0.0, 1.0, 2.0);
        assert!(plant_monitor(&wp, 1.5, 0.4, &p).passed());
        assert_eq!(plant_monitor(&wp, 1.5, 0.6, &p).failed_clause(), FailedClause::CycleTime);
        assert_eq!(plant_monitor(&wp, -0.1, 0.4, &p).failed_clause(), FailedClause::PlantDomain);
    }

    #[test]
    fn fallback_examples() {
        let p = p(1.0, 1.0, 0.5, 1.0);
        assert_eq!(fallback_accel(5.0, &p), -1.0);
        assert!((fallback_accel(0.3, &p) + 0.6).abs() < 1e-15);
        assert_eq!(fallback_accel(0.0, &p), 0.0);
    }

    #[test]
    fn clause_names_round_trip() {
        for c in FailedClause::ALL {
            assert_eq!(FailedClause::from_name(c.name()), Some(c));
        }
        assert_eq!(MonitorVerdict::PASS.to_string(), "pass");
    }

    proptest! {
        #[test]
        fn fallback_admissible(v in 0.0f64..100.0, b in 0.1f64..10.0, t in 0.01f64..2.0) {
            let p = Params::new(1.0, b, t, 1.0).unwrap();
            let a = fallback_accel(v, &p);
            prop_assert!(-b <= a && a <= 0.0);
            prop_assert!(v + a * t >= -1e-12);
            prop_assert!(v + a * t <= v);
        }

        #[test]
        fn controller_is_feas_and_go(
            x in -5.0f64..50.0, y in -5.0f64..5.0, k in -1.5f64..1.5,
            vl in 0.0f64..5.0, width in 0.0f64..5.0, v in 0.0f64..10.0, a in -3.0f64..3.0,
        ) {
            let p = Params::new(1.0, 2.0, 0.25, 1.0).unwrap();
            let wp = RelWaypoint::new(x, y, k, vl, vl + width);
            let both = feas(&wp, &p).passed() && go(&wp, v, a, &p).passed();
            prop_assert_eq!(controller_monitor(&wp, v, a, &p).passed(), both);
        }

        #[test]
        fn go_monotone_in_distance(
            d0 in 0.0f64..60.0, extra in 0.0f64..60.0, v in 0.0f64..10.0, a in -2.0f64..1.0,
            vl in 0.0f64..3.0, width in 1.0f64..5.0,
        ) {
            let p = Params::new(1.0, 2.0, 0.5, 0.5).unwrap();
            let near = RelWaypoint::new(d0, 0.0, 0.0, vl, vl + width);
            if go(&near, v, a, &p).passed() {
                let far = near.with_pos(d0 + extra, 0.0);
                prop_assert!(go(&far, v, a, &p).passed());
            }
        }
    }
}

//! Numeric oracles for the monitor formulas.
//!
//! Each check draws states from a seeded sampler, flows them with the exact
//! closed-form plant and tests a property that the formulas promise. A
//! reported violation carries the offending sample as a witness.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use safenet_core::controllers::liveness_accel;
use safenet_core::dynamics::{closed_form_relative, RelPoint};
use safenet_core::monitor::{bloat_sq, feas, go, invariant_j, invariant_j_with_slack};
use safenet_core::{inf_norm, FailedClause, Params, RelWaypoint};

use crate::derive_seed;

/// Slack on clause comparisons when re-checking flowed states.
pub const CLAUSE_SLACK: f64 = 1e-9;
const MAX_WITNESSES: usize = 8;
const MAX_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSample {
    pub wp: RelWaypoint,
    pub v: f64,
    pub a: f64,
    pub p: Params,
    pub seed: u64,
}

/// Sampling ranges. The defaults cover the operating envelope of all
/// built-in courses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub eps: (f64, f64),
    pub cycle: (f64, f64),
    pub accel: (f64, f64),
    pub max_speed: f64,
    /// Longest arc from the robot to the sampled waypoint, m.
    pub max_path: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { eps: (0.1, 2.0), cycle: (0.05, 1.0), accel: (0.5, 4.0), max_speed: 40.0, max_path: 400.0 }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

impl SamplerConfig {
    fn params(&self, rng: &mut ChaCha8Rng) -> Params {
        let a = uniform(rng, self.accel);
        let b = uniform(rng, self.accel);
        let t = uniform(rng, self.cycle);
        let eps = uniform(rng, self.eps);
        Params::new(a, b, t, eps).expect("sampled parameters are positive")
    }

    /// Curvature with `|k|·ε ≤ 1`; a quarter of the draws are straight.
    fn curvature(&self, rng: &mut ChaCha8Rng, eps: f64) -> f64 {
        if rng.gen_bool(0.25) {
            return 0.0;
        }
        // log-uniform magnitude between 1/max_path and 1/ε
        let lo = (1.0 / self.max_path).ln();
        let hi = (1.0 / eps).ln();
        let mag = rng.gen_range(lo..=hi).exp().min(1.0 / eps);
        if rng.gen_bool(0.5) {
            mag
        } else {
            -mag
        }
    }

    /// A point of the annulus of curvature `k` with `x > 0`.
    fn ann_point(&self, rng: &mut ChaCha8Rng, k: f64, eps: f64) -> RelPoint {
        let offset = rng.gen_range(-eps..eps);
        if k == 0.0 {
            return RelPoint::new(rng.gen_range(0.0..self.max_path).max(1e-6), offset);
        }
        let r0 = 1.0 / k.abs();
        let rho = (r0 + offset).max(0.0);
        // angle swept from the robot's side of the circle, kept below π for x > 0
        let theta_max = (self.max_path / r0).min(PI);
        let theta = rng.gen_range(0.0..theta_max).max(1e-9);
        let y = r0 - rho * theta.cos();
        RelPoint::new(rho * theta.sin(), if k > 0.0 { y } else { -y })
    }

    fn limits(&self, rng: &mut ChaCha8Rng, p: &Params) -> (f64, f64) {
        let min_gap = p.accel_max().max(p.brake_max()) * p.cycle_max();
        let vl = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..0.75 * self.max_speed) };
        let gap = min_gap + rng.gen_range(0.0..0.5 * self.max_speed);
        (vl, vl + gap)
    }

    /// Speeds near the limits of `J` are favoured so boundary cases occur.
    fn speed(&self, rng: &mut ChaCha8Rng, wp: &RelWaypoint, p: &Params) -> f64 {
        let room = inf_norm(wp.x, wp.y) - p.eps();
        let bloat = bloat_sq(wp.k, p.eps());
        let nudge = 1.0 - rng.gen_range(0.0..1e-6);
        match rng.gen_range(0..4) {
            0 if room > 0.0 => (wp.vh * wp.vh + 2.0 * p.brake_max() * room / bloat).sqrt() * nudge,
            1 if room > 0.0 => (wp.vl * wp.vl - 2.0 * p.accel_max() * room / bloat).max(0.0).sqrt() / nudge,
            2 => rng.gen_range(wp.vl..=wp.vh),
            _ => rng.gen_range(0.0..self.max_speed),
        }
    }

    fn accel(&self, rng: &mut ChaCha8Rng, wp: &RelWaypoint, v: f64, p: &Params) -> f64 {
        let a = rng.gen_range(-p.brake_max()..=p.accel_max());
        if !go(wp, v, a, p).passed() || rng.gen_bool(0.5) {
            return a;
        }
        // walk to the edge of the admissible set in a random direction
        let bound = if rng.gen_bool(0.5) { p.accel_max() } else { -p.brake_max() };
        if go(wp, v, bound, p).passed() {
            return bound;
        }
        let (mut pass, mut fail) = (a, bound);
        for _ in 0..60 {
            let mid = 0.5 * (pass + fail);
            if go(wp, v, mid, p).passed() {
                pass = mid;
            } else {
                fail = mid;
            }
        }
        pass
    }

    fn candidate(&self, rng: &mut ChaCha8Rng) -> (RelWaypoint, f64, f64, Params) {
        let p = self.params(rng);
        let k = self.curvature(rng, p.eps());
        let pt = self.ann_point(rng, k, p.eps());
        let (vl, vh) = self.limits(rng, &p);
        let wp = RelWaypoint::new(pt.x, pt.y, k, vl, vh);
        let v = self.speed(rng, &wp, &p);
        let a = self.accel(rng, &wp, v, &p);
        (wp, v, a, p)
    }

    /// Rejection-samples a state satisfying `J ∧ Feas ∧ Go` and any extra
    /// predicate; the predicate is re-checked before returning.
    pub fn monitored_state(&self, seed: u64, extra: impl Fn(&RelWaypoint, f64, f64, &Params) -> bool) -> StateSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..MAX_ATTEMPTS {
            let (wp, v, a, p) = self.candidate(&mut rng);
            if monitored(&wp, v, a, &p) && extra(&wp, v, a, &p) {
                return StateSample { wp, v, a, p, seed };
            }
        }
        panic!("sampler found no admissible state for seed {seed}");
    }
}

fn monitored(wp: &RelWaypoint, v: f64, a: f64, p: &Params) -> bool {
    invariant_j(wp, v, p).passed() && feas(wp, p).passed() && go(wp, v, a, p).passed()
}

fn flow(s: &StateSample, t: f64) -> (RelWaypoint, f64) {
    let (pt, v) = closed_form_relative(RelPoint::new(s.wp.x, s.wp.y), s.v, s.a, s.wp.k, t);
    (s.wp.with_pos(pt.x, pt.y), v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub sample: StateSample,
    pub time: f64,
    pub clause: FailedClause,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub samples: usize,
    pub violations: usize,
    pub witnesses: Vec<Witness>,
}

pub fn check_invariant_preservation(n: usize, seed: u64) -> InvariantReport {
    check_invariant_preservation_with(&SamplerConfig::default(), n, seed)
}

/// Evaluates `J` at 100 evenly spaced times of `[0, T]` along the exact flow
/// of each sampled `J ∧ Feas ∧ Go` state.
pub fn check_invariant_preservation_with(cfg: &SamplerConfig, n: usize, seed: u64) -> InvariantReport {
    let found: Vec<Witness> = (0..n)
        .into_par_iter()
        .filter_map(|i| {
            let s = cfg.monitored_state(derive_seed(seed, i as u64), |_, _, _, _| true);
            let t_max = s.p.cycle_max();
            (0..100).find_map(|j| {
                let t = t_max * j as f64 / 99.0;
                let (wp, v) = flow(&s, t);
                let verdict = invariant_j_with_slack(&wp, v, &s.p, CLAUSE_SLACK);
                (!verdict.passed()).then_some(Witness { sample: s, time: t, clause: verdict.failed_clause() })
            })
        })
        .collect();
    InvariantReport { samples: n, violations: found.len(), witnesses: found.into_iter().take(MAX_WITNESSES).collect() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgressCase {
    /// below `vl`, full acceleration; `g = vl − v`
    Speedup,
    /// inside the limits, coasting; `g = x² + y² − ε²`
    Cruise,
    /// above `vh`, full braking; `g = v − vh`
    Slowdown,
}

impl ProgressCase {
    pub const ALL: [ProgressCase; 3] = [ProgressCase::Speedup, ProgressCase::Cruise, ProgressCase::Slowdown];

    pub fn name(self) -> &'static str {
        match self {
            ProgressCase::Speedup => "speedup",
            ProgressCase::Cruise => "cruise",
            ProgressCase::Slowdown => "slowdown",
        }
    }

    fn measure(self, wp: &RelWaypoint, v: f64, eps: f64) -> f64 {
        match self {
            ProgressCase::Speedup => wp.vl - v,
            ProgressCase::Cruise => wp.x * wp.x + wp.y * wp.y - eps * eps,
            ProgressCase::Slowdown => v - wp.vh,
        }
    }

    fn in_region(self, wp: &RelWaypoint, v: f64) -> bool {
        match self {
            ProgressCase::Speedup => v < wp.vl && v > 0.0,
            ProgressCase::Cruise => wp.vl <= v && v <= wp.vh && v > 0.0,
            ProgressCase::Slowdown => v > wp.vh,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgressReport {
    pub case: ProgressCase,
    pub samples: usize,
    pub violations: usize,
    /// Smallest decrease of `g` over one cycle among all samples.
    pub min_decrease: f64,
    pub witnesses: Vec<Witness>,
}

/// Checks that the case's progress function strictly decreases along the
/// exact flow under the liveness controller's choice, until the case's
/// target set is reached.
pub fn check_progress(case: ProgressCase, n: usize, seed: u64) -> ProgressReport {
    let cfg = SamplerConfig::default();
    let results: Vec<(f64, Option<Witness>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = cfg.monitored_state(derive_seed(seed, i as u64), |wp, v, _, p| {
                case.in_region(wp, v) && case.measure(wp, v, p.eps()) > 0.0
            });
            s.a = liveness_accel(s.v, s.wp.vl, s.wp.vh, s.p.accel_max(), s.p.brake_max());
            let eps = s.p.eps();
            let steps = 100;
            let mut prev = case.measure(&s.wp, s.v, eps);
            let g0 = prev;
            let mut witness = None;
            for j in 1..=steps {
                let t = s.p.cycle_max() * j as f64 / steps as f64;
                let (wp, v) = flow(&s, t);
                let g = case.measure(&wp, v, eps);
                let (before, v_before) = flow(&s, s.p.cycle_max() * (j - 1) as f64 / steps as f64);
                let outside = prev > 0.0 && (case != ProgressCase::Cruise || before.x > 0.0);
                if outside && g >= prev && case == ProgressCase::Cruise {
                    // the goal ball may have been crossed between two samples
                    let h = s.p.cycle_max() / steps as f64;
                    let s_end = if v_before + s.a * h < 0.0 {
                        v_before * v_before / (-2.0 * s.a)
                    } else {
                        v_before * h + 0.5 * s.a * h * h
                    };
                    let q = closest_approach(RelPoint::new(before.x, before.y), s.wp.k, s_end);
                    let (c, _) = closed_form_relative(RelPoint::new(before.x, before.y), 1.0, 0.0, s.wp.k, q);
                    if c.x * c.x + c.y * c.y - eps * eps <= 0.0 {
                        prev = 0.0;
                        break;
                    }
                }
                if outside && g >= prev {
                    witness.get_or_insert(Witness { sample: s, time: t, clause: FailedClause::None });
                }
                if !outside {
                    break;
                }
                prev = g;
            }
            (g0 - prev.max(0.0), witness)
        })
        .collect();
    let min_decrease = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let witnesses: Vec<Witness> = results.into_iter().filter_map(|r| r.1).collect();
    ProgressReport {
        case,
        samples: n,
        violations: witnesses.len(),
        min_decrease,
        witnesses: witnesses.into_iter().take(MAX_WITNESSES).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoOracleReport {
    pub samples: usize,
    pub violations: usize,
    /// Smallest `inf_norm − ε − distance` over all samples.
    pub min_margin: f64,
    pub witnesses: Vec<Witness>,
}

/// Distance covered while holding `a` for `t_hold` and then braking at `b`
/// until speed is at most `vh`, by fine time stepping. Speed is piecewise
/// linear, so each trapezoid step is exact and only the last step is cut at
/// the crossing time.
pub fn hold_then_brake_distance(v0: f64, a: f64, t_hold: f64, b: f64, vh: f64, steps: usize) -> f64 {
    let mut d = 0.0;
    let mut v = v0;
    let h = t_hold / steps as f64;
    for _ in 0..steps {
        let v_next = v + a * h;
        d += 0.5 * (v + v_next) * h;
        v = v_next;
    }
    if v <= vh {
        // crossed during the hold phase with a < 0: nothing left to brake
        return d;
    }
    let t_brake = (v - vh) / b;
    let h = t_brake / steps as f64;
    for _ in 0..steps {
        let v_next = v - b * h;
        d += 0.5 * (v + v_next) * h;
        v = v_next;
    }
    d
}

/// For straight-line states where Go admits `a` with `v + aT > vh`, checks
/// that holding `a` for `T` and then braking fully reaches `vh` before the
/// goal region.
pub fn go_oracle(n: usize, seed: u64) -> GoOracleReport {
    let cfg = SamplerConfig::default();
    let results: Vec<(f64, Option<Witness>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let s = loop {
                let p = cfg.params(&mut rng);
                let pt = cfg.ann_point(&mut rng, 0.0, p.eps());
                let (vl, vh) = cfg.limits(&mut rng, &p);
                let wp = RelWaypoint::new(pt.x, pt.y, 0.0, vl, vh);
                let v = rng.gen_range(0.0..cfg.max_speed);
                let a = cfg.accel(&mut rng, &wp, v, &p);
                if feas(&wp, &p).passed() && go(&wp, v, a, &p).passed() && v + a * p.cycle_max() > vh {
                    break StateSample { wp, v, a, p, seed: i as u64 };
                }
            };
            let t = s.p.cycle_max();
            let d = hold_then_brake_distance(s.v, s.a, t, s.p.brake_max(), s.wp.vh, 1000);
            let allowed = inf_norm(s.wp.x, s.wp.y) - s.p.eps();
            let margin = allowed - d;
            let tol = 1e-9 * allowed.abs().max(1.0);
            let witness = (margin < -tol).then_some(Witness { sample: s, time: t, clause: FailedClause::UpperSpeed });
            (margin, witness)
        })
        .collect();
    let min_margin = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let witnesses: Vec<Witness> = results.into_iter().filter_map(|r| r.1).collect();
    GoOracleReport {
        samples: n,
        violations: witnesses.len(),
        min_margin,
        witnesses: witnesses.into_iter().take(MAX_WITNESSES).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LivenessReport {
    pub runs: usize,
    pub reached: usize,
    /// Largest ratio of cycles used to the cycle bound.
    pub worst_bound_ratio: f64,
    pub failures: Vec<StateSample>,
}

/// Time to drive arc length `s` from speed `v` at acceleration `a`.
fn time_for_distance(v: f64, a: f64, s: f64) -> f64 {
    if a == 0.0 {
        return s / v;
    }
    let disc = (v * v + 2.0 * a * s).max(0.0);
    // rationalized root, stable for small a
    2.0 * s / (v + disc.sqrt())
}

/// Arc length within `[0, s_end]` at which the waypoint passes closest to
/// the robot while following curvature `k`.
fn closest_approach(pt: RelPoint, k: f64, s_end: f64) -> f64 {
    let dist_at = |s: f64| {
        let (p, _) = closed_form_relative(pt, 1.0, 0.0, k, s);
        p.x * p.x + p.y * p.y
    };
    let mut candidates = vec![0.0, s_end];
    if k == 0.0 {
        candidates.push(pt.x.clamp(0.0, s_end));
    } else {
        // |p(u)|² is sinusoidal in the rotation u = −k·s
        let (qx, qy) = (pt.x, pt.y - 1.0 / k);
        let phi = qx.atan2(qy);
        let base = if k > 0.0 { phi + PI } else { phi };
        let period = 2.0 * PI / k.abs();
        // s for which −k·s ≡ base (mod 2π)
        let s0 = (-base / k).rem_euclid(period);
        let mut s = s0;
        while s <= s_end {
            candidates.push(s);
            s += period;
        }
    }
    candidates.into_iter().min_by(|a, b| dist_at(*a).total_cmp(&dist_at(*b))).unwrap_or(0.0)
}

/// Runs the three-case reference controller from sampled `J ∧ Feas` states
/// with `v > 0` and `vl > 0` on the exact flow, following the declared arc,
/// until the goal region is entered within the speed limits.
pub fn check_liveness(n: usize, seed: u64) -> LivenessReport {
    let cfg = SamplerConfig::default();
    let results: Vec<(bool, f64, StateSample)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = cfg.monitored_state(derive_seed(seed, i as u64), |wp, v, _, _| v > 0.0 && wp.vl > 0.0);
            let p = s.p;
            let eps = p.eps();
            let bound = (10.0 * inf_norm(s.wp.x, s.wp.y) / (s.wp.vl * p.cycle_max())).ceil() as u64;
            let mut pt = RelPoint::new(s.wp.x, s.wp.y);
            let mut v = s.v;
            let inside = |q: RelPoint, v: f64| q.norm() <= eps && s.wp.vl <= v && v <= s.wp.vh;
            for cycle in 0..bound.max(1) {
                let a = liveness_accel(v, s.wp.vl, s.wp.vh, p.accel_max(), p.brake_max());
                let t = p.cycle_max();
                let t_run = if a < 0.0 { t.min(v / -a) } else { t };
                let s_end = v * t_run + 0.5 * a * t_run * t_run;
                let s_best = closest_approach(pt, s.wp.k, s_end);
                let t_best = time_for_distance(v, a, s_best).min(t_run);
                let (q, vq) = closed_form_relative(pt, v, a, s.wp.k, t_best);
                if inside(q, vq) {
                    return (true, (cycle + 1) as f64 / bound as f64, s);
                }
                let (next, v_next) = closed_form_relative(pt, v, a, s.wp.k, t);
                pt = next;
                v = v_next;
                if inside(pt, v) {
                    return (true, (cycle + 1) as f64 / bound as f64, s);
                }
            }
            (false, 1.0, s)
        })
        .collect();
    LivenessReport {
        runs: n,
        reached: results.iter().filter(|r| r.0).count(),
        worst_bound_ratio: results.iter().filter(|r| r.0).map(|r| r.1).fold(0.0, f64::max),
        failures: results.into_iter().filter(|r| !r.0).map(|r| r.2).take(MAX_WITNESSES).collect(),
    }
}

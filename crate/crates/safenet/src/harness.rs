//! Monitored episode loop and result aggregation.
//!
//! One cycle: sense, propose, run the controller monitor, act (or brake),
//! integrate the disturbed world for a jittered duration of at most `T`,
//! re-sense and run the plant monitor.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use safenet_core::controllers::{bang_bang, choose_accel, cross_track_error, liveness_accel, pd, PdGains};
use safenet_core::dynamics::{to_relative, world_step_n, Disturbance, RelPoint, WorldPoint, DEFAULT_SUBSTEPS};
use safenet_core::interval::{interval_eval_controller, Interval, IntervalWaypoint};
use safenet_core::monitor::{controller_monitor, fallback_accel, plant_monitor};
use safenet_core::plan::{next_target, BranchPolicy, EpisodeEnd, FirstBranch, PlanGraph};
use safenet_core::{MonitorVerdict, Params, RelWaypoint};
use thiserror::Error;

use crate::derive_seed;
use crate::log::LogRow;
use crate::policy::SeededBranch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    BangBang,
    Pd1,
    Pd2,
    Pd3,
    Liveness,
    /// Always proposes full acceleration; exercises the fallback.
    Adversarial,
}

#[derive(Debug, Error)]
#[error("unknown controller {0:?} (expected bangbang, pd1, pd2, pd3, liveness or adversarial)")]
pub struct UnknownController(String);

impl ControllerKind {
    pub const ALL: [ControllerKind; 6] = [
        ControllerKind::BangBang,
        ControllerKind::Pd1,
        ControllerKind::Pd2,
        ControllerKind::Pd3,
        ControllerKind::Liveness,
        ControllerKind::Adversarial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::BangBang => "bangbang",
            ControllerKind::Pd1 => "pd1",
            ControllerKind::Pd2 => "pd2",
            ControllerKind::Pd3 => "pd3",
            ControllerKind::Liveness => "liveness",
            ControllerKind::Adversarial => "adversarial",
        }
    }

    fn pd_profile(self) -> Option<PdProfile> {
        match self {
            ControllerKind::Pd1 => Some(PdProfile { gain: 1.0, damping: 0.05, speed_fraction: 0.35 }),
            ControllerKind::Pd2 => Some(PdProfile { gain: 0.8, damping: 0.05, speed_fraction: 0.55 }),
            ControllerKind::Pd3 => Some(PdProfile { gain: 1.3, damping: 0.1, speed_fraction: 0.8 }),
            _ => None,
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControllerKind {
    type Err = UnknownController;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| UnknownController(s.to_string()))
    }
}

/// PD gains are scaled by `2/(r² − ε²)`, the inverse sensitivity of the band
/// residual to curvature, so `gain = 1` steers exactly onto the arc through
/// the target regardless of its distance.
#[derive(Debug, Clone, Copy)]
struct PdProfile {
    gain: f64,
    damping: f64,
    speed_fraction: f64,
}

const BANG_DEADBAND: f64 = 0.1;
/// Bang-bang steering offset as a multiple of the sharpest curvature in the plan.
const BANG_AUTHORITY: f64 = 1.5;
const BANG_SPEED_FRACTION: f64 = 0.55;

/// Disturbance magnitudes used when none are given.
pub const DEFAULT_DISTURBANCE: Disturbance = Disturbance {
    curvature_gain_error: 0.05,
    curvature_bias: 0.005,
    accel_gain_error: 0.05,
    cycle_jitter: 0.2,
    seed: 0,
};

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    /// Label of the course, carried into reports.
    pub env: String,
    pub controller: ControllerKind,
    pub params: Params,
    /// Magnitudes; each episode draws its gain and bias errors uniformly
    /// from `±magnitude`.
    pub disturbance: Disturbance,
    pub max_cycles: u32,
    pub seed: u64,
    pub interval_mode: bool,
    /// Pick uniformly among successors at branching nodes instead of the
    /// first one.
    pub random_branches: bool,
    /// Diagnostic switch: with `false` every proposal is acted on.
    pub monitor: bool,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("max cycles must be positive")]
    ZeroCycles,
    #[error("plan has no edge leaving the start node")]
    NoStartEdge,
}

impl EpisodeConfig {
    pub fn validate(&self, graph: &PlanGraph) -> Result<(), ConfigError> {
        if self.max_cycles == 0 {
            return Err(ConfigError::ZeroCycles);
        }
        if graph.successors(graph.start()).is_empty() {
            return Err(ConfigError::NoStartEdge);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeReport {
    pub env: String,
    pub controller: ControllerKind,
    pub seed: u64,
    pub completed: bool,
    pub cycles: u32,
    pub distance: f64,
    pub time: f64,
    pub avg_speed: f64,
    pub ctrl_failures: u32,
    pub plant_failures: u32,
    pub ctrl_fail_rate: f64,
    pub plant_fail_rate: f64,
    pub safety_violations: u32,
    pub fallback_engagements: u32,
    /// The subset of `safety_violations` below `vl` in a cycle where the
    /// fallback acted.
    pub below_vl_at_goal: u32,
    /// Every controller and plant verdict of the episode passed.
    pub all_monitors_passed: bool,
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub report: EpisodeReport,
    pub log: Vec<LogRow>,
}

/// Waypoint judged by the last passing controller-monitor call.
#[derive(Debug, Clone, Copy)]
struct InForce {
    world: WorldPoint,
    k: f64,
    vl: f64,
    vh: f64,
}

fn sample_disturbance(mag: &Disturbance, rng: &mut ChaCha8Rng) -> Disturbance {
    let mut draw = |m: f64| if m > 0.0 { rng.gen_range(-m..=m) } else { 0.0 };
    Disturbance {
        curvature_gain_error: draw(mag.curvature_gain_error),
        curvature_bias: draw(mag.curvature_bias),
        accel_gain_error: draw(mag.accel_gain_error),
        cycle_jitter: mag.cycle_jitter,
        seed: mag.seed,
    }
}

fn ctrl_verdict(wp: &RelWaypoint, v: f64, a: f64, p: &Params, interval: bool) -> MonitorVerdict {
    if !interval {
        return controller_monitor(wp, v, a, p);
    }
    let r = interval_eval_controller(&IntervalWaypoint::point(wp), Interval::point(v), Interval::point(a), p);
    if r.verdict.passed() {
        MonitorVerdict::PASS
    } else {
        MonitorVerdict::fail(r.first_unsettled)
    }
}

pub fn run_episode(cfg: &EpisodeConfig, graph: &PlanGraph) -> Result<EpisodeOutcome, ConfigError> {
    cfg.validate(graph)?;
    let p = &cfg.params;
    let eps = p.eps();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dist = sample_disturbance(&cfg.disturbance, &mut rng);
    let mut first = FirstBranch;
    let mut seeded = SeededBranch::new(derive_seed(cfg.seed, u64::MAX));
    let policy: &mut dyn BranchPolicy = if cfg.random_branches { &mut seeded } else { &mut first };
    let bang_kappa = BANG_AUTHORITY * graph.max_abs_curvature();

    let mut edge = graph.start_edge(policy).ok_or(ConfigError::NoStartEdge)?;
    let mut pose = graph.start_pose(edge);
    let mut v = 0.0_f64;
    let mut clock = 0.0_f64;
    let mut distance = 0.0_f64;
    let mut prev_e: Option<f64> = None;
    let mut last_dt = p.cycle_max();
    let mut in_force: Option<InForce> = None;
    let mut plant_failed_last = false;

    let mut log = Vec::new();
    let mut completed = false;
    let mut cycles = 0u32;
    let (mut ctrl_failures, mut plant_failures) = (0u32, 0u32);
    let (mut violations, mut fallbacks, mut below_vl) = (0u32, 0u32, 0u32);
    let mut all_passed = true;

    while cycles < cfg.max_cycles {
        let target = match next_target(graph, edge, &pose, p, policy) {
            Ok(t) => t,
            Err(EpisodeEnd::Completed) => {
                completed = true;
                break;
            }
            Err(EpisodeEnd::Stuck) => break,
        };
        edge = target.edge;
        let wp = target.waypoint;
        let rel = RelPoint::new(wp.x, wp.y);
        if target.advanced {
            prev_e = None;
        }

        // untrusted proposal
        let speed_target = |frac: f64| wp.vl + frac * (wp.vh - wp.vl);
        let (kappa_prop, a_prop) = match cfg.controller {
            ControllerKind::BangBang => (
                bang_bang(rel, target.k_seg, eps, BANG_DEADBAND * eps, bang_kappa),
                choose_accel(&wp, v, p, speed_target(BANG_SPEED_FRACTION)),
            ),
            ControllerKind::Pd1 | ControllerKind::Pd2 | ControllerKind::Pd3 => {
                let prof = cfg.controller.pd_profile().expect("pd controller has a profile");
                let scale = 2.0 / (rel.x * rel.x + rel.y * rel.y - eps * eps).max(eps * eps);
                let gains = PdGains::new(prof.gain * scale, prof.damping * scale, 1.0 / eps)
                    .expect("scheduled gains are non-negative");
                let e = cross_track_error(rel, target.k_seg, eps);
                let kappa = pd(rel, prev_e.unwrap_or(e), last_dt, target.k_seg, eps, &gains);
                prev_e = Some(e);
                (kappa, choose_accel(&wp, v, p, speed_target(prof.speed_fraction)))
            }
            ControllerKind::Liveness => (wp.k, liveness_accel(v, wp.vl, wp.vh, p.accel_max(), p.brake_max())),
            ControllerKind::Adversarial => (wp.k, p.accel_max()),
        };

        let ctrl = ctrl_verdict(&wp, v, a_prop, p, cfg.interval_mode);
        let current = InForce { world: target.world, k: wp.k, vl: wp.vl, vh: wp.vh };
        let (mut a_act, mut kappa_act, mut force) = (a_prop, kappa_prop, current);
        let mut fallback = false;
        if !ctrl.passed() {
            ctrl_failures += 1;
            all_passed = false;
            if cfg.monitor {
                // the rejected proposal is discarded entirely
                force = in_force.unwrap_or(current);
                a_act = fallback_accel(v, p);
                kappa_act = force.k;
                fallback = true;
            }
        } else {
            in_force = Some(current);
        }
        if cfg.monitor && plant_failed_last && !fallback {
            a_act = fallback_accel(v, p);
            kappa_act = force.k;
            fallback = true;
        }
        if fallback {
            fallbacks += 1;
        }

        let row_start = (clock, pose, v);
        let duration = p.cycle_max() * (1.0 - dist.cycle_jitter * rng.gen::<f64>());
        let h = duration / DEFAULT_SUBSTEPS as f64;
        let goal = graph.edge_end(edge);
        let mut steps = 0;
        while steps < DEFAULT_SUBSTEPS {
            let (next, v_next) = world_step_n(pose, v, kappa_act, a_act, h, &dist, 1);
            distance += (next.x - pose.x).hypot(next.y - pose.y);
            pose = next;
            v = v_next;
            steps += 1;
            if (pose.x - goal.x).hypot(pose.y - goal.y) <= eps {
                break;
            }
        }
        // a sum of substeps may round past the cycle bound
        let elapsed = (h * steps as f64).min(duration);
        clock += elapsed;
        last_dt = elapsed;

        let frel = to_relative(&pose, force.world);
        let judged = RelWaypoint::new(frel.x, frel.y, force.k, force.vl, force.vh);
        let plant = plant_monitor(&judged, v, elapsed, p);
        plant_failed_last = !plant.passed();
        if plant_failed_last {
            plant_failures += 1;
            all_passed = false;
        }

        let (vl, vh) = graph.edge_limits(edge);
        if to_relative(&pose, goal).norm() <= eps && !(vl <= v && v <= vh) {
            violations += 1;
            if fallback && v < vl {
                below_vl += 1;
            }
        }

        log.push(LogRow {
            cycle: cycles,
            t: row_start.0,
            x: row_start.1.x,
            y: row_start.1.y,
            psi: row_start.1.heading,
            v: row_start.2,
            a_cmd: a_prop,
            a_acted: a_act,
            k_decl: wp.k,
            wx: wp.x,
            wy: wp.y,
            vl: wp.vl,
            vh: wp.vh,
            ctrl: ctrl.failed_clause(),
            plant: plant.failed_clause(),
        });
        cycles += 1;
    }

    let rate = |n: u32| if cycles == 0 { 0.0 } else { n as f64 / cycles as f64 };
    let report = EpisodeReport {
        env: cfg.env.clone(),
        controller: cfg.controller,
        seed: cfg.seed,
        completed,
        cycles,
        distance,
        time: clock,
        avg_speed: if clock > 0.0 { distance / clock } else { 0.0 },
        ctrl_failures,
        plant_failures,
        ctrl_fail_rate: rate(ctrl_failures),
        plant_fail_rate: rate(plant_failures),
        safety_violations: violations,
        fallback_engagements: fallbacks,
        below_vl_at_goal: below_vl,
        all_monitors_passed: all_passed,
    };
    Ok(EpisodeOutcome { report, log })
}

/// Runs `episodes` independent episodes in parallel; results come back in
/// episode order. Logs are dropped unless `keep_logs` is set.
pub fn run_batch(
    cfg: &EpisodeConfig,
    graph: &PlanGraph,
    episodes: u32,
    keep_logs: bool,
) -> Result<Vec<EpisodeOutcome>, ConfigError> {
    cfg.validate(graph)?;
    (0..episodes)
        .into_par_iter()
        .map(|i| {
            let ep = EpisodeConfig { seed: derive_seed(cfg.seed, i as u64), ..cfg.clone() };
            let mut out = run_episode(&ep, graph)?;
            if !keep_logs {
                out.log = Vec::new();
            }
            Ok(out)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub env: String,
    pub controller: ControllerKind,
    pub episodes: usize,
    pub completed: usize,
    pub avg_speed: f64,
    pub ctrl_fail_pct: f64,
    pub plant_fail_pct: f64,
    pub safety_violations: u64,
    pub fallback_engagements: u64,
    pub below_vl_at_goal: u64,
}

/// Per (environment, controller) means, in order of first appearance.
pub fn summarize(reports: &[EpisodeReport]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, ControllerKind)> = Vec::new();
    for r in reports {
        if !keys.iter().any(|(e, c)| *e == r.env && *c == r.controller) {
            keys.push((r.env.clone(), r.controller));
        }
    }
    keys.into_iter()
        .map(|(env, controller)| {
            let group: Vec<&EpisodeReport> =
                reports.iter().filter(|r| r.env == env && r.controller == controller).collect();
            let n = group.len() as f64;
            let mean = |f: fn(&EpisodeReport) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            SummaryRow {
                episodes: group.len(),
                completed: group.iter().filter(|r| r.completed).count(),
                avg_speed: mean(|r| r.avg_speed),
                ctrl_fail_pct: 100.0 * mean(|r| r.ctrl_fail_rate),
                plant_fail_pct: 100.0 * mean(|r| r.plant_fail_rate),
                safety_violations: group.iter().map(|r| r.safety_violations as u64).sum(),
                fallback_engagements: group.iter().map(|r| r.fallback_engagements as u64).sum(),
                below_vl_at_goal: group.iter().map(|r| r.below_vl_at_goal as u64).sum(),
                env,
                controller,
            }
        })
        .collect()
}

pub fn render_table(rows: &[SummaryRow]) -> String {
    let header = [
        "env",
        "controller",
        "episodes",
        "completed",
        "avg_speed",
        "ctrl_fail%",
        "plant_fail%",
        "violations",
        "fallbacks",
        "below_vl",
    ];
    let cells: Vec<[String; 10]> = rows
        .iter()
        .map(|r| {
            [
                r.env.clone(),
                r.controller.to_string(),
                r.episodes.to_string(),
                r.completed.to_string(),
                format!("{:.2}", r.avg_speed),
                format!("{:.2}", r.ctrl_fail_pct),
                format!("{:.2}", r.plant_fail_pct),
                r.safety_violations.to_string(),
                r.fallback_engagements.to_string(),
                r.below_vl_at_goal.to_string(),
            ]
        })
        .collect();
    let mut width = header.map(str::len);
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, items: &[&str]| {
        let parts: Vec<String> = items
            .iter()
            .zip(width)
            .enumerate()
            .map(|(i, (s, w))| if i < 2 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut out, &header);
    for row in &cells {
        let refs: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &refs);
    }
    out
}

pub fn render_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "env,controller,episodes,completed,avg_speed,ctrl_fail_pct,plant_fail_pct,safety_violations,fallback_engagements,below_vl_at_goal\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.env,
            r.controller,
            r.episodes,
            r.completed,
            r.avg_speed,
            r.ctrl_fail_pct,
            r.plant_fail_pct,
            r.safety_violations,
            r.fallback_engagements,
            r.below_vl_at_goal
        ));
    }
    out
}

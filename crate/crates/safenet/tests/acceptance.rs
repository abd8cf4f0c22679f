//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safenet::harness::{run_batch, ControllerKind, EpisodeConfig, EpisodeReport, DEFAULT_DISTURBANCE};
use safenet::verify::{check_invariant_preservation, check_liveness, check_progress, go_oracle, ProgressCase};
use safenet_core::dynamics::{
    closed_form_relative, step_relative, to_relative, world_step_n, Disturbance, RelPoint, WorldPoint,
};
use safenet_core::interval::{interval_eval_controller, Interval, IntervalVerdict, IntervalWaypoint};
use safenet_core::monitor::controller_monitor;
use safenet_core::plan::{gen_environment, Environment, PlanGraph};
use safenet_core::toy::{monitor_1d, Toy1DState};
use safenet_core::{Params, RelWaypoint, WorldPose};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn params() -> Params {
    Params::new(2.0, 3.0, 0.25, 1.0).unwrap()
}

fn courses() -> Vec<(Environment, PlanGraph)> {
    [Environment::Rect, Environment::Turns, Environment::Clover]
        .into_iter()
        .map(|e| (e, gen_environment(e, e.default_scale(), None).unwrap()))
        .collect()
}

fn batch(
    env: Environment,
    graph: &PlanGraph,
    controller: ControllerKind,
    dist: Disturbance,
    monitor: bool,
    episodes: u32,
    seed: u64,
) -> Vec<EpisodeReport> {
    let cfg = EpisodeConfig {
        env: env.name().to_string(),
        controller,
        params: params(),
        disturbance: dist,
        max_cycles: 5000,
        seed,
        interval_mode: false,
        random_branches: false,
        monitor,
    };
    run_batch(&cfg, graph, episodes, false).unwrap().into_iter().map(|o| o.report).collect()
}

/// Mean of per-episode rates, as in the summary table.
fn rate(reports: &[EpisodeReport], f: impl Fn(&EpisodeReport) -> f64) -> f64 {
    reports.iter().map(f).sum::<f64>() / reports.len() as f64
}

fn safety() -> Outcome {
    let dist = Disturbance::new(0.1, 0.005, 0.1, 0.2, 0).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for (env, g) in courses() {
        for c in [ControllerKind::Pd1, ControllerKind::Liveness] {
            let reports = batch(env, &g, c, dist, true, 1000, 11);
            let worst = reports.iter().map(|r| r.safety_violations).max().unwrap_or(0);
            let slow: u32 = reports.iter().map(|r| r.below_vl_at_goal).sum();
            pass &= worst == 0;
            parts.push(format!("{}/{}: max violations {worst}, below_vl {slow}", env.name(), c.name()));
        }
    }
    outcome(pass, parts.join("; "))
}

fn necessity() -> Outcome {
    let mut unmonitored = 0u32;
    let mut monitored = 0u32;
    for (env, g) in courses() {
        let sum = |r: Vec<EpisodeReport>| r.iter().map(|r| r.safety_violations).sum::<u32>();
        unmonitored += sum(batch(env, &g, ControllerKind::Adversarial, DEFAULT_DISTURBANCE, false, 50, 12));
        monitored += sum(batch(env, &g, ControllerKind::Adversarial, DEFAULT_DISTURBANCE, true, 200, 12));
    }
    outcome(unmonitored >= 1 && monitored == 0, format!("unmonitored {unmonitored} violations, monitored {monitored}"))
}

fn invariant() -> Outcome {
    let start = Instant::now();
    let r = check_invariant_preservation(10_000, 13);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        r.violations == 0 && secs < 30.0,
        format!("{} samples, {} violations, {secs:.2} s", r.samples, r.violations),
    )
}

fn liveness() -> Outcome {
    let r = check_liveness(1000, 14);
    let mut pass = r.reached == r.runs && r.worst_bound_ratio <= 1.0;
    let mut detail = format!("reached {}/{}, worst cycles/bound {:.3}", r.reached, r.runs, r.worst_bound_ratio);
    for case in ProgressCase::ALL {
        let p = check_progress(case, 10_000, 14);
        pass &= p.violations == 0 && p.min_decrease > 0.0;
        detail += &format!("; {} {} violations, min decrease {:.2e}", case.name(), p.violations, p.min_decrease);
    }
    outcome(pass, detail)
}

fn fidelity() -> Outcome {
    // radius about the turning center over 10⁴ single RK4 steps
    let (k, v) = (0.2, 4.0);
    let mut pt = RelPoint::new(12.0, 3.0);
    let r0 = pt.x.hypot(pt.y - 1.0 / k);
    for _ in 0..10_000 {
        pt = step_relative(pt, v, 0.0, k, 0.01, 1).0;
    }
    let radius_err = (pt.x.hypot(pt.y - 1.0 / k) - r0).abs() / r0;

    // RK4 against the closed form at dt = 1e−3
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut worst_per_len = 0.0_f64;
    for _ in 0..50 {
        let p0 = RelPoint::new(rng.gen_range(1.0..30.0), rng.gen_range(-5.0..5.0));
        let (v0, a, k) = (rng.gen_range(0.5..10.0), rng.gen_range(-0.5..1.0), rng.gen_range(-0.5..0.5));
        let t = 2.0;
        let (mut q, mut w) = (p0, v0);
        for _ in 0..2000 {
            (q, w) = step_relative(q, w, a, k, 1e-3, 1);
        }
        let (exact, _) = closed_form_relative(p0, v0, a, k, t);
        let len = (v0 + w) / 2.0 * t;
        worst_per_len = worst_per_len.max((q.x - exact.x).hypot(q.y - exact.y) / len);
    }

    // world and relative frames agree over one undisturbed cycle
    let mut frame_err = 0.0_f64;
    for _ in 0..1000 {
        let pose = WorldPose::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-3.0..3.0));
        let target = WorldPoint::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let (v, k, a) = (rng.gen_range(0.0..20.0), rng.gen_range(-1.0..1.0), rng.gen_range(-3.0..2.0));
        let (next, _) = world_step_n(pose, v, k, a, 0.25, &Disturbance::NONE, 20);
        let via_world = to_relative(&next, target);
        let (via_rel, _) = step_relative(to_relative(&pose, target), v, a, k, 0.25, 20);
        frame_err = frame_err.max((via_world.x - via_rel.x).hypot(via_world.y - via_rel.y));
    }
    outcome(
        radius_err <= 1e-6 && worst_per_len <= 1e-8 && frame_err <= 1e-6,
        format!(
            "radius drift {radius_err:.2e}, RK4 error per metre {worst_per_len:.2e}, frame mismatch {frame_err:.2e}"
        ),
    )
}

fn table_ordering() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (env, g) in courses() {
        let pd1 = batch(env, &g, ControllerKind::Pd1, DEFAULT_DISTURBANCE, true, 200, 16);
        let pd1_ctrl = rate(&pd1, |r| r.ctrl_fail_rate);
        pass &= pd1_ctrl <= 0.01;
        if env == Environment::Clover {
            parts.push(format!("{}: pd1 ctrl {:.2}%", env.name(), 100.0 * pd1_ctrl));
            continue;
        }
        let bb = batch(env, &g, ControllerKind::BangBang, DEFAULT_DISTURBANCE, true, 200, 16);
        let (bb_plant, pd1_plant) = (rate(&bb, |r| r.plant_fail_rate), rate(&pd1, |r| r.plant_fail_rate));
        pass &= bb_plant > pd1_plant;
        parts.push(format!(
            "{}: plant bangbang {:.2}% vs pd1 {:.2}%, pd1 ctrl {:.2}%",
            env.name(),
            100.0 * bb_plant,
            100.0 * pd1_plant,
            100.0 * pd1_ctrl
        ));
    }
    outcome(pass, parts.join("; "))
}

fn toy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut monitored_min, mut greedy_min) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..100_000 {
        let start = Toy1DState {
            d: rng.gen_range(0.0..50.0),
            v: 0.0,
            max_speed: rng.gen_range(0.1..5.0),
            cycle: rng.gen_range(0.05..2.0),
        };
        let (mut m, mut g) = (start, start);
        for _ in 0..40 {
            let dt = rng.gen_range(0.0..=start.cycle);
            let proposal = rng.gen_range(0.0..=start.max_speed);
            m = m.monitored_cycle(proposal, dt);
            debug_assert!(monitor_1d(&m, 0.0));
            monitored_min = monitored_min.min(m.d);
            g = g.advance(start.max_speed, dt);
            greedy_min = greedy_min.min(g.d);
        }
    }
    outcome(
        monitored_min >= 0.0 && greedy_min < 0.0,
        format!("monitored min d {monitored_min:.3e}, greedy min d {greedy_min:.3e}"),
    )
}

fn boxed(rng: &mut ChaCha8Rng, centre: f64) -> (Interval, f64, f64) {
    let w = if rng.gen_bool(0.2) { 0.0 } else { centre.abs().max(1.0) * 10f64.powf(rng.gen_range(-12.0..-1.0)) };
    let lo = centre - w * rng.gen::<f64>();
    let hi = centre + w * rng.gen::<f64>();
    (Interval::new(lo, hi).unwrap(), lo, hi)
}

/// A `y` whose band residual at `(x, y)` is `r`, when one exists; boxes
/// around it straddle the annulus boundary often enough to exercise both
/// verdicts.
fn near_band(x: f64, k: f64, eps: f64, r: f64) -> f64 {
    if k.abs() < 1e-9 {
        return -r;
    }
    let disc = 1.0 - k * k * (x * x - eps * eps) + 2.0 * k * r;
    if disc < 0.0 {
        -r
    } else {
        (1.0 - disc.sqrt()) / k
    }
}

fn interval_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let (mut t, mut f, mut u, mut unsound) = (0u32, 0u32, 0u32, 0u32);
    for _ in 0..100_000 {
        let eps = rng.gen_range(0.1..2.0);
        let p = Params::new(rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0), rng.gen_range(0.05..1.0), eps).unwrap();
        let k = rng.gen_range(-1.0..1.0) / eps;
        let x = rng.gen_range(0.01..60.0);
        let y = near_band(x, k, eps, rng.gen_range(-1.5..1.5) * eps);
        let vl = rng.gen_range(0.0..10.0);
        let vh = vl + rng.gen_range(0.0..15.0);
        let v = rng.gen_range(0.0..20.0);
        let a = rng.gen_range(-p.brake_max() - 0.5..p.accel_max() + 0.5);
        let dims = [x, y, k, vl, vh, v, a].map(|c| boxed(&mut rng, c));
        let wp = IntervalWaypoint { x: dims[0].0, y: dims[1].0, k: dims[2].0, vl: dims[3].0, vh: dims[4].0 };
        let verdict = interval_eval_controller(&wp, dims[5].0, dims[6].0, &p).verdict;
        match verdict {
            IntervalVerdict::DefinitelyTrue => t += 1,
            IntervalVerdict::DefinitelyFalse => f += 1,
            IntervalVerdict::Unknown => {
                u += 1;
                continue;
            }
        }
        for _ in 0..32 {
            let s = dims.map(|(_, lo, hi)| if lo == hi { lo } else { rng.gen_range(lo..=hi) });
            let point = controller_monitor(&RelWaypoint::new(s[0], s[1], s[2], s[3], s[4]), s[5], s[6], &p).passed();
            if point != (verdict == IntervalVerdict::DefinitelyTrue) {
                unsound += 1;
                break;
            }
        }
    }
    outcome(unsound == 0 && t > 0 && f > 0, format!("{t} true, {f} false, {u} unknown boxes; {unsound} unsound"))
}

fn go_oracle_check() -> Outcome {
    let r = go_oracle(10_000, 19);
    outcome(
        r.violations == 0,
        format!("{} samples, {} violations, min margin {:.2e} m", r.samples, r.violations, r.min_margin),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_safenet"))
            .args(["simulate", "--seed", "42", "--episodes", "20", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        let mut files: Vec<(String, Vec<u8>)> = Vec::new();
        for sub in [out.clone(), out.join("logs")] {
            let mut entries: Vec<_> =
                fs::read_dir(&sub).unwrap().map(|e| e.unwrap().path()).filter(|p| p.is_file()).collect();
            entries.sort();
            for p in entries {
                files.push((p.strip_prefix(&out).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
        (o.status.code(), o.stdout, files)
    };
    let (code_a, stdout_a, files_a) = run("a");
    let (code_b, stdout_b, files_b) = run("b");
    let same = code_a == code_b && stdout_a == stdout_b && files_a == files_b;
    outcome(same && !files_a.is_empty(), format!("{} files compared, exit {:?}", files_a.len(), code_a))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("safety under monitoring", safety),
        ("monitor necessity", necessity),
        ("invariant preservation", invariant),
        ("liveness and progress", liveness),
        ("dynamics fidelity", fidelity),
        ("failure-rate ordering", table_ordering),
        ("1D toy monitor", toy),
        ("interval soundness", interval_soundness),
        ("go oracle", go_oracle_check),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name} ({:.1} s): {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
        failed += usize::from(!o.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

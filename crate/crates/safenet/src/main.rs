use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safenet::harness::{self, ControllerKind, EpisodeConfig, EpisodeReport, DEFAULT_DISTURBANCE};
use safenet::log::{parse_log, re_monitor, render_log};
use safenet::plan_format::{parse_plan, serialize_plan};
use safenet::verify::{self, ProgressCase};
use safenet_core::dynamics::Disturbance;
use safenet_core::interval::{interval_eval_controller, Interval, IntervalWaypoint};
use safenet_core::monitor::{controller_monitor, plant_monitor};
use safenet_core::plan::{gen_environment, Environment, PlanGraph};
use safenet_core::{Params, RelWaypoint};

#[derive(Parser)]
#[command(name = "safenet", version, about = "Monitored waypoint following: simulation, plans and oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Goal radius and annulus half-width, m
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Longest control cycle, s
    #[arg(long, default_value_t = 0.25)]
    cycle: f64,
    /// Maximum acceleration, m/s²
    #[arg(long, default_value_t = 2.0)]
    accel: f64,
    /// Maximum braking, m/s²
    #[arg(long, default_value_t = 3.0)]
    brake: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<Params, Invalid> {
        Params::new(self.accel, self.brake, self.cycle, self.eps).map_err(|e| Invalid(e.to_string()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run monitored episodes and print the summary table
    Simulate(SimulateArgs),
    /// Parse and validate a plan file (exit 0 if valid, 2 otherwise)
    CheckPlan { file: PathBuf },
    /// Print a built-in course as a plan file
    GenEnv {
        name: String,
        /// Course size, m (defaults per course)
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute controller verdicts of a trajectory log
    MonitorEval {
        log: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Measure monitor evaluation throughput
    Bench {
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Numeric oracles for the monitor formulas
    Verify {
        check: VerifyCheck,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyCheck {
    Invariant,
    Progress,
    GoOracle,
    Liveness,
}

#[derive(Args)]
struct SimulateArgs {
    /// Comma-separated built-in courses
    #[arg(long, default_value = "rect,turns,clover", conflicts_with = "plan")]
    env: String,
    /// Plan file to run instead of the built-in courses
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Comma-separated controllers: bangbang, pd1, pd2, pd3, liveness, adversarial
    #[arg(long, default_value = "bangbang,pd1,pd2,pd3,liveness")]
    controller: String,
    #[arg(long, default_value_t = 1000)]
    episodes: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    params: ParamArgs,
    /// Disturbance magnitudes: curvature gain, curvature bias, accel gain, cycle jitter
    #[arg(long, value_name = "GAIN,BIAS,ACCEL,JITTER")]
    disturbance: Option<String>,
    /// Judge proposals with outward-rounded interval arithmetic
    #[arg(long)]
    interval_mode: bool,
    /// Choose uniformly among successors at branching nodes (seeded)
    #[arg(long)]
    random_branches: bool,
    /// Diagnostic: act on every proposal without monitoring
    #[arg(long)]
    no_monitor: bool,
    /// Directory for summary files and per-episode logs
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 5000)]
    max_cycles: u32,
}

/// Bad plan or configuration; exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Invalid(String);

fn parse_disturbance(s: &str) -> Result<Disturbance, Invalid> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Invalid(format!("--disturbance: {e}")))?;
    let [g, b, a, j] = parts[..] else {
        return Err(Invalid("--disturbance expects four comma-separated numbers".into()));
    };
    if g < 0.0 || b < 0.0 || a < 0.0 {
        return Err(Invalid("--disturbance magnitudes must be non-negative".into()));
    }
    Disturbance::new(g, b, a, j, 0).map_err(|e| Invalid(format!("--disturbance: {e}")))
}

fn load_plan(path: &Path) -> Result<PlanGraph, Invalid> {
    let text = fs::read_to_string(path).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
    parse_plan(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())))
}

fn courses(args: &SimulateArgs) -> Result<Vec<(String, PlanGraph)>, Invalid> {
    if let Some(path) = &args.plan {
        let label = path.file_stem().map_or_else(|| "plan".into(), |s| s.to_string_lossy().into_owned());
        return Ok(vec![(label, load_plan(path)?)]);
    }
    args.env
        .split(',')
        .map(|name| {
            let env = Environment::from_name(name.trim())
                .ok_or_else(|| Invalid(format!("unknown environment {name:?} (rect, turns, clover)")))?;
            let g = gen_environment(env, env.default_scale(), None).map_err(|e| Invalid(e.to_string()))?;
            Ok((env.name().to_string(), g))
        })
        .collect()
}

fn simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let params = args.params.params()?;
    let disturbance = match &args.disturbance {
        Some(s) => parse_disturbance(s)?,
        None => DEFAULT_DISTURBANCE,
    };
    let controllers: Vec<ControllerKind> = args
        .controller
        .split(',')
        .map(|c| c.trim().parse().map_err(|e: harness::UnknownController| Invalid(e.to_string())))
        .collect::<Result<_, _>>()?;
    if args.episodes == 0 {
        return Err(Invalid("--episodes must be positive".into()).into());
    }
    let courses = courses(args)?;

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir.join("logs")).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut reports: Vec<EpisodeReport> = Vec::new();
    for (cell, (name, graph)) in courses.iter().enumerate() {
        for (ci, &controller) in controllers.iter().enumerate() {
            let cfg = EpisodeConfig {
                env: name.clone(),
                controller,
                params,
                disturbance,
                max_cycles: args.max_cycles,
                seed: safenet::derive_seed(args.seed, (cell * controllers.len() + ci) as u64),
                interval_mode: args.interval_mode,
                random_branches: args.random_branches,
                monitor: !args.no_monitor,
            };
            let outcomes = harness::run_batch(&cfg, graph, args.episodes, args.out.is_some())
                .map_err(|e| Invalid(e.to_string()))?;
            if let Some(dir) = &args.out {
                for (i, o) in outcomes.iter().enumerate() {
                    let path = dir.join("logs").join(format!("{name}-{controller}-{i:05}.csv"));
                    fs::write(&path, render_log(&o.log)).with_context(|| format!("writing {}", path.display()))?;
                }
            }
            reports.extend(outcomes.into_iter().map(|o| o.report));
        }
    }

    let rows = harness::summarize(&reports);
    let table = harness::render_table(&rows);
    print!("{table}");
    if let Some(dir) = &args.out {
        fs::write(dir.join("summary.txt"), &table)?;
        fs::write(dir.join("summary.csv"), harness::render_csv(&rows))?;
    }
    let violations: u64 = rows.iter().map(|r| r.safety_violations).sum();
    if violations > 0 {
        eprintln!("safety violations observed: {violations}");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = Params::new(2.0, 3.0, 0.25, 1.0).expect("constant parameters are valid");
    let states: Vec<(RelWaypoint, f64, f64)> = (0..n.clamp(1, 100_000))
        .map(|_| {
            let wp = RelWaypoint::new(
                rng.gen_range(0.1..60.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-0.2..0.2),
                rng.gen_range(0.0..5.0),
                rng.gen_range(6.0..12.0),
            );
            (wp, rng.gen_range(0.0..15.0), rng.gen_range(-3.0..2.0))
        })
        .collect();
    let time = |label: &str, f: &dyn Fn(&RelWaypoint, f64, f64) -> bool| {
        let start = Instant::now();
        let mut passed = 0usize;
        for i in 0..n {
            let (wp, v, a) = &states[i % states.len()];
            passed += f(wp, *v, *a) as usize;
        }
        let secs = start.elapsed().as_secs_f64();
        println!("{label:<12} {n} evals in {secs:.3} s ({:.1} M/s, {passed} passed)", n as f64 / secs / 1e6);
    };
    time("controller", &|wp, v, a| controller_monitor(wp, v, a, &p).passed());
    time("plant", &|wp, v, _| plant_monitor(wp, v, 0.2, &p).passed());
    time("interval", &|wp, v, a| {
        interval_eval_controller(&IntervalWaypoint::point(wp), Interval::point(v), Interval::point(a), &p)
            .verdict
            .passed()
    });
}

fn run_verify(check: VerifyCheck, n: usize, seed: u64) -> ExitCode {
    let failed = match check {
        VerifyCheck::Invariant => {
            let r = verify::check_invariant_preservation(n, seed);
            println!("invariant preservation: {} samples, {} violations", r.samples, r.violations);
            for w in &r.witnesses {
                println!("  witness t={} clause={} sample={:?}", w.time, w.clause, w.sample);
            }
            r.violations > 0
        }
        VerifyCheck::Progress => {
            let mut any = false;
            for case in ProgressCase::ALL {
                let r = verify::check_progress(case, n, seed);
                println!(
                    "progress {:<8}: {} samples, {} violations, min decrease per cycle {:.3e}",
                    case.name(),
                    r.samples,
                    r.violations,
                    r.min_decrease
                );
                any |= r.violations > 0 || r.min_decrease.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater);
            }
            any
        }
        VerifyCheck::GoOracle => {
            let r = verify::go_oracle(n, seed);
            println!(
                "go oracle: {} samples, {} violations, min margin {:.3e} m",
                r.samples, r.violations, r.min_margin
            );
            r.violations > 0
        }
        VerifyCheck::Liveness => {
            let r = verify::check_liveness(n, seed);
            println!(
                "liveness: {}/{} runs reached the goal, worst cycles/bound {:.3}",
                r.reached, r.runs, r.worst_bound_ratio
            );
            r.reached < r.runs
        }
    };
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::CheckPlan { file } => {
            let g = load_plan(&file)?;
            println!("{}: ok ({} nodes, {} edges)", file.display(), g.nodes().len(), g.edges().len());
            Ok(ExitCode::SUCCESS)
        }
        Command::GenEnv { name, scale, out } => {
            let env = Environment::from_name(&name)
                .ok_or_else(|| Invalid(format!("unknown environment {name:?} (rect, turns, clover)")))?;
            let g =
                gen_environment(env, scale.unwrap_or(env.default_scale()), None).map_err(|e| Invalid(e.to_string()))?;
            let text = serialize_plan(&g);
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::MonitorEval { log, params } => {
            let p = params.params()?;
            let text = fs::read_to_string(&log).with_context(|| format!("reading {}", log.display()))?;
            let rows = parse_log(&text).map_err(|e| Invalid(format!("{}: {e}", log.display())))?;
            let r = re_monitor(&rows, &p);
            println!(
                "{} rows, {} controller failures, {} plant failures logged, {} controller verdict mismatches",
                r.rows,
                r.ctrl_failures,
                r.logged_plant_failures,
                r.ctrl_mismatches.len()
            );
            if let Some(first) = r.ctrl_mismatches.first() {
                println!("first mismatch at cycle {first}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { n, seed } => {
            if n == 0 {
                bail!(Invalid("--n must be positive".into()));
            }
            bench(n, seed);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { check, n, seed } => {
            if n == 0 {
                bail!(Invalid("--n must be positive".into()));
            }
            Ok(run_verify(check, n, seed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

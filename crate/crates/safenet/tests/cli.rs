use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn safenet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_safenet")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn check_plan_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.plan");
    let bad = dir.path().join("bad.plan");
    fs::write(&good, "node A 0 0 1 3\nnode B 10 0 1 3\nedge A B line\nstart A\n").unwrap();
    fs::write(&bad, "node A 0 0 1 3\nnode B 3 0 1 3\nedge A B arc 1\nstart A\n").unwrap();
    assert_eq!(code(&safenet(&["check-plan", good.to_str().unwrap()])), 0);
    let o = safenet(&["check-plan", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("line 3"), "{}", text(&o.stderr));
    assert_eq!(code(&safenet(&["check-plan", dir.path().join("missing.plan").to_str().unwrap()])), 2);
}

#[test]
fn generated_courses_pass_check_plan() {
    let dir = tempfile::tempdir().unwrap();
    for env in ["rect", "turns", "clover"] {
        let path = dir.path().join(format!("{env}.plan"));
        assert_eq!(code(&safenet(&["gen-env", env, "--out", path.to_str().unwrap()])), 0);
        assert_eq!(code(&safenet(&["check-plan", path.to_str().unwrap()])), 0);
    }
    assert_eq!(code(&safenet(&["gen-env", "maze"])), 2);
    assert_eq!(code(&safenet(&["gen-env", "rect", "--scale", "-1"])), 2);
}

#[test]
fn simulate_exit_codes() {
    let unmonitored =
        safenet(&["simulate", "--env", "rect", "--controller", "adversarial", "--no-monitor", "--episodes", "2"]);
    assert_eq!(code(&unmonitored), 1);
    let monitored = safenet(&["simulate", "--env", "rect", "--controller", "adversarial", "--episodes", "2"]);
    assert_eq!(code(&monitored), 0);
    assert!(text(&monitored.stdout).starts_with("env "));
    for bad in [
        &["simulate", "--env", "maze", "--episodes", "1"][..],
        &["simulate", "--controller", "mpc", "--episodes", "1"],
        &["simulate", "--disturbance", "0.1,0.1", "--episodes", "1"],
        &["simulate", "--disturbance", "1.5,0,0,0", "--episodes", "1"],
        &["simulate", "--eps", "0", "--episodes", "1"],
        &["simulate", "--episodes", "0"],
        &["simulate", "--max-cycles", "0", "--episodes", "1"],
    ] {
        assert_eq!(code(&safenet(bad)), 2, "{bad:?}");
    }
}

#[test]
fn simulate_plan_file_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("loop.plan");
    fs::write(&plan, text(&safenet(&["gen-env", "turns"]).stdout)).unwrap();
    let out = dir.path().join("out");
    let o = safenet(&[
        "simulate",
        "--plan",
        plan.to_str().unwrap(),
        "--controller",
        "pd1,liveness",
        "--episodes",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert_eq!(summary, text(&o.stdout));
    assert!(summary.contains("loop"));
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 3);
    let log = out.join("logs").join("loop-pd1-00001.csv");
    assert!(fs::read_to_string(&log)
        .unwrap()
        .starts_with("cycle,t,X,Y,psi,v,a_cmd,a_acted,k_decl,wx,wy,vl,vh,ctrl_verdict,plant_verdict\n"));

    let eval = safenet(&["monitor-eval", log.to_str().unwrap()]);
    assert_eq!(code(&eval), 0);
    assert!(text(&eval.stdout).contains(" 0 controller verdict mismatches"), "{}", text(&eval.stdout));
}

#[test]
fn monitor_eval_rejects_malformed_logs() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.csv");
    fs::write(&log, "not,a,log\n").unwrap();
    assert_eq!(code(&safenet(&["monitor-eval", log.to_str().unwrap()])), 2);
    assert_eq!(code(&safenet(&["monitor-eval", Path::new("/nonexistent/log.csv").to_str().unwrap()])), 2);
}

#[test]
fn verify_and_bench_run() {
    for check in ["invariant", "progress", "go-oracle", "liveness"] {
        let o = safenet(&["verify", check, "--n", "200", "--seed", "3"]);
        assert_eq!(code(&o), 0, "{check}: {}", text(&o.stdout));
    }
    let o = safenet(&["bench", "--n", "1000"]);
    assert_eq!(code(&o), 0);
    assert_eq!(text(&o.stdout).lines().count(), 3);
}

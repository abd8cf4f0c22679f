use safenet::harness::{run_episode, ControllerKind, EpisodeConfig};
use safenet::log::{parse_log, re_monitor, render_log, LogError, HEADER};
use safenet_core::dynamics::Disturbance;
use safenet_core::plan::{gen_environment, Environment};
use safenet_core::{FailedClause, Params};

fn episode_log(controller: ControllerKind) -> Vec<safenet::log::LogRow> {
    let env = Environment::Turns;
    let cfg = EpisodeConfig {
        env: env.name().into(),
        controller,
        params: Params::new(2.0, 3.0, 0.25, 1.0).unwrap(),
        disturbance: Disturbance::new(0.05, 0.005, 0.05, 0.2, 0).unwrap(),
        max_cycles: 400,
        seed: 9,
        interval_mode: false,
        random_branches: false,
        monitor: true,
    };
    run_episode(&cfg, &gen_environment(env, env.default_scale(), None).unwrap()).unwrap().log
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn render_parse_keeps_nine_digits() {
    let rows = episode_log(ControllerKind::BangBang);
    let text = render_log(&rows);
    assert!(text.starts_with(HEADER));
    let parsed = parse_log(&text).unwrap();
    assert_eq!(parsed.len(), rows.len());
    for (a, b) in rows.iter().zip(&parsed) {
        assert_eq!((a.cycle, a.ctrl, a.plant), (b.cycle, b.ctrl, b.plant));
        for (x, y) in [
            (a.t, b.t),
            (a.x, b.x),
            (a.y, b.y),
            (a.psi, b.psi),
            (a.v, b.v),
            (a.a_cmd, b.a_cmd),
            (a.k_decl, b.k_decl),
            (a.wx, b.wx),
            (a.wy, b.wy),
        ] {
            assert!(close(x, y), "{x} vs {y}");
        }
    }
    assert_eq!(render_log(&parsed), text);
}

#[test]
fn plant_failures_are_logged_by_clause() {
    let rows = episode_log(ControllerKind::BangBang);
    let failures = rows.iter().filter(|r| r.plant != FailedClause::None).count();
    let r = re_monitor(&rows, &Params::new(2.0, 3.0, 0.25, 1.0).unwrap());
    assert_eq!(r.rows, rows.len());
    assert_eq!(r.logged_plant_failures, failures);
    assert!(r.ctrl_mismatches.is_empty());
}

#[test]
fn re_monitor_flags_changed_parameters() {
    let rows = episode_log(ControllerKind::Pd3);
    // a wider goal ball rules out the sharper declared curvatures
    let tighter = Params::new(2.0, 3.0, 0.25, 3.0).unwrap();
    let r = re_monitor(&rows, &tighter);
    assert!(r.ctrl_failures > 0);
    assert_eq!(r.ctrl_mismatches.len(), r.ctrl_failures);
}

#[test]
fn malformed_logs() {
    assert_eq!(parse_log("cycle,t\n").unwrap_err(), LogError::Header);
    let short = format!("{HEADER}\n0,1,2\n");
    assert_eq!(parse_log(&short).unwrap_err(), LogError::FieldCount { line: 2, found: 3 });
    let bad_num = format!("{HEADER}\n0,0,0,0,0,x,0,0,0,1,0,1,2,pass,pass\n");
    assert!(matches!(parse_log(&bad_num), Err(LogError::Field { line: 2, field: 6, .. })));
    let bad_verdict = format!("{HEADER}\n0,0,0,0,0,0,0,0,0,1,0,1,2,maybe,pass\n");
    assert!(matches!(parse_log(&bad_verdict), Err(LogError::Field { line: 2, field: 14, .. })));
    let ok = format!("{HEADER}\n0,0,0,0,0,0,0,0,0,1,0,1,2,AnnBand,pass\n\n");
    assert_eq!(parse_log(&ok).unwrap()[0].ctrl, FailedClause::AnnBand);
}

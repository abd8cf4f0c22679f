//! Per-episode trajectory logs.
//!
//! Each row describes one control cycle: the state at the start of the
//! cycle, the proposed and acted acceleration, the proposed relative
//! waypoint with its declared curvature, and both monitor verdicts.

use std::fmt::Write as _;

use safenet_core::monitor::controller_monitor;
use safenet_core::{FailedClause, MonitorVerdict, Params, RelWaypoint};
use thiserror::Error;

pub const HEADER: &str = "cycle,t,X,Y,psi,v,a_cmd,a_acted,k_decl,wx,wy,vl,vh,ctrl_verdict,plant_verdict";

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub cycle: u32,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
    pub a_cmd: f64,
    pub a_acted: f64,
    pub k_decl: f64,
    pub wx: f64,
    pub wy: f64,
    pub vl: f64,
    pub vh: f64,
    pub ctrl: FailedClause,
    pub plant: FailedClause,
}

fn verdict_name(c: FailedClause) -> &'static str {
    if c == FailedClause::None {
        "pass"
    } else {
        c.name()
    }
}

/// Plain decimal with 9 significant digits.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    // round first so the exponent reflects carries such as 9.999999999 -> 10
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    let exp = rounded.abs().log10().floor() as i32;
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    } else {
        s
    }
}

pub fn render_log(rows: &[LogRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 160);
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        let nums = [r.t, r.x, r.y, r.psi, r.v, r.a_cmd, r.a_acted, r.k_decl, r.wx, r.wy, r.vl, r.vh];
        let _ = write!(out, "{}", r.cycle);
        for n in nums {
            let _ = write!(out, ",{}", sig9(n));
        }
        let _ = writeln!(out, ",{},{}", verdict_name(r.ctrl), verdict_name(r.plant));
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum LogError {
    #[error("missing or unexpected header")]
    Header,
    #[error("line {line}: expected 15 fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}, field {field}: cannot parse {text:?}")]
    Field { line: usize, field: usize, text: String },
}

pub fn parse_log(text: &str) -> Result<Vec<LogRow>, LogError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(HEADER) {
        return Err(LogError::Header);
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 15 {
            return Err(LogError::FieldCount { line: line_no, found: f.len() });
        }
        let bad = |field: usize| LogError::Field { line: line_no, field: field + 1, text: f[field].to_string() };
        let num = |field: usize| f[field].trim().parse::<f64>().map_err(|_| bad(field));
        let verdict = |field: usize| match f[field].trim() {
            "pass" => Ok(FailedClause::None),
            s => FailedClause::from_name(s).filter(|c| *c != FailedClause::None).ok_or_else(|| bad(field)),
        };
        rows.push(LogRow {
            cycle: f[0].trim().parse().map_err(|_| bad(0))?,
            t: num(1)?,
            x: num(2)?,
            y: num(3)?,
            psi: num(4)?,
            v: num(5)?,
            a_cmd: num(6)?,
            a_acted: num(7)?,
            k_decl: num(8)?,
            wx: num(9)?,
            wy: num(10)?,
            vl: num(11)?,
            vh: num(12)?,
            ctrl: verdict(13)?,
            plant: verdict(14)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReEvaluation {
    pub rows: usize,
    pub ctrl_failures: usize,
    /// Rows whose recomputed controller verdict differs from the logged one.
    pub ctrl_mismatches: Vec<u32>,
    pub logged_plant_failures: usize,
}

/// Recomputes the controller verdict of every row under `p`.
pub fn re_monitor(rows: &[LogRow], p: &Params) -> ReEvaluation {
    let mut out = ReEvaluation { rows: rows.len(), ..Default::default() };
    for r in rows {
        let wp = RelWaypoint::new(r.wx, r.wy, r.k_decl, r.vl, r.vh);
        let v: MonitorVerdict = controller_monitor(&wp, r.v, r.a_cmd, p);
        if !v.passed() {
            out.ctrl_failures += 1;
        }
        if v.failed_clause() != r.ctrl {
            out.ctrl_mismatches.push(r.cycle);
        }
        if r.plant != FailedClause::None {
            out.logged_plant_failures += 1;
        }
    }
    out
}

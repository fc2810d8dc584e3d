use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use conic::{BoundResult, SolverConfig, Status};
use foldcode::delsarte::delsarte_bound;
use foldcode::model::{build_sdp_mode, Coefficients};
use serde::Serialize;

pub const BUNDLED_EXPECTED: &str = include_str!("../data/expected.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Expected {
    pub sdp_bound: i64,
    pub delsarte_bound: i64,
}

/// Reads `n,d,sdp_bound,delsarte_bound` rows after a header line.
pub fn parse_expected(text: &str) -> Result<BTreeMap<(u32, u32), Expected>, String> {
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || format!("expected table line {}: {line:?}", k + 1);
        if f.len() != 4 {
            return Err(bad());
        }
        let n = f[0].parse().map_err(|_| bad())?;
        let d = f[1].parse().map_err(|_| bad())?;
        out.insert(
            (n, d),
            Expected {
                sdp_bound: f[2].parse().map_err(|_| bad())?,
                delsarte_bound: f[3].parse().map_err(|_| bad())?,
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub n: u32,
    pub d: u32,
    pub sdp_bound: i64,
    pub delsarte_bound: i64,
    pub sdp_objective: f64,
    pub lp_objective: f64,
    pub sdp_status: Status,
    pub lp_status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sdp_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

impl Row {
    pub fn optimal(&self) -> bool {
        self.sdp_status == Status::Optimal && self.lp_status == Status::Optimal
    }
}

pub fn solve_row(
    n: u32,
    d: u32,
    mode: Coefficients,
    cfg: &SolverConfig,
) -> Result<Row, foldcode::Error> {
    let prob = build_sdp_mode(n, d, mode)?;
    let s: BoundResult = conic::solve(&prob.to_conic(), cfg)?;
    let l = delsarte_bound(n, d, cfg)?;
    Ok(Row {
        n,
        d,
        sdp_bound: s.bound,
        delsarte_bound: l.bound,
        sdp_objective: s.objective,
        lp_objective: l.objective,
        sdp_status: s.status,
        lp_status: l.status,
        sdp_ms: Some(s.wall_time_ms),
        lp_ms: Some(l.wall_time_ms),
        expected: None,
    })
}

/// Solves every instance on `workers` threads; rows keep the order of `jobs`.
pub fn solve_rows(
    jobs: &[(u32, u32)],
    mode: Coefficients,
    cfg: &SolverConfig,
    workers: usize,
) -> Result<Vec<Row>, foldcode::Error> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<Row, foldcode::Error>>>> =
        Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, jobs.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, d)) = jobs.get(k) else {
                    break;
                };
                let r = solve_row(n, d, mode, cfg);
                slots.lock().unwrap()[k] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

pub fn to_csv(rows: &[Row], with_expected: bool) -> String {
    let mut out = String::from(
        "n,d,sdp_bound,delsarte_bound,sdp_objective,lp_objective,sdp_status,lp_status,sdp_ms,lp_ms",
    );
    if with_expected {
        out.push_str(",expected_sdp,expected_delsarte,sdp_match,delsarte_match");
    }
    out.push('\n');
    let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{:.9},{:.9},{},{},{},{}",
            r.n,
            r.d,
            r.sdp_bound,
            r.delsarte_bound,
            r.sdp_objective,
            r.lp_objective,
            r.sdp_status,
            r.lp_status,
            opt(r.sdp_ms),
            opt(r.lp_ms)
        );
        if with_expected {
            match r.expected {
                Some(e) => {
                    let mark = |ok: bool| if ok { "match" } else { "mismatch" };
                    let _ = write!(
                        out,
                        ",{},{},{},{}",
                        e.sdp_bound,
                        e.delsarte_bound,
                        mark(e.sdp_bound == r.sdp_bound),
                        mark(e.delsarte_bound == r.delsarte_bound)
                    );
                }
                None => out.push_str(",,,,"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_parses() {
        let t = parse_expected(BUNDLED_EXPECTED).unwrap();
        assert_eq!(t.len(), 12);
        assert_eq!(
            t[&(12, 3)],
            Expected {
                sdp_bound: 87,
                delsarte_bound: 128
            }
        );
        assert!(parse_expected("h\n1,2,3\n").is_err());
    }

    #[test]
    fn rows_keep_job_order() {
        let jobs = [(9, 2), (8, 2), (8, 3)];
        let cfg = SolverConfig::default();
        let a = solve_rows(&jobs, Coefficients::Exact, &cfg, 3).unwrap();
        let order: Vec<(u32, u32)> = a.iter().map(|r| (r.n, r.d)).collect();
        assert_eq!(order, jobs);
        let b = solve_rows(&jobs, Coefficients::Exact, &cfg, 1).unwrap();
        let strip = |rows: Vec<Row>| {
            rows.into_iter()
                .map(|mut r| {
                    r.sdp_ms = None;
                    r.lp_ms = None;
                    r
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(to_csv(&strip(a), false), to_csv(&strip(b), false));
    }
}

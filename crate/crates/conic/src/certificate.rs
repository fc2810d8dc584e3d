use serde::Serialize;

use crate::linalg::min_eigenvalue;
use crate::problem::Problem;
use crate::solver::{block_min_eigenvalues, BoundResult, SolverConfig};

/// Factor applied to solver tolerances before a check is flagged.
pub const SLACK_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub checks: Vec<Check>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn check(name: impl Into<String>, value: f64, limit: f64) -> Check {
    Check {
        name: name.into(),
        value,
        limit,
        passed: value.is_finite() && value <= limit,
    }
}

/// Recomputes residuals and eigenvalues from the point stored in `res`.
pub fn check_certificate(
    prob: &Problem,
    res: &BoundResult,
    cfg: &SolverConfig,
) -> CertificateReport {
    let mut checks = Vec::new();
    let feas = SLACK_FACTOR * cfg.tol_feas;
    let gap_tol = SLACK_FACTOR * cfg.tol_gap;

    if res.y.len() != prob.num_vars || res.primal.len() != prob.blocks.len() {
        checks.push(check("point-shape", f64::INFINITY, 0.0));
        return CertificateReport { checks };
    }

    let mut ax = vec![0.0; prob.num_vars];
    let mut p_lin = 0.0;
    let mut x_scale = 0.0f64;
    for (blk, x) in prob.blocks.iter().zip(&res.primal) {
        p_lin += blk.constant.dot(x);
        for (k, f) in &blk.coefficients {
            ax[*k] -= f.dot(x);
        }
        x_scale = x_scale.max(x.max_abs());
    }
    let b = &prob.objective;
    let rp: f64 = b
        .iter()
        .zip(&ax)
        .map(|(bk, a)| (bk - a) * (bk - a))
        .sum::<f64>()
        .sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    checks.push(check("primal-residual", rp / (1.0 + nb), feas));

    let mut worst_x = f64::INFINITY;
    for x in &res.primal {
        if x.rows() == 0 {
            continue;
        }
        let lo = min_eigenvalue(&x.symmetrize()).unwrap_or(f64::NEG_INFINITY);
        worst_x = worst_x.min(lo);
    }
    let x_neg = if worst_x.is_finite() {
        (-worst_x).max(0.0)
    } else {
        0.0
    };
    checks.push(check("primal-psd", x_neg / (1.0 + x_scale), feas));

    let eigs = block_min_eigenvalues(prob, &res.y);
    let s_neg = if eigs.iter().any(|v| v.is_nan()) {
        f64::NAN
    } else {
        eigs.iter().fold(0.0f64, |m, &v| m.max(-v))
    };
    checks.push(check("dual-psd", s_neg, feas));

    let d_lin: f64 = b.iter().zip(&res.y).map(|(a, v)| a * v).sum();
    let gap = (p_lin - d_lin).abs() / (1.0 + p_lin.abs() + d_lin.abs());
    checks.push(check("duality-gap", gap, gap_tol));

    let pobj = prob.objective_offset + p_lin;
    let dobj = prob.objective_offset + d_lin;
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs());
    checks.push(check(
        "reported-objective",
        rel(pobj, res.objective),
        gap_tol,
    ));
    checks.push(check(
        "reported-dual-objective",
        rel(dobj, res.dual_objective),
        gap_tol,
    ));

    CertificateReport { checks }
}

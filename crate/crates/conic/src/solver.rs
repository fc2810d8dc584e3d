//! Infeasible-start primal-dual path-following with Nesterov-Todd scaling.
//!
//! The user-facing problem is the LMI form `max b^T y s.t. F0 + sum y_k F_k >= 0`.
//! Internally it is treated as the dual of the standard primal
//! `min <C, X> s.t. <A_k, X> = b_k, X >= 0` with `C = F0` and `A_k = -F_k`,
//! so `Z = C - sum y_k A_k` is the slack of the user's inequality.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{ConicError, Result};
use crate::linalg::{
    cholesky, cholesky_solve, lower_triangular_inverse, min_eigenvalue, symmetric_eigen, Matrix,
};
use crate::problem::Problem;

/// Added to objectives before flooring them to integer bounds.
pub const TOL_ROUND: f64 = 1e-5;

const SCHUR_REG: f64 = 1e-12;
const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_gap: 1e-8,
            tol_feas: 1e-8,
            max_iter: 200,
            step_fraction: 0.98,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_gap > 0.0) || !(self.tol_feas > 0.0) {
            return Err(ConicError::InvalidArgument(
                "tolerances must be positive".into(),
            ));
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(ConicError::InvalidArgument(
                "step fraction must lie in (0, 1)".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(ConicError::InvalidArgument(
                "max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    MaxIter,
    InfeasibleDetected,
    NumericalFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::MaxIter => "max-iter",
            Status::InfeasibleDetected => "infeasible-detected",
            Status::NumericalFailure => "numerical-failure",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative residuals: primal `|b - A(X)| / (1 + |b|)`, dual
/// `|C - A^T y - Z| / (1 + |C|)`, gap `|p - d| / (1 + |p| + |d|)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iter: usize,
    pub mu: f64,
    pub pinf: f64,
    pub dinf: f64,
    pub gap: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub status: Status,
    /// Upper-side objective `offset + <F0, X>`.
    pub objective: f64,
    /// Lower-side objective `offset + b^T y`.
    pub dual_objective: f64,
    pub bound: i64,
    pub iterations: usize,
    pub residuals: Residuals,
    /// Smallest eigenvalue of every block at `y`, after the normalization of
    /// [`crate::LmiBlock::normalized_slack`].
    pub min_block_eigenvalues: Vec<f64>,
    pub wall_time_ms: u64,
    #[serde(skip)]
    pub y: Vec<f64>,
    /// Primal matrix per block, in the caller's block layout.
    #[serde(skip)]
    pub primal: Vec<Matrix>,
    #[serde(skip)]
    pub log: Vec<IterationLog>,
}

pub fn floor_bound(objective: f64) -> i64 {
    (objective + TOL_ROUND).floor() as i64
}

impl BoundResult {
    pub fn log_csv(&self) -> String {
        let mut s = String::from("iter,mu,pinf,dinf,gap\n");
        for e in &self.log {
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{:e}\n",
                e.iter, e.mu, e.pinf, e.dinf, e.gap
            ));
        }
        s
    }
}

struct WorkBlock {
    orig: usize,
    keep: Vec<usize>,
    scale: Vec<f64>,
    c: Matrix,
    a: Vec<(usize, Matrix)>,
}

impl WorkBlock {
    fn dim(&self) -> usize {
        self.c.rows()
    }
}

struct Scaling {
    g: Matrix,
    g_inv: Matrix,
    w: Matrix,
    lambda: Vec<f64>,
}

fn prepare(prob: &Problem) -> std::result::Result<Vec<WorkBlock>, usize> {
    let mut out = Vec::new();
    for (b, block) in prob.blocks.iter().enumerate() {
        let keep = block.active_rows();
        let mut merged: BTreeMap<usize, Matrix> = BTreeMap::new();
        for (k, f) in &block.coefficients {
            let sub = f.principal_submatrix(&keep);
            match merged.get_mut(k) {
                Some(m) => m.axpy(1.0, &sub),
                None => {
                    merged.insert(*k, sub);
                }
            }
        }
        merged.retain(|_, m| !m.is_zero());
        if merged.is_empty() {
            let c = block.constant.principal_submatrix(&keep);
            let scale = c.max_abs().max(1.0);
            if c.rows() > 0 && min_eigenvalue(&c).unwrap_or(f64::NEG_INFINITY) < -1e-12 * scale {
                return Err(b);
            }
            continue;
        }
        if keep.is_empty() {
            continue;
        }
        let d = block.equilibration(&keep);
        let c = block
            .constant
            .principal_submatrix(&keep)
            .congruence_diag(&d);
        let a = merged
            .into_iter()
            .map(|(k, m)| (k, m.congruence_diag(&d).scale(-1.0)))
            .collect();
        out.push(WorkBlock {
            orig: b,
            keep,
            scale: d,
            c,
            a,
        });
    }
    Ok(out)
}

fn a_op(blocks: &[WorkBlock], xs: &[Matrix], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (blk, x) in blocks.iter().zip(xs) {
        for (k, a) in &blk.a {
            out[*k] += a.dot(x);
        }
    }
    out
}

fn at_op(blocks: &[WorkBlock], y: &[f64]) -> Vec<Matrix> {
    blocks
        .iter()
        .map(|blk| {
            let mut s = Matrix::zeros(blk.dim(), blk.dim());
            for (k, a) in &blk.a {
                s.axpy(y[*k], a);
            }
            s
        })
        .collect()
}

fn nt_scaling(x: &Matrix, z: &Matrix) -> Option<Scaling> {
    let l = cholesky(x, 0.0)?;
    let lt = l.transpose();
    let inner = lt.matmul(z).matmul(&l).symmetrize();
    let eig = symmetric_eigen(&inner);
    if eig.values.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let lambda: Vec<f64> = eig.values.iter().map(|v| v.sqrt()).collect();
    let inv_sqrt: Vec<f64> = lambda.iter().map(|v| 1.0 / v.sqrt()).collect();
    let sqrt: Vec<f64> = lambda.iter().map(|v| v.sqrt()).collect();
    let g = l
        .matmul(&eig.vectors)
        .matmul(&Matrix::from_diagonal(&inv_sqrt));
    let l_inv = lower_triangular_inverse(&l);
    let g_inv = Matrix::from_diagonal(&sqrt)
        .matmul(&eig.vectors.transpose())
        .matmul(&l_inv);
    let w = g.matmul(&g.transpose()).symmetrize();
    Some(Scaling {
        g,
        g_inv,
        w,
        lambda,
    })
}

/// Largest `alpha` with `X + alpha * dX` still positive semidefinite.
fn max_step(x: &Matrix, dx: &Matrix) -> Option<f64> {
    let l = cholesky(x, 0.0)?;
    let li = lower_triangular_inverse(&l);
    let m = li.matmul(dx).matmul(&li.transpose()).symmetrize();
    let lo = symmetric_eigen(&m).values[0];
    Some(if lo < 0.0 { -1.0 / lo } else { f64::INFINITY })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn mats_norm(ms: &[Matrix]) -> f64 {
    ms.iter().map(|m| m.dot(m)).sum::<f64>().sqrt()
}

struct Direction {
    dx: Vec<Matrix>,
    dy: Vec<f64>,
    dz: Vec<Matrix>,
}

fn schur_matrix(blocks: &[WorkBlock], scal: &[Scaling], m: usize) -> Vec<f64> {
    let mut h = vec![0.0; m * m];
    for (blk, s) in blocks.iter().zip(scal) {
        for (l, al) in &blk.a {
            let t = s.w.matmul(al).matmul(&s.w);
            for (k, ak) in &blk.a {
                h[k * m + l] += ak.dot(&t);
            }
        }
    }
    for k in 0..m {
        for l in (k + 1)..m {
            let v = 0.5 * (h[k * m + l] + h[l * m + k]);
            h[k * m + l] = v;
            h[l * m + k] = v;
        }
    }
    h
}

/// Cholesky factor of the Jacobi-scaled Schur complement `S H S`.
struct SchurFactor {
    chol: Matrix,
    scale: Vec<f64>,
}

impl SchurFactor {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = rhs.iter().zip(&self.scale).map(|(r, s)| r * s).collect();
        cholesky_solve(&self.chol, &scaled)
            .into_iter()
            .zip(&self.scale)
            .map(|(v, s)| v * s)
            .collect()
    }
}

fn factor_schur(h: &[f64], m: usize) -> Option<SchurFactor> {
    let scale: Vec<f64> = (0..m)
        .map(|k| {
            let d = h[k * m + k];
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut hm = Matrix::zeros(m, m);
    for k in 0..m {
        for l in 0..m {
            hm[(k, l)] = h[k * m + l] * scale[k] * scale[l];
        }
    }
    for reg in [SCHUR_REG, 1e-10, 1e-8] {
        if let Some(chol) = cholesky(&hm, reg) {
            return Some(SchurFactor { chol, scale });
        }
    }
    None
}

fn solve_direction(
    blocks: &[WorkBlock],
    scal: &[Scaling],
    chol_h: &SchurFactor,
    rp: &[f64],
    rd: &[Matrix],
    rc: &[Matrix],
    m: usize,
) -> Direction {
    let wrdw: Vec<Matrix> = scal
        .iter()
        .zip(rd)
        .map(|(s, r)| s.w.matmul(r).matmul(&s.w))
        .collect();
    let a_rc = a_op(blocks, rc, m);
    let a_wrdw = a_op(blocks, &wrdw, m);
    let rhs: Vec<f64> = (0..m).map(|k| rp[k] - a_rc[k] + a_wrdw[k]).collect();
    let mut dy = chol_h.solve(&rhs);
    let mut best: Option<(f64, Direction)> = None;
    for _ in 0..=REFINE_STEPS {
        let dir = back_substitute(blocks, scal, rd, rc, &dy);
        let adx = a_op(blocks, &dir.dx, m);
        let resid: Vec<f64> = (0..m).map(|k| rp[k] - adx[k]).collect();
        let size = norm(&resid);
        let improved = best.as_ref().map_or(true, |(b, _)| size < *b);
        if !improved {
            break;
        }
        let corr = chol_h.solve(&resid);
        best = Some((size, dir));
        for (v, c) in dy.iter_mut().zip(&corr) {
            *v += c;
        }
    }
    best.expect("at least one pass").1
}

const REFINE_STEPS: usize = 3;

fn back_substitute(
    blocks: &[WorkBlock],
    scal: &[Scaling],
    rd: &[Matrix],
    rc: &[Matrix],
    dy: &[f64],
) -> Direction {
    let at_dy = at_op(blocks, dy);
    let dz: Vec<Matrix> = rd
        .iter()
        .zip(&at_dy)
        .map(|(r, a)| r.add_scaled(-1.0, a))
        .collect();
    let dx: Vec<Matrix> = rc
        .iter()
        .zip(scal)
        .zip(&dz)
        .map(|((r, s), d)| r.add_scaled(-1.0, &s.w.matmul(d).matmul(&s.w)).symmetrize())
        .collect();
    Direction {
        dx,
        dy: dy.to_vec(),
        dz,
    }
}

fn step_lengths(xs: &[Matrix], zs: &[Matrix], dir: &Direction) -> Option<(f64, f64)> {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for ((x, z), (dx, dz)) in xs.iter().zip(zs).zip(dir.dx.iter().zip(&dir.dz)) {
        ap = ap.min(max_step(x, dx)?);
        ad = ad.min(max_step(z, dz)?);
    }
    Some((ap, ad))
}

/// Solves the problem. Errors only on invalid input; solver trouble is
/// reported through [`BoundResult::status`].
pub fn solve(prob: &Problem, cfg: &SolverConfig) -> Result<BoundResult> {
    prob.validate()?;
    cfg.validate()?;
    let start = Instant::now();
    let m = prob.num_vars;
    let b = &prob.objective;

    let finish = |status: Status,
                  y: Vec<f64>,
                  primal: Vec<Matrix>,
                  pobj: f64,
                  dobj: f64,
                  iterations: usize,
                  residuals: Residuals,
                  log: Vec<IterationLog>| {
        let min_block_eigenvalues = block_min_eigenvalues(prob, &y);
        BoundResult {
            status,
            objective: pobj,
            dual_objective: dobj,
            bound: floor_bound(pobj),
            iterations,
            residuals,
            min_block_eigenvalues,
            wall_time_ms: start.elapsed().as_millis() as u64,
            y,
            primal,
            log,
        }
    };

    let blocks = match prepare(prob) {
        Ok(bl) => bl,
        Err(_) => {
            let primal = prob
                .blocks
                .iter()
                .map(|bl| Matrix::zeros(bl.dim(), bl.dim()))
                .collect();
            return Ok(finish(
                Status::InfeasibleDetected,
                vec![0.0; m],
                primal,
                f64::NAN,
                f64::NAN,
                0,
                Residuals::default(),
                Vec::new(),
            ));
        }
    };

    let norm_b = norm(b);
    let norm_c = mats_norm(&blocks.iter().map(|bl| bl.c.clone()).collect::<Vec<_>>());

    let mut xs = Vec::with_capacity(blocks.len());
    let mut zs = Vec::with_capacity(blocks.len());
    for blk in &blocks {
        let nb = blk.dim() as f64;
        let mut xi = 10.0f64.max(nb.sqrt());
        let mut eta = 10.0f64.max(nb.sqrt()).max(blk.c.frobenius_norm());
        for (k, a) in &blk.a {
            let na = a.frobenius_norm();
            xi = xi.max(nb.sqrt() * (1.0 + b[*k].abs()) / (1.0 + na));
            eta = eta.max(na);
        }
        xs.push(Matrix::identity(blk.dim()).scale(xi));
        zs.push(Matrix::identity(blk.dim()).scale(eta));
    }
    let mut y = vec![0.0; m];
    let total_dim: usize = blocks.iter().map(WorkBlock::dim).sum();
    let total_dim = total_dim.max(1) as f64;

    let mut log = Vec::new();
    let status;
    let mut iterations = 0;
    let mut residuals;
    let mut pobj;
    let mut dobj;

    loop {
        let ax = a_op(&blocks, &xs, m);
        let rp: Vec<f64> = (0..m).map(|k| b[k] - ax[k]).collect();
        let aty = at_op(&blocks, &y);
        let rd: Vec<Matrix> = blocks
            .iter()
            .zip(&aty)
            .zip(&zs)
            .map(|((blk, a), z)| blk.c.add_scaled(-1.0, a).add_scaled(-1.0, z))
            .collect();
        let p_lin: f64 = blocks.iter().zip(&xs).map(|(blk, x)| blk.c.dot(x)).sum();
        let d_lin: f64 = b.iter().zip(&y).map(|(a, v)| a * v).sum();
        pobj = prob.objective_offset + p_lin;
        dobj = prob.objective_offset + d_lin;
        let xz: f64 = xs.iter().zip(&zs).map(|(x, z)| x.dot(z)).sum();
        let mu = xz / total_dim;
        residuals = Residuals {
            primal: norm(&rp) / (1.0 + norm_b),
            dual: mats_norm(&rd) / (1.0 + norm_c),
            gap: (p_lin - d_lin).abs() / (1.0 + p_lin.abs() + d_lin.abs()),
        };
        log.push(IterationLog {
            iter: iterations,
            mu,
            pinf: residuals.primal,
            dinf: residuals.dual,
            gap: residuals.gap,
            primal_objective: pobj,
            dual_objective: dobj,
        });

        if residuals.primal <= cfg.tol_feas
            && residuals.dual <= cfg.tol_feas
            && residuals.gap <= cfg.tol_gap
            && block_min_eigenvalues(prob, &y)
                .iter()
                .all(|&e| e >= -cfg.tol_feas)
        {
            status = Status::Optimal;
            break;
        }
        if !pobj.is_finite()
            || !dobj.is_finite()
            || norm(&y) > DIVERGENCE_LIMIT
            || mats_norm(&xs) > DIVERGENCE_LIMIT
        {
            status = Status::InfeasibleDetected;
            break;
        }
        if iterations >= cfg.max_iter {
            status = Status::MaxIter;
            break;
        }
        iterations += 1;

        let scal: Option<Vec<Scaling>> =
            xs.iter().zip(&zs).map(|(x, z)| nt_scaling(x, z)).collect();
        let Some(scal) = scal else {
            status = Status::NumericalFailure;
            break;
        };
        let h = schur_matrix(&blocks, &scal, m);
        let Some(chol_h) = factor_schur(&h, m) else {
            status = Status::NumericalFailure;
            break;
        };

        let rc_pred: Vec<Matrix> = xs.iter().map(|x| x.scale(-1.0)).collect();
        let pred = solve_direction(&blocks, &scal, &chol_h, &rp, &rd, &rc_pred, m);
        let Some((ap_max, ad_max)) = step_lengths(&xs, &zs, &pred) else {
            status = Status::NumericalFailure;
            break;
        };
        let ap = (cfg.step_fraction * ap_max).min(1.0);
        let ad = (cfg.step_fraction * ad_max).min(1.0);
        let xz_pred: f64 = xs
            .iter()
            .zip(&zs)
            .zip(pred.dx.iter().zip(&pred.dz))
            .map(|((x, z), (dx, dz))| x.add_scaled(ap, dx).dot(&z.add_scaled(ad, dz)))
            .sum();
        let ratio = (xz_pred / xz).clamp(0.0, 1.0);
        let sigma = ratio.powi(3);

        let rc_corr: Vec<Matrix> = scal
            .iter()
            .zip(pred.dx.iter().zip(&pred.dz))
            .map(|(s, (dx, dz))| {
                let dxt = s.g_inv.matmul(dx).matmul(&s.g_inv.transpose());
                let dzt = s.g.transpose().matmul(dz).matmul(&s.g);
                let prod = dxt.matmul(&dzt);
                let n = s.lambda.len();
                let mut p = Matrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let mut r = -0.5 * (prod[(i, j)] + prod[(j, i)]);
                        if i == j {
                            r += sigma * mu - s.lambda[i] * s.lambda[i];
                        }
                        p[(i, j)] = 2.0 * r / (s.lambda[i] + s.lambda[j]);
                    }
                }
                s.g.matmul(&p).matmul(&s.g.transpose()).symmetrize()
            })
            .collect();
        let dir = solve_direction(&blocks, &scal, &chol_h, &rp, &rd, &rc_corr, m);
        let Some((ap_max, ad_max)) = step_lengths(&xs, &zs, &dir) else {
            status = Status::NumericalFailure;
            break;
        };
        let ap = (cfg.step_fraction * ap_max).min(1.0);
        let ad = (cfg.step_fraction * ad_max).min(1.0);
        if !(ap > 0.0 && ad > 0.0) || dir.dy.iter().any(|v| !v.is_finite()) {
            status = Status::NumericalFailure;
            break;
        }
        for (x, dx) in xs.iter_mut().zip(&dir.dx) {
            x.axpy(ap, dx);
        }
        for (z, dz) in zs.iter_mut().zip(&dir.dz) {
            z.axpy(ad, dz);
        }
        for (v, dv) in y.iter_mut().zip(&dir.dy) {
            *v += ad * dv;
        }
    }

    let primal = restore_primal(prob, &blocks, &xs);
    Ok(finish(
        status, y, primal, pobj, dobj, iterations, residuals, log,
    ))
}

/// Maps equilibrated, row-reduced primal blocks back to the caller's layout.
fn restore_primal(prob: &Problem, blocks: &[WorkBlock], xs: &[Matrix]) -> Vec<Matrix> {
    let mut out: Vec<Matrix> = prob
        .blocks
        .iter()
        .map(|bl| Matrix::zeros(bl.dim(), bl.dim()))
        .collect();
    for (blk, x) in blocks.iter().zip(xs) {
        let full = &mut out[blk.orig];
        for (a, &i) in blk.keep.iter().enumerate() {
            for (c, &j) in blk.keep.iter().enumerate() {
                full[(i, j)] = blk.scale[a] * x[(a, c)] * blk.scale[c];
            }
        }
    }
    out
}

/// Smallest eigenvalue of every normalized block slack at `y`.
pub fn block_min_eigenvalues(prob: &Problem, y: &[f64]) -> Vec<f64> {
    prob.blocks
        .iter()
        .map(|bl| {
            let s = bl.normalized_slack(y).symmetrize();
            min_eigenvalue(&s).unwrap_or(f64::NAN)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::LmiBlock;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            step_fraction: 1.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            tol_gap: 0.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn floor_bound_rounding() {
        assert_eq!(floor_bound(24.0), 24);
        assert_eq!(floor_bound(23.999_999_5), 24);
        assert_eq!(floor_bound(23.99), 23);
    }

    #[test]
    fn non_psd_constant_block_is_infeasible() {
        let mut p = Problem::new(vec![1.0]);
        p.push(LmiBlock::scalar(1.0, &[(0, -1.0)]));
        p.push(LmiBlock::new(Matrix::from_diagonal(&[-1.0])));
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, Status::InfeasibleDetected);
    }
}

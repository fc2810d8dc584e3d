//! The orthonormal basis `u_{r,xi,i}`, conjugated orbit matrices and the
//! numerically measured block coefficients.

use std::collections::{BTreeMap, HashMap};

use conic::Matrix;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::coefficients::{block_labels, block_scale, prefactor};
use crate::cube::{check_enumerable, check_profile, diameter, TripleProfile};
use crate::error::{invalid, Error, Result};

use super::basis::{BasisMatrices, Levels};
use super::kernel::{apply_between, dot, level_kernel_with, norm, LevelBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ColumnLabel {
    pub r: u32,
    pub xi: usize,
    pub i: u32,
}

/// Columns `u_{r,xi,i}`, each stored on the coordinates of level `i`.
#[derive(Debug, Clone)]
pub struct ChangeOfBasis {
    pub n: u32,
    pub labels: Vec<ColumnLabel>,
    pub kernels: Vec<LevelBasis>,
    columns: Vec<Vec<f64>>,
    levels: Levels,
    index: HashMap<ColumnLabel, usize>,
}

impl ChangeOfBasis {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position(&self, label: ColumnLabel) -> Option<usize> {
        self.index.get(&label).copied()
    }

    /// Column `k` restricted to level `labels[k].i`.
    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k]
    }

    pub fn full_column(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.levels.of.len()];
        for (&v, &x) in self.levels.members[self.labels[k].i as usize]
            .iter()
            .zip(&self.columns[k])
        {
            out[v as usize] = x;
        }
        out
    }

    pub fn kernel(&self, r: u32) -> Option<&LevelBasis> {
        self.kernels.iter().find(|k| k.r == r)
    }

    /// `max |U^T U - I|`. Columns on different levels have disjoint
    /// supports, so only same-level Gram blocks are formed.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut by_level: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (k, l) in self.labels.iter().enumerate() {
            by_level.entry(l.i).or_default().push(k);
        }
        let mut worst: f64 = 0.0;
        for cols in by_level.values() {
            for (a, &p) in cols.iter().enumerate() {
                for &q in &cols[..=a] {
                    let g = dot(&self.columns[p], &self.columns[q]);
                    let target = if p == q { 1.0 } else { 0.0 };
                    worst = worst.max((g - target).abs());
                }
            }
        }
        worst
    }

    /// Dense `|X| x |X|` matrix with the columns in label order.
    pub fn to_dense(&self) -> Matrix {
        let dim = self.levels.of.len();
        let mut u = Matrix::zeros(dim, self.len());
        for k in 0..self.len() {
            for (row, x) in self.full_column(k).into_iter().enumerate() {
                u[(row, k)] = x;
            }
        }
        u
    }
}

pub fn build_change_of_basis(n: u32) -> Result<ChangeOfBasis> {
    check_enumerable(n)?;
    let basis = BasisMatrices::build(n)?;
    change_of_basis_with(&basis)
}

pub fn change_of_basis_with(basis: &BasisMatrices) -> Result<ChangeOfBasis> {
    let n = basis.n;
    let mut labels = Vec::new();
    let mut columns = Vec::new();
    let mut kernels = Vec::new();
    for r in 0..=diameter(n) {
        let Some(range) = block_labels(r, n) else {
            continue;
        };
        let kernel = level_kernel_with(basis, r)?;
        for (xi, v) in kernel.vectors.iter().enumerate() {
            for &i in &range {
                let raise = basis.get(i, r, r).expect("raising profile is admissible");
                let s = block_scale(r, i, n);
                let u: Vec<f64> = apply_between(raise, &basis.levels, r, i, v)
                    .into_iter()
                    .map(|x| x * s)
                    .collect();
                labels.push(ColumnLabel { r, xi, i });
                columns.push(u);
            }
        }
        kernels.push(kernel);
    }
    let index = labels.iter().enumerate().map(|(k, &l)| (l, k)).collect();
    Ok(ChangeOfBasis {
        n,
        labels,
        kernels,
        columns,
        levels: basis.levels.clone(),
        index,
    })
}

/// Block structure of `U^T M^t_{i,j} U` for one profile.
#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub profile: TripleProfile,
    /// Upper bound on every off-block entry: the largest norm of a column's
    /// part outside its own block.
    pub max_off_block: f64,
    /// Entry `(i, j)` of block `r`, read from the first copy.
    pub entries: BTreeMap<u32, f64>,
    /// Largest disagreement between copies of the same block.
    pub copy_spread: f64,
}

pub fn conjugated_blocks(
    p: TripleProfile,
    basis: &BasisMatrices,
    u: &ChangeOfBasis,
) -> Result<BlockReport> {
    check_profile(p, basis.n)?;
    let m = basis.get(p.i, p.j, p.t).expect("admissible");
    let mut report = BlockReport {
        profile: p,
        max_off_block: 0.0,
        entries: BTreeMap::new(),
        copy_spread: 0.0,
    };
    for (k, label) in u.labels.iter().enumerate() {
        if label.i != p.j {
            continue;
        }
        let v = apply_between(m, &basis.levels, p.j, p.i, u.column(k));
        let partner = u.position(ColumnLabel {
            r: label.r,
            xi: label.xi,
            i: p.i,
        });
        let (kappa, residual) = match partner {
            Some(q) => {
                let col = u.column(q);
                let kappa = dot(col, &v);
                let rest: Vec<f64> = v.iter().zip(col).map(|(a, b)| a - kappa * b).collect();
                (kappa, norm(&rest))
            }
            None => (0.0, norm(&v)),
        };
        report.max_off_block = report.max_off_block.max(residual);
        if partner.is_some() {
            match report.entries.get(&label.r) {
                Some(&first) => {
                    report.copy_spread = report.copy_spread.max((kappa - first).abs());
                }
                None => {
                    report.entries.insert(label.r, kappa);
                }
            }
        }
    }
    Ok(report)
}

/// `U^T M^t_{i,j} U` formed densely; intended for small `n` only.
pub fn dense_conjugate(
    p: TripleProfile,
    basis: &BasisMatrices,
    u: &ChangeOfBasis,
) -> Result<Matrix> {
    check_profile(p, basis.n)?;
    let m = basis.get(p.i, p.j, p.t).expect("admissible");
    let dim = basis.dim();
    let ud = u.to_dense();
    let mut md = Matrix::zeros(dim, dim);
    for (r, c, v) in m.entries() {
        md[(r, c)] = v as f64;
    }
    Ok(ud.transpose().matmul(&md).matmul(&ud))
}

/// Relative residual allowed in the proportionality check.
pub const ORACLE_TOL: f64 = 1e-6;

fn measure(basis: &BasisMatrices, xi: &[f64], r: u32, i: u32, j: u32, t: u32) -> Result<f64> {
    let n = basis.n;
    let levels = &basis.levels;
    let raise_j = basis.get(j, r, r).expect("admissible");
    let raise_i = basis.get(i, r, r).expect("admissible");
    let m = basis.get(i, j, t).expect("admissible");
    let c = prefactor(r, i, n).to_f64().unwrap();
    let w: Vec<f64> = apply_between(m, levels, j, i, &apply_between(raise_j, levels, r, j, xi))
        .into_iter()
        .map(|x| c * x)
        .collect();
    let target = apply_between(raise_i, levels, r, i, xi);
    let tt = dot(&target, &target);
    if tt == 0.0 {
        return Err(invalid(format!("M^{r}_{{{i},{r}}} annihilates L_{r}")));
    }
    let beta = dot(&w, &target) / tt;
    let rest: Vec<f64> = w.iter().zip(&target).map(|(a, b)| a - beta * b).collect();
    let scale = norm(&w).max(tt.sqrt());
    if norm(&rest) > ORACLE_TOL * scale {
        return Err(Error::OracleInconsistency(format!(
            "({r},{i},{j},{t}): M^t_(i,j) M^r_(j,r) xi is not proportional to M^r_(i,r) xi (residual {:.3e})",
            norm(&rest) / scale
        )));
    }
    Ok(beta)
}

fn nearest_integer(beta: f64, key: (u32, u32, u32, u32)) -> Result<i64> {
    let rounded = beta.round();
    if (beta - rounded).abs() > ORACLE_TOL * beta.abs().max(1.0) {
        return Err(Error::OracleInconsistency(format!(
            "{key:?}: measured coefficient {beta} is not an integer"
        )));
    }
    Ok(rounded as i64)
}

/// Measures `beta^r_{i,j,t}` from its defining relation with the first
/// vector of `L_r`, and re-measures with the second vector when one exists.
pub fn beta_oracle_with(
    basis: &BasisMatrices,
    kernel: &LevelBasis,
    i: u32,
    j: u32,
    t: u32,
) -> Result<i64> {
    let n = basis.n;
    let r = kernel.r;
    check_profile(TripleProfile::new(i, j, t, n), n)?;
    let labels = block_labels(r, n).unwrap_or_default();
    if !labels.contains(&i) || !labels.contains(&j) {
        return Err(invalid(format!(
            "({i},{j}) outside the labels of block {r}"
        )));
    }
    if kernel.vectors.is_empty() {
        return Err(invalid(format!("L_{r} is trivial for n = {n}")));
    }
    let key = (r, i, j, t);
    let first = measure(basis, &kernel.vectors[0], r, i, j, t)?;
    if let Some(second) = kernel.vectors.get(1) {
        let again = measure(basis, second, r, i, j, t)?;
        if (again - first).abs() > ORACLE_TOL * first.abs().max(1.0) {
            return Err(Error::OracleInconsistency(format!(
                "{key:?}: coefficient depends on the vector of L_r ({first} vs {again})"
            )));
        }
    }
    nearest_integer(first, key)
}

pub fn beta_oracle(r: u32, i: u32, j: u32, t: u32, n: u32) -> Result<i64> {
    check_enumerable(n)?;
    let basis = BasisMatrices::build(n)?;
    let kernel = level_kernel_with(&basis, r)?;
    beta_oracle_with(&basis, &kernel, i, j, t)
}

/// Every measurable `beta^r_{i,j,t}` of one `n`.
pub fn oracle_beta_values(basis: &BasisMatrices) -> Result<BTreeMap<(u32, u32, u32, u32), i64>> {
    let n = basis.n;
    let mut out = BTreeMap::new();
    for r in 0..=diameter(n) {
        let Some(labels) = block_labels(r, n) else {
            continue;
        };
        let kernel = level_kernel_with(basis, r)?;
        if kernel.vectors.is_empty() {
            continue;
        }
        for p in &basis.profiles.profiles {
            if labels.contains(&p.i) && labels.contains(&p.j) {
                out.insert(
                    (r, p.i, p.j, p.t),
                    beta_oracle_with(basis, &kernel, p.i, p.j, p.t)?,
                );
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_counts_and_orthonormality() {
        for (n, cols) in [(6, 32), (7, 64), (8, 128), (9, 256)] {
            let u = build_change_of_basis(n).unwrap();
            assert_eq!(u.len(), cols);
            assert!(u.orthonormality_defect() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn per_column_report_matches_dense_conjugate() {
        let b = BasisMatrices::build(8).unwrap();
        let u = change_of_basis_with(&b).unwrap();
        for (p, _) in b.iter().step_by(4) {
            let rep = conjugated_blocks(p, &b, &u).unwrap();
            let dense = dense_conjugate(p, &b, &u).unwrap();
            let mut off: f64 = 0.0;
            for a in 0..u.len() {
                for c in 0..u.len() {
                    let (la, lc) = (u.labels[a], u.labels[c]);
                    let same = la.r == lc.r && la.xi == lc.xi && la.i == p.i && lc.i == p.j;
                    if same {
                        assert!((dense[(a, c)] - rep.entries[&la.r]).abs() < 1e-9);
                    } else {
                        off = off.max(dense[(a, c)].abs());
                    }
                }
            }
            assert!(off <= rep.max_off_block + 1e-12);
            assert!(rep.max_off_block < 1e-8, "{p}");
        }
    }

    #[test]
    fn single_entry_profile_lives_in_block_zero() {
        let b = BasisMatrices::build(8).unwrap();
        let u = change_of_basis_with(&b).unwrap();
        let rep = conjugated_blocks(TripleProfile::new(0, 0, 0, 8), &b, &u).unwrap();
        assert_eq!(rep.entries.keys().copied().collect::<Vec<_>>(), vec![0]);
        assert!((rep.entries[&0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn worked_oracle_values() {
        assert_eq!(beta_oracle(0, 2, 2, 1, 8).unwrap(), 336);
        assert_eq!(beta_oracle(4, 4, 4, 4, 8).unwrap(), 1);
        assert_eq!(beta_oracle(0, 1, 1, 0, 9).unwrap(), 72);
        assert!(beta_oracle(1, 4, 4, 4, 8).is_err());
    }
}

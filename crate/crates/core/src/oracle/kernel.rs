//! The spaces `L_r`: vectors on level `r` killed by the one-step lowering map.

use crate::cube::{check_enumerable, diameter};
use crate::error::{invalid, Result};

use super::basis::{BasisMatrices, Levels};
use super::sparse::SparseMatrix;

/// Rank tolerance, relative to the largest row norm.
pub const RANK_TOL: f64 = 1e-9;

/// Orthonormal basis of `L_r`, stored on the coordinates of level `r`.
#[derive(Debug, Clone)]
pub struct LevelBasis {
    pub r: u32,
    /// Vertex indices of level `r`; coordinate `k` of a vector sits at `support[k]`.
    pub support: Vec<u32>,
    pub vectors: Vec<Vec<f64>>,
}

impl LevelBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Vector `k` as a full-length vector over `X`.
    pub fn full(&self, k: usize, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (&v, &x) in self.support.iter().zip(&self.vectors[k]) {
            out[v as usize] = x;
        }
        out
    }
}

/// `y = M x` where `x` lives on level `from` and `y` is read off on level `to`.
pub(crate) fn apply_between(
    m: &SparseMatrix,
    levels: &Levels,
    from: u32,
    to: u32,
    x: &[f64],
) -> Vec<f64> {
    levels.members[to as usize]
        .iter()
        .map(|&row| {
            m.row(row as usize)
                .filter_map(|(c, v)| {
                    let (l, pos) = levels.of[c];
                    (l == from).then(|| v as f64 * x[pos as usize])
                })
                .sum()
        })
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Removes the components of `v` along `basis`, twice for stability.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            if c != 0.0 {
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
    }
}

pub fn level_kernel_basis(r: u32, n: u32) -> Result<LevelBasis> {
    check_enumerable(n)?;
    let basis = BasisMatrices::build(n)?;
    level_kernel_with(&basis, r)
}

pub fn level_kernel_with(basis: &BasisMatrices, r: u32) -> Result<LevelBasis> {
    let d = diameter(basis.n);
    if r > d {
        return Err(invalid(format!("r = {r} exceeds the diameter {d}")));
    }
    let levels = &basis.levels;
    let support = levels.members[r as usize].clone();
    let width = support.len();
    if r == 0 {
        return Ok(LevelBasis {
            r,
            support,
            vectors: vec![vec![1.0]],
        });
    }
    let lower = basis
        .get(r - 1, r, r - 1)
        .expect("one-step lowering profile is always admissible");

    let rows: Vec<Vec<f64>> = levels.members[(r - 1) as usize]
        .iter()
        .map(|&a| {
            let mut row = vec![0.0; width];
            for (c, v) in lower.row(a as usize) {
                let (l, pos) = levels.of[c];
                if l == r {
                    row[pos as usize] = v as f64;
                }
            }
            row
        })
        .collect();
    let scale = rows.iter().map(|v| norm(v)).fold(0.0, f64::max);

    let mut range: Vec<Vec<f64>> = Vec::new();
    for mut v in rows {
        orthogonalize(&mut v, &range);
        let nv = norm(&v);
        if nv > RANK_TOL * scale.max(1.0) {
            v.iter_mut().for_each(|x| *x /= nv);
            range.push(v);
        }
    }

    // complete with coordinate vectors of largest residual
    let mut residual: Vec<f64> = (0..width)
        .map(|c| 1.0 - range.iter().map(|q| q[c] * q[c]).sum::<f64>())
        .collect();
    let mut kernel: Vec<Vec<f64>> = Vec::new();
    while range.len() + kernel.len() < width {
        let (c, &best) = residual
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        if best.max(0.0).sqrt() <= RANK_TOL {
            break;
        }
        let mut v = vec![0.0; width];
        v[c] = 1.0;
        orthogonalize(&mut v, &range);
        orthogonalize(&mut v, &kernel);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        for (res, x) in residual.iter_mut().zip(&v) {
            *res -= x * x;
        }
        kernel.push(v);
    }
    Ok(LevelBasis {
        r,
        support,
        vectors: kernel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::multiplicity;
    use num_traits::ToPrimitive;

    #[test]
    fn dimensions_small_n() {
        for n in 6..=9 {
            let b = BasisMatrices::build(n).unwrap();
            for r in 0..=diameter(n) {
                let l = level_kernel_with(&b, r).unwrap();
                assert_eq!(
                    l.dim(),
                    multiplicity(r, n).to_usize().unwrap(),
                    "n={n} r={r}"
                );
            }
        }
        assert_eq!(level_kernel_basis(4, 8).unwrap().dim(), 14);
    }

    #[test]
    fn vectors_are_orthonormal_and_killed() {
        let b = BasisMatrices::build(8).unwrap();
        for r in 1..=4 {
            let l = level_kernel_with(&b, r).unwrap();
            let lower = b.get(r - 1, r, r - 1).unwrap();
            for (k, v) in l.vectors.iter().enumerate() {
                let image = apply_between(lower, &b.levels, r, r - 1, v);
                assert!(norm(&image) < 1e-9);
                for w in &l.vectors[..k] {
                    assert!(dot(v, w).abs() < 1e-12);
                }
                assert!((norm(v) - 1.0).abs() < 1e-12);
            }
        }
    }
}

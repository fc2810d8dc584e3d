//! Exact checks of the structural identities among the orbit matrices.

use serde::Serialize;

use crate::cube::{canonical_mask, check_enumerable, diameter, num_vertices};
use crate::error::Result;

use super::basis::BasisMatrices;
use super::sparse::{Mismatch, SparseMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    pub instances: usize,
    /// Largest absolute entry of `lhs - rhs` over all instances.
    pub max_residual: f64,
    pub counterexample: Option<String>,
    /// Labels of every failing instance.
    pub failing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n: u32,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Family {
    check: IdentityCheck,
}

impl Family {
    fn new(name: &str) -> Self {
        Self {
            check: IdentityCheck {
                name: name.to_string(),
                passed: true,
                instances: 0,
                max_residual: 0.0,
                counterexample: None,
                failing: Vec::new(),
            },
        }
    }

    fn record(&mut self, label: impl FnOnce() -> String, lhs: &SparseMatrix, rhs: &SparseMatrix) {
        self.check.instances += 1;
        if let Some(m) = lhs.first_difference(rhs) {
            let diff = SparseMatrix::linear_combination(lhs.dim(), &[(1, lhs), (-1, rhs)]);
            let worst = diff.entries().map(|(_, _, v)| v.abs()).max().unwrap_or(0);
            self.check.max_residual = self.check.max_residual.max(worst as f64);
            let label = label();
            if self.check.passed {
                self.check.counterexample = Some(describe(&label, m));
            }
            self.check.failing.push(label);
            self.check.passed = false;
        }
    }

    fn finish(self) -> IdentityCheck {
        self.check
    }
}

fn describe(label: &str, m: Mismatch) -> String {
    format!("{label}: {m}")
}

pub(crate) fn binom_i64(a: i64, b: i64) -> i64 {
    if b < 0 || a < 0 || b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut r: i64 = 1;
    for k in 0..b {
        r = r * (a - k) / (k + 1);
    }
    r
}

fn factorial(k: u32) -> i64 {
    (1..=k as i64).product()
}

fn sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Adjacency matrix of the folded cube, built from bit flips.
pub fn adjacency(n: u32) -> SparseMatrix {
    let dim = num_vertices(n) as usize;
    let mut entries = Vec::with_capacity(dim * n as usize);
    for x in 0..dim as u64 {
        for b in 0..n {
            let y = canonical_mask(x ^ (1 << b), n);
            entries.push((x as usize, y as usize, 1));
        }
    }
    // duplicates cannot occur for n >= 3: distinct flips give distinct classes
    SparseMatrix::from_triplets(dim, entries)
}

/// `E*_i`: diagonal indicator of the vertices at distance `i` from the 0-class.
pub fn dual_idempotent(basis: &BasisMatrices, i: u32) -> SparseMatrix {
    let members = &basis.levels.members[i as usize];
    SparseMatrix::diagonal(basis.dim(), members.iter().map(|&v| (v as usize, 1)))
}

fn chain(mats: &[&SparseMatrix], dim: usize) -> SparseMatrix {
    let mut it = mats.iter();
    let first = match it.next() {
        Some(m) => (*m).clone(),
        None => return SparseMatrix::zeros(dim),
    };
    it.fold(first, |acc, m| acc.matmul(m))
}

fn or_zero(m: Option<&SparseMatrix>, dim: usize) -> SparseMatrix {
    m.cloned().unwrap_or_else(|| SparseMatrix::zeros(dim))
}

/// Runs every identity family at `n`.
pub fn verify_identities(n: u32) -> Result<IdentityReport> {
    check_enumerable(n)?;
    let basis = BasisMatrices::build(n)?;
    Ok(verify_with(&basis))
}

pub fn verify_with(basis: &BasisMatrices) -> IdentityReport {
    let n = basis.n;
    let d = diameter(n);
    let dim = basis.dim();
    let even = n % 2 == 0;
    let m = |i: u32, j: u32, t: u32| or_zero(basis.get(i, j, t), dim);
    let mut checks = Vec::new();

    let mut fam = Family::new("partition");
    let mut covered = vec![0u8; dim * dim];
    for (_, mm) in basis.iter() {
        for (r, c, _) in mm.entries() {
            covered[r * dim + c] = covered[r * dim + c].saturating_add(1);
        }
    }
    fam.check.instances = 1;
    if let Some(pos) = covered.iter().position(|&k| k != 1) {
        fam.check.passed = false;
        fam.check.max_residual = (covered[pos] as f64 - 1.0).abs();
        fam.check.counterexample = Some(format!(
            "pair ({}, {}) lies in {} orbits",
            pos / dim,
            pos % dim,
            covered[pos]
        ));
    }
    drop(covered);
    checks.push(fam.finish());

    let mut fam = Family::new("transpose");
    for (p, mm) in basis.iter() {
        let other = m(p.j, p.i, p.t);
        fam.record(
            || format!("M^{}_{{{},{}}}", p.t, p.i, p.j),
            &mm.transpose(),
            &other,
        );
    }
    checks.push(fam.finish());

    let mut fam = Family::new("dual-idempotent");
    for i in 0..=d {
        fam.record(|| format!("i={i}"), &m(i, i, i), &dual_idempotent(basis, i));
    }
    checks.push(fam.finish());

    let a1 = adjacency(n);
    let mut fam = Family::new("raising-lowering");
    for i in 1..=d {
        let lo = dual_idempotent(basis, i - 1);
        let hi = dual_idempotent(basis, i);
        fam.record(
            || format!("E*_{} A E*_{}", i - 1, i),
            &m(i - 1, i, i - 1),
            &lo.matmul(&a1).matmul(&hi),
        );
        fam.record(
            || format!("E*_{} A E*_{}", i, i - 1),
            &m(i, i - 1, i - 1),
            &hi.matmul(&a1).matmul(&lo),
        );
    }
    checks.push(fam.finish());

    let mut fam = Family::new("adjacency");
    let mut parts: Vec<SparseMatrix> = Vec::new();
    for i in 1..=d {
        parts.push(m(i, i - 1, i - 1));
        parts.push(m(i - 1, i, i - 1));
    }
    if !even {
        parts.push(m(d, d, 0));
    }
    let terms: Vec<(i64, &SparseMatrix)> = parts.iter().map(|p| (1, p)).collect();
    fam.record(
        || "sum of ladder steps".into(),
        &SparseMatrix::linear_combination(dim, &terms),
        &a1,
    );
    checks.push(fam.finish());

    let mut up = Family::new("ladder-up");
    let mut down = Family::new("ladder-down");
    for k in 0..=d {
        for i in 1..=(d - k) {
            let allowed = if even { k != 0 || i <= d - 1 } else { true };
            if !allowed {
                continue;
            }
            let steps: Vec<SparseMatrix> =
                (0..i).rev().map(|s| m(k + s + 1, k + s, k + s)).collect();
            let refs: Vec<&SparseMatrix> = steps.iter().collect();
            up.record(
                || format!("k={k}, i={i}"),
                &m(k + i, k, k).scale(factorial(i)),
                &chain(&refs, dim),
            );
        }
    }
    for k in 1..=d {
        for i in 1..=k {
            let allowed = if even { i < k || k <= d - 1 } else { true };
            if !allowed {
                continue;
            }
            let steps: Vec<SparseMatrix> = (0..i)
                .map(|s| m(k - i + s, k - i + s + 1, k - i + s))
                .collect();
            let refs: Vec<&SparseMatrix> = steps.iter().collect();
            down.record(
                || format!("k={k}, i={i}"),
                &m(k - i, k, k - i).scale(factorial(i)),
                &chain(&refs, dim),
            );
        }
    }
    checks.push(up.finish());
    checks.push(down.finish());

    if even {
        let mut fam = Family::new("ladder-top");
        let steps: Vec<SparseMatrix> = (0..d).rev().map(|s| m(s + 1, s, s)).collect();
        let refs: Vec<&SparseMatrix> = steps.iter().collect();
        fam.record(
            || format!("D={d}"),
            &m(d, 0, 0).scale(2 * factorial(d)),
            &chain(&refs, dim),
        );
        checks.push(fam.finish());
    }

    checks.push(expansion_family(basis));
    IdentityReport { n, checks }
}

/// `M^t_{i,j}` as signed sums of `M^k_{i,k} M^k_{k,j}`.
fn expansion_family(basis: &BasisMatrices) -> IdentityCheck {
    let n = basis.n;
    let d = diameter(n);
    let dim = basis.dim();
    let even = n % 2 == 0;
    let mut fam = Family::new("expansion");
    for i in 0..=d {
        for j in 0..=d {
            let ts: Vec<u32> = (0..=i.min(j))
                .filter(|&t| basis.profiles.contains(i, j, t))
                .collect();
            if ts.is_empty() {
                continue;
            }
            let products: Vec<Option<SparseMatrix>> = (0..=d)
                .map(|k| match (basis.get(i, k, k), basis.get(k, j, k)) {
                    (Some(a), Some(b)) => Some(a.matmul(b)),
                    _ => None,
                })
                .collect();
            let ed = dual_idempotent(basis, d);
            for &t in &ts {
                let target = basis.get(i, j, t).expect("admissible");
                let (lhs_scale, k_range, extra): (i64, Vec<u32>, i64) = if !even {
                    (1, (0..=d).collect(), 0)
                } else if i < d && j < d {
                    (1, (0..d).collect(), 0)
                } else if i == d && j < d {
                    // at t = 0 the sum has the single term k = 0 and no halving
                    if 2 * t == j {
                        (if t > 0 { 2 } else { 1 }, (j / 2..d).collect(), 0)
                    } else {
                        (1, (j / 2 + 1..d).collect(), 0)
                    }
                } else if i < d && j == d {
                    if 2 * t == i {
                        (if t > 0 { 2 } else { 1 }, (i / 2..d).collect(), 0)
                    } else {
                        (1, (i / 2 + 1..d).collect(), 0)
                    }
                } else if 2 * t == d {
                    (
                        4,
                        (d / 2..=d).collect(),
                        sign(d as i64 / 2) * binom_i64(d as i64, d as i64 / 2),
                    )
                } else {
                    (
                        2,
                        (d / 2 + 1..=d).collect(),
                        sign(d as i64 - t as i64) * binom_i64(d as i64, t as i64),
                    )
                };
                let mut terms: Vec<(i64, &SparseMatrix)> = Vec::new();
                for k in k_range {
                    let c = sign(k as i64 - t as i64) * binom_i64(k as i64, t as i64);
                    if c == 0 {
                        continue;
                    }
                    if let Some(p) = &products[k as usize] {
                        terms.push((c, p));
                    }
                }
                if extra != 0 {
                    terms.push((extra, &ed));
                }
                let rhs = SparseMatrix::linear_combination(dim, &terms);
                fam.record(
                    || format!("(i,j,t)=({i},{j},{t})"),
                    &target.scale(lhs_scale),
                    &rhs,
                );
            }
        }
    }
    fam.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_example_n8() {
        let b = BasisMatrices::build(8).unwrap();
        let lhs = b.get(2, 1, 1).unwrap().matmul(b.get(1, 0, 0).unwrap());
        assert_eq!(lhs, b.get(2, 0, 0).unwrap().scale(2));
        assert_eq!(b.get(4, 4, 4).unwrap(), &dual_idempotent(&b, 4));
    }

    #[test]
    fn halved_expansion_fails_at_t0() {
        let b = BasisMatrices::build(8).unwrap();
        let m = b.get(4, 0, 0).unwrap();
        let product = m.matmul(b.get(0, 0, 0).unwrap());
        assert_eq!(&product, m);
        assert_ne!(m.scale(2), product);
    }

    #[test]
    fn small_n_identities() {
        for n in 6..=9 {
            let rep = verify_identities(n).unwrap();
            for c in &rep.checks {
                assert!(
                    c.passed,
                    "n={n} {}: {:?} {:?}",
                    c.name, c.counterexample, c.failing
                );
                assert!(c.instances > 0);
            }
        }
    }
}

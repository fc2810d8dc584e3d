//! Delsarte's linear programming bound on the folded cube.

use conic::{BoundResult, LmiBlock, Problem, SolverConfig};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::coefficients::binom;
use crate::cube::{check_n, diameter, num_vertices, valency};
use crate::error::{invalid, Error, Result};

/// `sum_k (-1)^k C(i,k) C(n-i, 2j-k)`.
pub fn q_bar(j: u32, i: u32, n: u32) -> BigInt {
    let (i, n) = (i as i64, n as i64);
    (0..=2 * j as i64)
        .map(|k| {
            let term = binom(i, k) * binom(n - i, 2 * j as i64 - k);
            if k % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenmatrixTable {
    pub n: u32,
    /// `q[i][j] = q_bar_j(i)`.
    pub q: Vec<Vec<BigInt>>,
    /// `|X| q^{-1}`; `p[j][i]` is the eigenvalue of `A_i` on the `j`-th eigenspace.
    pub p: Vec<Vec<BigRational>>,
}

pub fn eigenmatrix(n: u32) -> Result<EigenmatrixTable> {
    check_n(n)?;
    let dd = diameter(n);
    let q: Vec<Vec<BigInt>> = (0..=dd)
        .map(|i| (0..=dd).map(|j| q_bar(j, i, n)).collect())
        .collect();
    let size = BigRational::from_integer(BigInt::from(num_vertices(n)));
    let p = invert(&q)?
        .into_iter()
        .map(|row| row.into_iter().map(|v| v * &size).collect())
        .collect();
    Ok(EigenmatrixTable { n, q, p })
}

/// Gauss-Jordan inverse over the rationals.
fn invert(m: &[Vec<BigInt>]) -> Result<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let mut v: Vec<BigRational> = row
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect();
            v.extend((0..n).map(|c| {
                if c == r {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            v
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::OracleInconsistency("eigenmatrix is singular".into()))?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let delta = &f * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

impl EigenmatrixTable {
    pub fn size(&self) -> usize {
        self.q.len()
    }

    /// Whether `P Q = |X| I` holds exactly.
    pub fn inverse_holds(&self) -> bool {
        let s = self.size();
        let x = BigRational::from_integer(BigInt::from(num_vertices(self.n)));
        (0..s).all(|r| {
            (0..s).all(|c| {
                let v: BigRational = (0..s)
                    .map(|k| &self.p[r][k] * BigRational::from_integer(self.q[k][c].clone()))
                    .sum();
                if r == c {
                    v == x
                } else {
                    v.is_zero()
                }
            })
        })
    }

    /// Whether row 0 of `P` is the valency vector.
    pub fn first_row_is_valencies(&self) -> bool {
        self.p[0].iter().enumerate().all(|(i, v)| {
            let k = valency(i as u32, self.n).expect("i within diameter");
            *v == BigRational::from_integer(BigInt::from(k))
        })
    }

    pub fn p_is_integral(&self) -> bool {
        self.p.iter().flatten().all(|v| v.is_integer())
    }

    pub fn p_f64(&self) -> Vec<Vec<f64>> {
        self.p
            .iter()
            .map(|row| row.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }
}

/// The LP in the distance-distribution variables `x_i`, `i >= d`.
/// Variable `k` of the returned problem is `x_{d+k}`.
pub fn delsarte_problem(n: u32, d: u32) -> Result<Problem> {
    check_n(n)?;
    let dd = diameter(n);
    if d < 1 || d > dd {
        return Err(invalid(format!("d = {d} outside 1..={dd}")));
    }
    let table = eigenmatrix(n)?;
    let p = table.p_f64();
    let free: Vec<u32> = (d..=dd).collect();
    let objective: Vec<f64> = free
        .iter()
        .map(|&i| valency(i, n).map(|k| k as f64))
        .collect::<Result<_>>()?;
    let mut prob = Problem::new(objective).with_offset(1.0);
    for row in &p {
        let terms: Vec<(usize, f64)> = free
            .iter()
            .enumerate()
            .filter(|(_, &i)| row[i as usize] != 0.0)
            .map(|(k, &i)| (k, row[i as usize]))
            .collect();
        if terms.is_empty() {
            continue;
        }
        prob.push(LmiBlock::scalar(row[0], &terms));
    }
    for k in 0..free.len() {
        prob.push(LmiBlock::scalar(0.0, &[(k, 1.0)]));
    }
    Ok(prob)
}

pub fn delsarte_bound(n: u32, d: u32, cfg: &SolverConfig) -> Result<BoundResult> {
    Ok(conic::solve(&delsarte_problem(n, d)?, cfg)?)
}

//! Closed-form block coefficients `beta^r_{i,j,t}`, block shapes and
//! multiplicities, for any `n` without touching the vertex set.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::{check_n, diameter, enumerate_profiles, is_admissible};
use crate::error::{invalid, Result};

/// `C(a, b)`, zero outside `0 <= b <= a`.
pub fn binom(a: i64, b: i64) -> BigInt {
    if a < 0 || b < 0 || b > a {
        return BigInt::zero();
    }
    let b = b.min(a - b);
    let mut r = BigInt::one();
    for k in 0..b {
        r *= a - k;
        r /= k + 1;
    }
    r
}

fn sign(e: i64) -> BigInt {
    if e.is_even() {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Row/column labels `N_r` of block `r`, or `None` when the block is absent.
pub fn block_labels(r: u32, n: u32) -> Option<Vec<u32>> {
    let d = diameter(n);
    if r > d {
        return None;
    }
    if n % 2 == 1 {
        return Some((r..=d).collect());
    }
    if r == d && d % 2 == 1 {
        return None;
    }
    let top = if r % 2 == 0 { d } else { d - 1 };
    Some((r..=top).collect())
}

/// `dim L_r`, the number of copies of block `r`.
pub fn multiplicity(r: u32, n: u32) -> BigInt {
    let d = diameter(n) as i64;
    let r = r as i64;
    if n % 2 == 1 {
        return binom(2 * d + 1, r) - binom(2 * d + 1, r - 1);
    }
    if r < d {
        return binom(2 * d, r) - binom(2 * d, r - 1);
    }
    if d % 2 == 1 {
        return BigInt::zero();
    }
    let v = BigRational::new(binom(2 * d, d), BigInt::from(2))
        - BigRational::new(
            BigInt::from(d - 1) * binom(2 * d, d - 1),
            BigInt::from(2 * d),
        );
    debug_assert!(v.is_integer());
    v.to_integer()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub r: u32,
    pub labels: Vec<u32>,
    /// Decimal string; exceeds 64 bits for large `n`.
    pub multiplicity: String,
}

impl Block {
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn position(&self, i: u32) -> Option<usize> {
        self.labels.iter().position(|&l| l == i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub n: u32,
    pub blocks: Vec<Block>,
}

impl BlockSpec {
    pub fn get(&self, r: u32) -> Option<&Block> {
        self.blocks.iter().find(|b| b.r == r)
    }

    pub fn sum_of_squares(&self) -> usize {
        self.blocks.iter().map(|b| b.size() * b.size()).sum()
    }

    /// `sum_r m_r |N_r|`, which must equal `|X|`.
    pub fn total_dimension(&self) -> BigInt {
        self.blocks
            .iter()
            .map(|b| b.multiplicity.parse::<BigInt>().unwrap() * b.size())
            .sum()
    }
}

pub fn block_spec(n: u32) -> Result<BlockSpec> {
    check_n(n)?;
    let blocks = (0..=diameter(n))
        .filter_map(|r| {
            block_labels(r, n).map(|labels| Block {
                r,
                labels,
                multiplicity: multiplicity(r, n).to_string(),
            })
        })
        .collect();
    Ok(BlockSpec { n, blocks })
}

/// The integer `c` in the defining relation
/// `c M^t_{i,j} M^r_{j,r} xi = beta M^r_{i,r} xi`.
pub fn prefactor(r: u32, i: u32, n: u32) -> BigInt {
    let d = diameter(n) as i64;
    let (r, i) = (r as i64, i as i64);
    if n % 2 == 1 {
        return binom(2 * d + 1 - 2 * r, i - r);
    }
    if r == d {
        BigInt::one()
    } else if i == d {
        BigInt::from(2) * binom(2 * d - 2 * r, d - r)
    } else {
        binom(2 * d - 2 * r, i - r)
    }
}

/// `|M^r_{i,r} xi|^2 / |xi|^2` for `xi` in `L_r`. Equal to [`prefactor`]
/// except at `r = 0, i = D` for even `n`, where the level-`D` vertices
/// are reached once rather than through both representatives.
pub fn norm_squared(r: u32, i: u32, n: u32) -> BigInt {
    let d = diameter(n);
    if n % 2 == 0 && r == 0 && i == d {
        return binom(2 * d as i64, d as i64) / 2;
    }
    prefactor(r, i, n)
}

/// Normalisation of the basis vector with label `(r, xi, i)`.
pub fn block_scale(r: u32, i: u32, n: u32) -> f64 {
    1.0 / norm_squared(r, i, n)
        .to_f64()
        .unwrap_or(f64::INFINITY)
        .sqrt()
}

fn check_tuple(r: u32, i: u32, j: u32, t: u32, n: u32) -> Result<()> {
    check_n(n)?;
    if !is_admissible(i, j, t, n) {
        return Err(invalid(format!(
            "({i},{j},{t}) is not admissible for n = {n}"
        )));
    }
    if r > diameter(n) {
        return Err(invalid(format!("r = {r} exceeds the diameter")));
    }
    Ok(())
}

/// Even `n = 2D`, transcribed term by term from the five displayed cases.
pub fn beta_even_literal(r: u32, i: u32, j: u32, t: u32, d: u32) -> Result<BigInt> {
    check_tuple(r, i, j, t, 2 * d)?;
    let (r, i, j, t, d) = (r as i64, i as i64, j as i64, t as i64, d as i64);
    let c = binom;
    let half = r / 2;
    let even_r = r % 2 == 0;
    let v = if i < d && j < d {
        let s: BigInt = (0..d)
            .map(|l| sign(r - l) * c(r, l) * c(i - l, t - l) * c(2 * d - i - r + l, j - r - t + l))
            .sum();
        c(2 * d - 2 * r, i - r) * s
    } else if i == d && j < d {
        let mut s: BigInt = (half + 1..d)
            .map(|l| {
                sign(r - l)
                    * c(r, l)
                    * (c(d - l, t - l) * c(d - r + l, j - t - r + l)
                        + c(d - r + l, t - r + l) * c(d - l, j - t - l))
            })
            .sum();
        if even_r {
            s += c(d - half, t - half) * c(d - half, j - t - half) * sign(half) * c(r, half);
        }
        BigInt::from(2) * c(2 * d - 2 * r, d - r) * s
    } else if i < d && j == d {
        let s: BigInt = (0..d)
            .map(|l| {
                sign(r - l)
                    * c(r, l)
                    * (c(i - l, t - l) * c(2 * d - r - i + l, d - r - t + l)
                        + c(i - l, t) * c(2 * d - r - i + l, d - t))
            })
            .sum();
        c(2 * d - 2 * r, i - r) * s
    } else if r < d {
        let mut s: BigInt = (half + 1..d)
            .map(|l| {
                BigInt::from(2)
                    * sign(r - l)
                    * c(r, l)
                    * (c(d - l, t - l) * c(d - r + l, t) + c(d - l, t) * c(d - r + l, d - t))
            })
            .sum();
        if even_r {
            s += BigInt::from(2) * sign(half) * c(r, half) * c(d - half, d - t) * c(d - half, t);
        }
        BigInt::from(2) * c(2 * d - 2 * r, d - r) * s
    } else {
        if d % 2 == 1 {
            return Err(invalid("block r = D is absent for odd D"));
        }
        if 2 * t == d {
            sign(d / 2) * c(d, d / 2) / 2
        } else {
            sign(d - t) * c(d, t)
        }
    };
    Ok(v)
}

/// Odd `n = 2D + 1`.
pub fn beta_odd(r: u32, i: u32, j: u32, t: u32, d: u32) -> Result<BigInt> {
    check_tuple(r, i, j, t, 2 * d + 1)?;
    let (r, i, j, t, d) = (r as i64, i as i64, j as i64, t as i64, d as i64);
    let s: BigInt = (0..=d)
        .map(|l| {
            sign(r - l)
                * binom(r, l)
                * binom(i - l, t - l)
                * binom(2 * d + 1 + l - i - r, j - t - r + l)
        })
        .sum();
    Ok(binom(2 * d + 1 - 2 * r, i - r) * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    OracleDerived,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::OracleDerived => "oracle-derived",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaEntry {
    pub value: BigInt,
    pub provenance: Provenance,
}

/// Every `beta^r_{i,j,t}` with `i, j` in `N_r` and `(i, j, t)` admissible.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaTable {
    pub n: u32,
    pub values: BTreeMap<(u32, u32, u32, u32), BetaEntry>,
}

impl BetaTable {
    pub fn get(&self, r: u32, i: u32, j: u32, t: u32) -> Option<&BigInt> {
        self.values.get(&(r, i, j, t)).map(|e| &e.value)
    }

    /// Replaces an entry by an externally computed value, marking it.
    pub fn override_entry(&mut self, key: (u32, u32, u32, u32), value: BigInt) {
        self.values.insert(
            key,
            BetaEntry {
                value,
                provenance: Provenance::OracleDerived,
            },
        );
    }

    /// Compares against measured values and overrides every entry that
    /// differs. Returns `(key, closed form, measured)` per mismatch, and
    /// `None` as closed form for keys the table lacks.
    pub fn reconcile(
        &mut self,
        measured: &BTreeMap<(u32, u32, u32, u32), i64>,
    ) -> Vec<((u32, u32, u32, u32), Option<BigInt>, i64)> {
        let mut out = Vec::new();
        for (&key, &m) in measured {
            let closed = self.values.get(&key).map(|e| e.value.clone());
            if closed.as_ref() != Some(&BigInt::from(m)) {
                out.push((key, closed, m));
                self.override_entry(key, BigInt::from(m));
            }
        }
        out
    }

    /// CSV with header `n,r,i,j,t,beta,provenance`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,r,i,j,t,beta,provenance\n");
        for (&(r, i, j, t), e) in &self.values {
            let _ = writeln!(
                out,
                "{},{r},{i},{j},{t},{},{}",
                self.n,
                e.value,
                e.provenance.as_str()
            );
        }
        out
    }
}

/// The tuples `(r, i, j, t)` a table for `n` covers.
pub fn beta_keys(n: u32) -> Result<Vec<(u32, u32, u32, u32)>> {
    let spec = block_spec(n)?;
    let profiles = enumerate_profiles(n)?;
    let mut keys = Vec::new();
    for b in &spec.blocks {
        for p in &profiles.profiles {
            if b.position(p.i).is_some() && b.position(p.j).is_some() {
                keys.push((b.r, p.i, p.j, p.t));
            }
        }
    }
    Ok(keys)
}

/// Closed-form table. `beta_fn(r, i, j, t, D)` selects the even-`n` formula.
pub fn beta_table_with(
    n: u32,
    beta_fn: fn(u32, u32, u32, u32, u32) -> Result<BigInt>,
) -> Result<BetaTable> {
    let d = diameter(n);
    let mut values = BTreeMap::new();
    for (r, i, j, t) in beta_keys(n)? {
        let value = if n % 2 == 1 {
            beta_odd(r, i, j, t, d)?
        } else {
            beta_fn(r, i, j, t, d)?
        };
        values.insert(
            (r, i, j, t),
            BetaEntry {
                value,
                provenance: Provenance::ClosedForm,
            },
        );
    }
    Ok(BetaTable { n, values })
}

pub fn beta_table(n: u32) -> Result<BetaTable> {
    beta_table_with(n, beta_even)
}

/// `sum_l (-1)^{r-l} C(r,l) C(i-l,t-l) C(2D-i-r+l, j-t-r+l)`: the block
/// coefficient of the Boolean lattice `2^[2D]`, where both ends are plain
/// subsets of sizes `i` and `j`.
fn lattice_sum(r: i64, i: i64, j: i64, t: i64, d: i64) -> BigInt {
    (0..=r)
        .map(|l| {
            sign(r - l)
                * binom(r, l)
                * binom(i - l, t - l)
                * binom(2 * d - i - r + l, j - t - r + l)
        })
        .sum()
}

/// Even `n = 2D`. A vertex at distance `D` has two representatives of size
/// `D`; the sums below count over representatives and then correct for
/// the pairs that are seen twice.
pub fn beta_even(r: u32, i: u32, j: u32, t: u32, d: u32) -> Result<BigInt> {
    check_tuple(r, i, j, t, 2 * d)?;
    let (r, i, j, t, d) = (r as i64, i as i64, j as i64, t as i64, d as i64);
    if r == d {
        return beta_even_literal(r as u32, i as u32, j as u32, t as u32, d as u32);
    }
    if (i == d || j == d) && r % 2 == 1 {
        return Err(invalid(format!("label D is absent from block {r}")));
    }
    // number of representatives of M^r_{D,r} xi that carry xi
    let reps = if r == 0 { 1 } else { 2 };
    let v = if i < d && j < d {
        binom(2 * d - 2 * r, i - r) * lattice_sum(r, i, j, t, d)
    } else if i == d && j < d {
        let mut s = lattice_sum(r, d, j, t, d);
        if 2 * t != j {
            s += lattice_sum(r, d, j, j - t, d);
        }
        BigInt::from(2) * binom(2 * d - 2 * r, d - r) * s / reps
    } else if i < d {
        let s = binom(2 * d - 2 * r, i - r) * lattice_sum(r, i, d, t, d) * reps;
        if 2 * t == i {
            s / 2
        } else {
            s
        }
    } else {
        let s = BigInt::from(2) * binom(2 * d - 2 * r, d - r) * lattice_sum(r, d, d, t, d);
        if 2 * t == d {
            s / 2
        } else {
            s
        }
    };
    Ok(v)
}

/// Entry `(i, j)` of block `r` contributed by `x^t_{i,j}`, i.e.
/// `u_{r,xi,i}^T M^t_{i,j} u_{r,xi,j}`.
pub fn block_entry(beta: &BigInt, r: u32, i: u32, j: u32, n: u32) -> f64 {
    let b = beta.to_f64().unwrap_or(f64::NAN);
    let ni = norm_squared(r, i, n).to_f64().unwrap();
    let nj = norm_squared(r, j, n).to_f64().unwrap();
    let c = prefactor(r, i, n).to_f64().unwrap();
    b * (ni / nj).sqrt() / c
}

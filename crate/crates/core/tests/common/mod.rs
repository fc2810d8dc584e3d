#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use foldcode::cube::{diameter, valency};
use foldcode::delsarte::eigenmatrix;

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Solves the square system `a x = b`; `None` when singular.
fn solve_square(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..k {
                    let d = &f * &a[col][c];
                    a[r][c] -= d;
                }
                let d = &f * &b[col];
                b[r] -= d;
            }
        }
    }
    Some((0..k).map(|r| &b[r] / &a[r][r]).collect())
}

fn subsets(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..m {
        cur.push(i);
        subsets(m, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Maximum of `c.x` over `{x : a x <= b}` by enumerating vertices. Only for
/// bounded problems with a handful of variables.
pub fn exact_lp_max(
    c: &[BigRational],
    a: &[Vec<BigRational>],
    b: &[BigRational],
) -> Option<BigRational> {
    let k = c.len();
    let mut subs = Vec::new();
    subsets(a.len(), k, 0, &mut Vec::new(), &mut subs);
    let mut best: Option<BigRational> = None;
    for s in subs {
        let sa: Vec<Vec<BigRational>> = s.iter().map(|&r| a[r].clone()).collect();
        let sb: Vec<BigRational> = s.iter().map(|&r| b[r].clone()).collect();
        let Some(x) = solve_square(sa, sb) else {
            continue;
        };
        let feasible = a.iter().zip(b).all(|(row, bi)| {
            let lhs: BigRational = row.iter().zip(&x).map(|(p, q)| p * q).sum();
            lhs <= *bi
        });
        if feasible {
            let v: BigRational = c.iter().zip(&x).map(|(p, q)| p * q).sum();
            if best.as_ref().map_or(true, |b| v > *b) {
                best = Some(v);
            }
        }
    }
    best
}

/// Exact optimum of the Delsarte LP for the folded cube.
pub fn exact_delsarte(n: u32, d: u32) -> BigRational {
    let dd = diameter(n);
    let t = eigenmatrix(n).unwrap();
    let free: Vec<usize> = (d as usize..=dd as usize).collect();
    let c: Vec<BigRational> = free
        .iter()
        .map(|&i| BigRational::from_integer(BigInt::from(valency(i as u32, n).unwrap())))
        .collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for row in &t.p {
        a.push(free.iter().map(|&i| -row[i].clone()).collect());
        b.push(row[0].clone());
    }
    for k in 0..free.len() {
        a.push(
            (0..free.len())
                .map(|l| rat(if l == k { -1 } else { 0 }))
                .collect(),
        );
        b.push(rat(0));
    }
    exact_lp_max(&c, &a, &b).expect("bounded LP") + rat(1)
}

pub fn floor(v: &BigRational) -> i64 {
    use num_traits::ToPrimitive;
    v.floor().to_integer().to_i64().unwrap()
}

pub fn abs_f64(v: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    v.abs().to_f64().unwrap()
}

/// Supports of the weight-6 words of the extended ternary Golay code,
/// folded: 66 vertices of the folded 12-cube.
pub fn golay_design_code() -> Vec<u64> {
    const M: [[u32; 6]; 6] = [
        [0, 1, 1, 1, 1, 1],
        [1, 0, 1, 2, 2, 1],
        [1, 1, 0, 1, 2, 2],
        [1, 2, 1, 0, 1, 2],
        [1, 2, 2, 1, 0, 1],
        [1, 1, 2, 2, 1, 0],
    ];
    let mut out = std::collections::BTreeSet::new();
    for c in 0..729u32 {
        let mut w = [0u32; 12];
        let mut x = c;
        for k in 0..6 {
            let a = x % 3;
            x /= 3;
            w[k] = a;
            for j in 0..6 {
                w[6 + j] = (w[6 + j] + a * M[k][j]) % 3;
            }
        }
        let supp: u64 = (0..12)
            .filter(|&p| w[p] != 0)
            .fold(0, |acc, p| acc | 1 << p);
        if supp.count_ones() == 6 {
            out.insert(supp.min(supp ^ 0xfff));
        }
    }
    out.into_iter().collect()
}

/// Vertices whose representative of weight at most `n/2` has even weight.
/// For even `n` all distances are even.
pub fn even_weight_code(n: u32) -> Vec<u64> {
    (0..1u64 << (n - 1))
        .filter(|&m| {
            let w = m.count_ones();
            w.min(n - w) % 2 == 0
        })
        .collect()
}

/// Odd `n = 2D + 1`: even weights below `D`, plus the `D`-sets through a
/// fixed point. Two `D`-sets are at distance 1 only when they are disjoint.
pub fn intersecting_code(n: u32) -> Vec<u64> {
    let dd = n / 2;
    let full = (1u64 << n) - 1;
    (0..1u64 << (n - 1))
        .filter(|&m| {
            let w = m.count_ones();
            if w.min(n - w) < dd {
                w.min(n - w) % 2 == 0
            } else {
                let set = if w == dd { m } else { m ^ full };
                set & 1 == 1
            }
        })
        .collect()
}

/// Greedy codes found by random search, listed explicitly.
pub const SEARCHED_10_3: [u64; 26] = [
    23, 47, 49, 76, 96, 118, 134, 157, 190, 193, 202, 231, 259, 276, 294, 315, 335, 346, 357, 380,
    396, 417, 440, 469, 498, 511,
];
pub const SEARCHED_12_3: [u64; 88] = [
    1, 43, 44, 86, 98, 127, 143, 148, 154, 229, 243, 252, 285, 294, 312, 323, 346, 433, 447, 456,
    502, 514, 533, 536, 566, 589, 612, 634, 649, 672, 701, 718, 727, 779, 801, 848, 878, 883, 893,
    915, 926, 935, 940, 962, 965, 1003, 1016, 1032, 1051, 1061, 1181, 1193, 1200, 1207, 1219, 1262,
    1284, 1295, 1298, 1342, 1369, 1397, 1418, 1443, 1488, 1495, 1508, 1531, 1582, 1617, 1631, 1635,
    1660, 1686, 1732, 1754, 1781, 1815, 1826, 1837, 1851, 1862, 1896, 1944, 1972, 1999, 2017, 2034,
];

/// An explicit code for `(n, d)` together with a short description.
pub fn known_code(n: u32, d: u32) -> Option<(&'static str, Vec<u64>)> {
    match (n, d) {
        (8, 2) => Some(("even-weight vertices", even_weight_code(8))),
        (10, 3) => Some(("random greedy search", SEARCHED_10_3.to_vec())),
        (12, 3) => Some(("random greedy search", SEARCHED_12_3.to_vec())),
        (12, 4) => Some(("ternary Golay design", golay_design_code())),
        (13, 2) => Some(("intersecting family", intersecting_code(13))),
        _ => None,
    }
}

//! Vertices, distances and triple profiles of the folded n-cube.
//!
//! A vertex is an antipodal pair `{u, u'}` of subsets of `{1..n}`, stored as
//! the numerically smaller of the two n-bit masks, element `k` of the
//! subset being bit `n - k`. Vertex `k` of `X` is the
//! canonical mask `k`, so `X = {0, 1, ..., 2^(n-1) - 1}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const MIN_N: u32 = 6;
/// Largest `n` for pure profile arithmetic.
pub const MAX_N: u32 = 64;
/// Largest `n` for anything that walks over `X x X`.
pub const ENUMERATION_MAX_N: u32 = 13;

fn full_mask(n: u32) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn check_n(n: u32) -> Result<()> {
    if !(MIN_N..=MAX_N).contains(&n) {
        return Err(invalid(format!("n = {n} outside {MIN_N}..={MAX_N}")));
    }
    Ok(())
}

pub fn check_enumerable(n: u32) -> Result<()> {
    check_n(n)?;
    if n > ENUMERATION_MAX_N {
        return Err(Error::ResourceLimit(format!(
            "n = {n} exceeds the enumeration cap {ENUMERATION_MAX_N}"
        )));
    }
    Ok(())
}

/// Diameter `D = floor(n / 2)`.
pub fn diameter(n: u32) -> u32 {
    n / 2
}

/// Number of vertices `2^(n-1)`.
pub fn num_vertices(n: u32) -> u64 {
    1u64 << (n - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    mask: u64,
    n: u32,
}

impl Vertex {
    pub fn mask(self) -> u64 {
        self.mask
    }

    pub fn n(self) -> u32 {
        self.n
    }

    /// Position of the vertex in the ascending enumeration of `X`.
    pub fn index(self) -> usize {
        self.mask as usize
    }
}

pub fn canonical_vertex(raw_mask: u64, n: u32) -> Result<Vertex> {
    check_n(n)?;
    if raw_mask & !full_mask(n) != 0 {
        return Err(invalid(format!(
            "mask {raw_mask:#b} has bits above n = {n}"
        )));
    }
    Ok(Vertex {
        mask: canonical_mask(raw_mask, n),
        n,
    })
}

pub(crate) fn canonical_mask(raw: u64, n: u32) -> u64 {
    raw.min(raw ^ full_mask(n))
}

/// Every vertex of `X` in ascending mask order.
pub fn vertices(n: u32) -> Result<impl Iterator<Item = Vertex>> {
    check_enumerable(n)?;
    Ok((0..num_vertices(n)).map(move |mask| Vertex { mask, n }))
}

fn same_n(vs: &[Vertex]) -> Result<u32> {
    let n = vs[0].n;
    if vs.iter().any(|v| v.n != n) {
        return Err(invalid("vertices belong to different n"));
    }
    Ok(n)
}

pub fn distance(x: Vertex, y: Vertex) -> Result<u32> {
    let n = same_n(&[x, y])?;
    Ok(mask_distance(x.mask, y.mask, n))
}

pub(crate) fn mask_distance(x: u64, y: u64, n: u32) -> u32 {
    let w = (x ^ y).count_ones();
    w.min(n - w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    EvenN,
    OddN,
}

impl Parity {
    pub fn of(n: u32) -> Self {
        if n % 2 == 0 {
            Parity::EvenN
        } else {
            Parity::OddN
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TripleProfile {
    pub i: u32,
    pub j: u32,
    pub t: u32,
    pub parity: Parity,
}

impl TripleProfile {
    pub fn new(i: u32, j: u32, t: u32, n: u32) -> Self {
        Self {
            i,
            j,
            t,
            parity: Parity::of(n),
        }
    }

    pub fn key(self) -> (u32, u32, u32) {
        (self.i, self.j, self.t)
    }

    /// The profile with the roles of `y` and `z` exchanged.
    pub fn swapped(self) -> Self {
        Self {
            i: self.j,
            j: self.i,
            ..self
        }
    }
}

impl std::fmt::Display for TripleProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.t)
    }
}

pub fn classify_triple(x: Vertex, y: Vertex, z: Vertex) -> Result<TripleProfile> {
    let n = same_n(&[x, y, z])?;
    let (i, j, t) = classify_masks(x.mask, y.mask, z.mask, n);
    Ok(TripleProfile::new(i, j, t, n))
}

/// `(i, j, t)` of the triple, with `x` as base vertex.
pub(crate) fn classify_masks(x: u64, y: u64, z: u64, n: u32) -> (u32, u32, u32) {
    let full = full_mask(n);
    let half = n / 2;
    let mut a = x ^ y;
    if a.count_ones() > half {
        a ^= full;
    }
    let mut b = x ^ z;
    if b.count_ones() > half {
        b ^= full;
    }
    let i = a.count_ones();
    let j = b.count_ones();
    let p = (a & b).count_ones();
    if n % 2 == 1 {
        return (i, j, p);
    }
    let d = half;
    let t = match (i == d, j == d) {
        (false, false) => p,
        (true, false) => p.max(j - p),
        (false, true) => p.max(i - p),
        (true, true) => p.max(d - p),
    };
    (i, j, t)
}

pub fn is_admissible(i: u32, j: u32, t: u32, n: u32) -> bool {
    let d = diameter(n);
    if i > d || j > d || t > i || t > j {
        return false;
    }
    if n % 2 == 1 {
        return i + j - t <= 2 * d;
    }
    if i + j - t > 2 * d - 2 {
        return false;
    }
    if i == d && t < (j + 1) / 2 {
        return false;
    }
    if j == d && t < (i + 1) / 2 {
        return false;
    }
    true
}

pub fn check_profile(p: TripleProfile, n: u32) -> Result<()> {
    check_n(n)?;
    if p.parity != Parity::of(n) || !is_admissible(p.i, p.j, p.t, n) {
        return Err(invalid(format!(
            "profile {p} is not admissible for n = {n}"
        )));
    }
    Ok(())
}

/// Admissible profiles of one `n`, sorted by `(i, j, t)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    pub n: u32,
    pub profiles: Vec<TripleProfile>,
}

impl IndexSet {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn position(&self, i: u32, j: u32, t: u32) -> Option<usize> {
        self.profiles
            .binary_search_by(|p| p.key().cmp(&(i, j, t)))
            .ok()
    }

    pub fn contains(&self, i: u32, j: u32, t: u32) -> bool {
        self.position(i, j, t).is_some()
    }
}

pub fn enumerate_profiles(n: u32) -> Result<IndexSet> {
    check_n(n)?;
    let d = diameter(n);
    let mut profiles = Vec::new();
    for i in 0..=d {
        for j in 0..=d {
            for t in 0..=i.min(j) {
                if is_admissible(i, j, t, n) {
                    profiles.push(TripleProfile::new(i, j, t, n));
                }
            }
        }
    }
    Ok(IndexSet { n, profiles })
}

/// Closed-form size of the index set.
pub fn index_set_size(n: u32) -> u64 {
    let d = diameter(n) as u64;
    if n % 2 == 0 {
        (d + 1) * (d * d + 2 * d + 3) / 3
    } else {
        (d + 1) * (d + 2) * (2 * d + 3) / 6
    }
}

/// Sizes of all orbits `X^0_{i,j,t}`, by walking over every pair `(y, z)`
/// with the 0-class as base vertex.
pub fn orbit_counts(n: u32) -> Result<BTreeMap<(u32, u32, u32), u64>> {
    check_enumerable(n)?;
    let nv = num_vertices(n);
    let mut counts = BTreeMap::new();
    let mut dense = vec![0u64; ((n / 2 + 1) * (n / 2 + 1) * (n / 2 + 1)) as usize];
    let side = (n / 2 + 1) as usize;
    for y in 0..nv {
        for z in 0..nv {
            let (i, j, t) = classify_masks(0, y, z, n);
            dense[(i as usize * side + j as usize) * side + t as usize] += 1;
        }
    }
    for (k, &c) in dense.iter().enumerate() {
        if c > 0 {
            let t = (k % side) as u32;
            let j = ((k / side) % side) as u32;
            let i = (k / side / side) as u32;
            counts.insert((i, j, t), c);
        }
    }
    Ok(counts)
}

/// `gamma^t_{i,j}`: the number of pairs `(y, z)` of profile `p` seen from the 0-class.
pub fn orbit_count(p: TripleProfile, n: u32) -> Result<u64> {
    check_profile(p, n)?;
    check_enumerable(n)?;
    let nv = num_vertices(n);
    let mut count = 0;
    for y in 0..nv {
        if mask_distance(0, y, n) != p.i {
            continue;
        }
        for z in 0..nv {
            if classify_masks(0, y, z, n) == p.key() {
                count += 1;
            }
        }
    }
    Ok(count)
}

fn binom_u128(a: u32, b: u32) -> u128 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut r: u128 = 1;
    for k in 0..b {
        r = r * (a - k) as u128 / (k + 1) as u128;
    }
    r
}

/// `k_i`, the number of vertices at distance `i` from a fixed vertex.
pub fn valency(i: u32, n: u32) -> Result<u128> {
    check_n(n)?;
    let d = diameter(n);
    if i > d {
        return Err(invalid(format!("distance {i} exceeds diameter {d}")));
    }
    let c = binom_u128(n, i);
    Ok(if n % 2 == 0 && i == d { c / 2 } else { c })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(elems: &[u32], n: u32) -> u64 {
        elems.iter().fold(0, |m, &e| m | 1 << (n - e))
    }

    fn v(elems: &[u32], n: u32) -> Vertex {
        canonical_vertex(set(elems, n), n).unwrap()
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(canonical_vertex(0, 8).unwrap().mask(), 0);
        assert_eq!(canonical_vertex(0xff, 8).unwrap().mask(), 0);
        assert_eq!(v(&[1, 2, 3, 4, 5], 8).mask(), set(&[6, 7, 8], 8));
        assert!(canonical_vertex(0x100, 8).is_err());
        assert!(canonical_vertex(0, 5).is_err());
        let c = v(&[2, 5, 7], 9);
        assert_eq!(canonical_vertex(c.mask(), 9).unwrap(), c);
    }

    #[test]
    fn distance_examples() {
        let z = v(&[], 8);
        assert_eq!(distance(z, z).unwrap(), 0);
        assert_eq!(distance(z, v(&[1, 2, 3], 8)).unwrap(), 3);
        assert_eq!(distance(v(&[], 9), v(&[1, 2, 3, 4], 9)).unwrap(), 4);
        assert!(distance(v(&[], 8), v(&[], 9)).is_err());
    }

    #[test]
    fn classify_examples() {
        let x = v(&[], 8);
        assert_eq!(classify_triple(x, x, x).unwrap().key(), (0, 0, 0));
        let p = classify_triple(x, v(&[1, 2, 3], 8), v(&[2, 3, 4], 8)).unwrap();
        assert_eq!(p.key(), (3, 3, 2));
        let p = classify_triple(x, v(&[1, 2, 3, 4], 8), v(&[1, 2], 8)).unwrap();
        assert_eq!(p.key(), (4, 2, 2));
    }

    #[test]
    fn profile_counts_match_closed_forms() {
        assert_eq!(enumerate_profiles(8).unwrap().len(), 45);
        assert_eq!(enumerate_profiles(9).unwrap().len(), 55);
        for n in 6..=40 {
            let s = enumerate_profiles(n).unwrap();
            assert_eq!(s.len() as u64, index_set_size(n), "n = {n}");
            assert!(s.contains(0, 0, 0));
            assert!(s.profiles.windows(2).all(|w| w[0].key() < w[1].key()));
        }
    }

    #[test]
    fn orbit_count_examples() {
        assert_eq!(orbit_count(TripleProfile::new(0, 0, 0, 8), 8).unwrap(), 1);
        assert_eq!(orbit_count(TripleProfile::new(2, 0, 0, 8), 8).unwrap(), 28);
        assert_eq!(orbit_count(TripleProfile::new(4, 0, 0, 8), 8).unwrap(), 35);
        assert!(orbit_count(TripleProfile::new(4, 4, 0, 8), 8).is_err());
    }

    #[test]
    fn exhaustive_partition() {
        for n in [8, 9] {
            let counts = orbit_counts(n).unwrap();
            let set = enumerate_profiles(n).unwrap();
            assert_eq!(counts.len(), set.len());
            for p in &set.profiles {
                assert!(counts[&p.key()] > 0);
            }
            let nv = num_vertices(n);
            assert_eq!(counts.values().sum::<u64>(), nv * nv);
        }
    }

    #[test]
    fn valencies() {
        assert_eq!(valency(0, 8).unwrap(), 1);
        assert_eq!(valency(4, 8).unwrap(), 35);
        assert_eq!(valency(4, 9).unwrap(), 126);
        assert!(valency(5, 9).is_err());
        for n in 6..=40 {
            let s: u128 = (0..=n / 2).map(|i| valency(i, n).unwrap()).sum();
            assert_eq!(s, 1u128 << (n - 1));
        }
        for n in 8..=9 {
            let counts = orbit_counts(n).unwrap();
            for i in 0..=n / 2 {
                assert_eq!(counts[&(i, 0, 0)] as u128, valency(i, n).unwrap());
            }
        }
    }
}

//! The symmetry-reduced semidefinite program in the variables `x^t_{i,j}`.

use std::collections::{BTreeMap, HashMap};

use conic::{BoundResult, LmiBlock, Matrix, Problem, SolverConfig};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::coefficients::{
    beta_even_literal, beta_table, beta_table_with, block_spec, norm_squared, prefactor, BetaTable,
    BlockSpec,
};
use crate::cube::{check_n, check_profile, diameter, enumerate_profiles, valency, TripleProfile};
use crate::error::{invalid, Result};

/// Identification key of a profile: the multiset of the three pairwise
/// distances, tagged by which side of `D` the statistic `i + j - 2t` lies.
fn class_key(i: u32, j: u32, t: u32, n: u32) -> (bool, [u32; 3]) {
    let s = i + j - 2 * t;
    let (near, third) = if s <= diameter(n) {
        (true, s)
    } else {
        (false, n - s)
    };
    let mut k = [i, j, third];
    k.sort_unstable();
    (near, k)
}

/// `min(i + j - 2t, n - (i + j - 2t))`, the distance between the two
/// non-base vertices of the triple.
pub fn far_distance(i: u32, j: u32, t: u32, n: u32) -> u32 {
    let s = i + j - 2 * t;
    s.min(n - s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariableClass {
    /// Lexicographically least member.
    pub representative: TripleProfile,
    pub members: Vec<TripleProfile>,
}

/// Partition of the index set into classes of profiles forced to share a value.
#[derive(Debug, Clone)]
pub struct VariableMap {
    pub n: u32,
    pub classes: Vec<VariableClass>,
    index: HashMap<(u32, u32, u32), usize>,
}

impl VariableMap {
    pub fn new(n: u32) -> Result<Self> {
        let profiles = enumerate_profiles(n)?;
        let mut groups: BTreeMap<(bool, [u32; 3]), Vec<TripleProfile>> = BTreeMap::new();
        for p in profiles.profiles {
            groups
                .entry(class_key(p.i, p.j, p.t, n))
                .or_default()
                .push(p);
        }
        let mut classes: Vec<VariableClass> = groups
            .into_values()
            .map(|mut members| {
                members.sort();
                VariableClass {
                    representative: members[0],
                    members,
                }
            })
            .collect();
        classes.sort_by_key(|c| c.representative);
        let mut index = HashMap::new();
        for (k, c) in classes.iter().enumerate() {
            for p in &c.members {
                index.insert(p.key(), k);
            }
        }
        Ok(Self { n, classes, index })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, i: u32, j: u32, t: u32) -> Option<usize> {
        self.index.get(&(i, j, t)).copied()
    }

    fn class_of_profile(&self, p: TripleProfile) -> usize {
        self.index[&p.key()]
    }
}

pub fn canonical_variable(p: TripleProfile, n: u32) -> Result<TripleProfile> {
    check_profile(p, n)?;
    let map = VariableMap::new(n)?;
    Ok(map.classes[map.class_of_profile(p)].representative)
}

/// Whether constraint (v) forces the class to zero for minimum distance `d`.
fn excluded(p: TripleProfile, n: u32, d: u32) -> bool {
    let s = p.i + p.j - 2 * p.t;
    [p.i, p.j, s, n - s].iter().any(|&v| v >= 1 && v < d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockFamily {
    /// Blocks of the matrix averaged over translates containing the base vertex.
    Containing,
    /// Blocks of the matrix averaged over translates avoiding it.
    Avoiding,
}

#[derive(Debug, Clone)]
pub struct PsdBlock {
    pub family: BlockFamily,
    pub r: u32,
    pub labels: Vec<u32>,
    pub lmi: LmiBlock,
}

/// `lower <= value(class)`, or `value(class) <= value(upper)` when `upper` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct BoxConstraint {
    pub class: usize,
    pub upper: Option<usize>,
}

/// Affine expression over variable classes.
#[derive(Debug, Clone, Default)]
struct Affine {
    constant: f64,
    terms: BTreeMap<usize, f64>,
}

impl Affine {
    fn add(&mut self, class: usize, c: f64) {
        *self.terms.entry(class).or_insert(0.0) += c;
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub n: u32,
    pub d: u32,
    pub map: VariableMap,
    /// Fixed value per class, `None` for free classes.
    pub fixed: Vec<Option<f64>>,
    /// Solver variable index per class.
    pub var_of_class: Vec<Option<usize>>,
    /// Class of each solver variable.
    pub class_of_var: Vec<usize>,
    /// Objective weight per class: `k_i` on `x^0_{i,0}`.
    pub class_objective: Vec<f64>,
    pub blocks: Vec<PsdBlock>,
    pub boxes: Vec<BoxConstraint>,
    pub spec: BlockSpec,
    pub mode: Coefficients,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSummary {
    pub n: u32,
    pub d: u32,
    pub classes: usize,
    pub variables: usize,
    pub fixings: usize,
    pub psd_block_sizes: Vec<usize>,
    pub box_constraints: usize,
}

/// Entry of the integer block for `x^t_{i,j}`: `beta` rescaled by
/// `|M^r_{i,r} xi|^2 / prefactor`, which makes the block symmetric and
/// congruent to the conjugated one.
pub fn model_coefficient(beta: &BigInt, r: u32, i: u32, n: u32) -> f64 {
    let q = BigRational::new(beta * norm_squared(r, i, n), prefactor(r, i, n));
    q.to_f64().unwrap_or(f64::NAN)
}

/// How block entries are formed from the coefficient table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coefficients {
    /// Corrected closed forms, rescaled into a block congruent to the
    /// conjugated one.
    #[default]
    Exact,
    /// Published closed forms used verbatim as block entries. For even `n`
    /// these blocks are not congruent to the conjugated ones and the
    /// resulting values are not valid bounds.
    Literal,
}

impl Coefficients {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Literal => "literal",
        }
    }
}

impl std::str::FromStr for Coefficients {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "literal" => Ok(Self::Literal),
            _ => Err(invalid(format!("unknown coefficient mode {s:?}"))),
        }
    }
}

pub fn build_sdp(n: u32, d: u32) -> Result<SdpProblem> {
    build_sdp_mode(n, d, Coefficients::Exact)
}

pub fn build_sdp_mode(n: u32, d: u32, mode: Coefficients) -> Result<SdpProblem> {
    match mode {
        Coefficients::Exact => build_sdp_with(n, d, &beta_table(n)?, mode),
        Coefficients::Literal => {
            build_sdp_with(n, d, &beta_table_with(n, beta_even_literal)?, mode)
        }
    }
}

pub fn build_sdp_with(n: u32, d: u32, table: &BetaTable, mode: Coefficients) -> Result<SdpProblem> {
    check_n(n)?;
    let dd = diameter(n);
    if d < 1 || d > dd {
        return Err(invalid(format!("d = {d} outside 1..={dd}")));
    }
    if table.n != n {
        return Err(invalid("coefficient table belongs to a different n"));
    }
    let map = VariableMap::new(n)?;
    let spec = block_spec(n)?;

    let mut fixed: Vec<Option<f64>> = vec![None; map.len()];
    for (k, c) in map.classes.iter().enumerate() {
        if c.representative.key() == (0, 0, 0) {
            fixed[k] = Some(1.0);
        } else if c.members.iter().any(|&p| excluded(p, n, d)) {
            fixed[k] = Some(0.0);
        }
    }
    let mut var_of_class = vec![None; map.len()];
    let mut class_of_var = Vec::new();
    for k in 0..map.len() {
        if fixed[k].is_none() {
            var_of_class[k] = Some(class_of_var.len());
            class_of_var.push(k);
        }
    }
    let mut class_objective = vec![0.0; map.len()];
    for i in 0..=dd {
        let k = map.class_of(i, 0, 0).expect("x^0_{i,0} is admissible");
        class_objective[k] += valency(i, n)? as f64;
    }

    let mut blocks = Vec::new();
    for family in [BlockFamily::Containing, BlockFamily::Avoiding] {
        for b in &spec.blocks {
            let size = b.labels.len();
            let mut entries = vec![Affine::default(); size * size];
            for (a, &i) in b.labels.iter().enumerate() {
                for (c, &j) in b.labels.iter().enumerate() {
                    let cell = &mut entries[a * size + c];
                    for t in 0..=i.min(j) {
                        let Some(beta) = table.get(b.r, i, j, t) else {
                            continue;
                        };
                        let g = match mode {
                            Coefficients::Exact => model_coefficient(beta, b.r, i, n),
                            Coefficients::Literal => beta.to_f64().unwrap_or(f64::NAN),
                        };
                        let k = map.class_of(i, j, t).expect("table keys are admissible");
                        match family {
                            BlockFamily::Containing => cell.add(k, g),
                            BlockFamily::Avoiding => {
                                let z = far_distance(i, j, t, n);
                                let kz = map.class_of(z, 0, 0).expect("admissible");
                                cell.add(kz, g);
                                cell.add(k, -g);
                            }
                        }
                    }
                }
            }
            blocks.push(PsdBlock {
                family,
                r: b.r,
                labels: b.labels.clone(),
                lmi: lower_affine_block(&entries, size, &fixed, &var_of_class),
            });
        }
    }

    let mut boxes = Vec::new();
    for (k, c) in map.classes.iter().enumerate() {
        if fixed[k].is_some() {
            continue;
        }
        boxes.push(BoxConstraint {
            class: k,
            upper: None,
        });
        for p in &c.members {
            let up = map.class_of(p.i, 0, 0).expect("admissible");
            if up != k {
                boxes.push(BoxConstraint {
                    class: k,
                    upper: Some(up),
                });
            }
        }
    }
    boxes.sort();
    boxes.dedup();

    Ok(SdpProblem {
        n,
        d,
        map,
        fixed,
        var_of_class,
        class_of_var,
        class_objective,
        blocks,
        boxes,
        spec,
        mode,
    })
}

fn lower_affine_block(
    entries: &[Affine],
    size: usize,
    fixed: &[Option<f64>],
    var_of_class: &[Option<usize>],
) -> LmiBlock {
    let mut constant = Matrix::zeros(size, size);
    let mut coeffs: BTreeMap<usize, Matrix> = BTreeMap::new();
    for (cell, e) in entries.iter().enumerate() {
        let (a, c) = (cell / size, cell % size);
        constant[(a, c)] += e.constant;
        for (&k, &g) in &e.terms {
            if g == 0.0 {
                continue;
            }
            match (fixed[k], var_of_class[k]) {
                (Some(v), _) => constant[(a, c)] += g * v,
                (None, Some(var)) => {
                    coeffs
                        .entry(var)
                        .or_insert_with(|| Matrix::zeros(size, size))[(a, c)] += g;
                }
                (None, None) => unreachable!("free class without a variable"),
            }
        }
    }
    LmiBlock {
        constant,
        coefficients: coeffs
            .into_iter()
            .filter(|(_, m)| m.max_abs() != 0.0)
            .collect(),
    }
}

impl SdpProblem {
    pub fn num_vars(&self) -> usize {
        self.class_of_var.len()
    }

    /// The 1x1 inequality of a box constraint.
    pub fn box_block(&self, b: BoxConstraint) -> LmiBlock {
        let mut constant = 0.0;
        let mut terms = Vec::new();
        let mut put = |k: usize, c: f64| match self.fixed[k] {
            Some(v) => constant += c * v,
            None => terms.push((self.var_of_class[k].unwrap(), c)),
        };
        match b.upper {
            None => put(b.class, 1.0),
            Some(u) => {
                put(u, 1.0);
                put(b.class, -1.0);
            }
        }
        terms.sort_by_key(|t| t.0);
        LmiBlock::scalar(constant, &terms)
    }

    pub fn objective(&self) -> (Vec<f64>, f64) {
        let mut c = vec![0.0; self.num_vars()];
        let mut offset = 0.0;
        for (k, &w) in self.class_objective.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            match (self.fixed[k], self.var_of_class[k]) {
                (Some(v), _) => offset += w * v,
                (None, Some(var)) => c[var] += w,
                _ => unreachable!(),
            }
        }
        (c, offset)
    }

    /// PSD blocks first, then the box constraints.
    pub fn to_conic(&self) -> Problem {
        let (c, offset) = self.objective();
        let mut prob = Problem::new(c).with_offset(offset);
        for b in &self.blocks {
            prob.push(b.lmi.clone());
        }
        for &b in &self.boxes {
            prob.push(self.box_block(b));
        }
        prob
    }

    /// Solver point from a value per class; fixed classes are ignored.
    pub fn point_from_classes(&self, values: &[f64]) -> Vec<f64> {
        self.class_of_var.iter().map(|&k| values[k]).collect()
    }

    /// Value per class from a solver point.
    pub fn classes_from_point(&self, y: &[f64]) -> Vec<f64> {
        (0..self.map.len())
            .map(|k| match (self.fixed[k], self.var_of_class[k]) {
                (Some(v), _) => v,
                (None, Some(var)) => y[var],
                _ => unreachable!(),
            })
            .collect()
    }

    pub fn summary(&self) -> ProblemSummary {
        ProblemSummary {
            n: self.n,
            d: self.d,
            classes: self.map.len(),
            variables: self.num_vars(),
            fixings: self.fixed.iter().filter(|f| f.is_some()).count(),
            psd_block_sizes: self.blocks.iter().map(|b| b.labels.len()).collect(),
            box_constraints: self.boxes.len(),
        }
    }
}

pub fn sdp_bound(n: u32, d: u32, cfg: &SolverConfig) -> Result<BoundResult> {
    let prob = build_sdp(n, d)?;
    Ok(conic::solve(&prob.to_conic(), cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_examples() {
        let p = |i, j, t| TripleProfile::new(i, j, t, 8);
        assert_eq!(canonical_variable(p(0, 0, 0), 8).unwrap(), p(0, 0, 0));
        assert_eq!(canonical_variable(p(3, 3, 2), 8).unwrap(), p(2, 3, 1));
        assert_eq!(canonical_variable(p(2, 3, 1), 8).unwrap(), p(2, 3, 1));
        assert_eq!(canonical_variable(p(3, 3, 0), 8).unwrap(), p(2, 3, 0));
        assert!(canonical_variable(p(3, 3, 4), 8).is_err());
    }

    #[test]
    fn classes_are_closed_under_swapping() {
        for n in 6..=16 {
            let map = VariableMap::new(n).unwrap();
            for c in &map.classes {
                for p in &c.members {
                    assert_eq!(map.class_of(p.j, p.i, p.t), map.class_of(p.i, p.j, p.t));
                }
            }
        }
    }

    #[test]
    fn fixings_follow_distance() {
        let prob = build_sdp(8, 1).unwrap();
        assert_eq!(prob.fixed.iter().filter(|f| f.is_some()).count(), 1);
        let prob = build_sdp(10, 3).unwrap();
        for i in [1, 2] {
            let k = prob.map.class_of(i, 0, 0).unwrap();
            assert_eq!(prob.fixed[k], Some(0.0));
        }
        assert!(prob.fixed[prob.map.class_of(3, 0, 0).unwrap()].is_none());
        assert!(build_sdp(10, 6).is_err());
        assert!(build_sdp(10, 0).is_err());
    }

    #[test]
    fn block_layout_and_symmetry() {
        let prob = build_sdp(8, 2).unwrap();
        assert_eq!(
            prob.summary().psd_block_sizes,
            vec![5, 3, 3, 1, 1, 5, 3, 3, 1, 1]
        );
        prob.to_conic().validate().unwrap();
        for n in [9, 10, 13] {
            build_sdp(n, 2).unwrap().to_conic().validate().unwrap();
        }
    }
}

//! Explicit codes and the feasible points they induce in the SDP.

use std::collections::BTreeMap;

use conic::min_eigenvalue;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::cube::{
    check_enumerable, classify_masks, diameter, mask_distance, num_vertices, orbit_counts, valency,
};
use crate::error::{invalid, Result};
use crate::model::{BlockFamily, SdpProblem};

/// Greedy code over a random vertex order, stopping after `cap` codewords.
/// Codewords are returned as vertex masks.
pub fn greedy_code<R: Rng + ?Sized>(
    n: u32,
    d: u32,
    rng: &mut R,
    cap: Option<usize>,
) -> Result<Vec<u64>> {
    check_enumerable(n)?;
    if d < 1 || d > diameter(n) {
        return Err(invalid(format!("d = {d} outside 1..={}", diameter(n))));
    }
    let mut order: Vec<u64> = (0..num_vertices(n)).collect();
    order.shuffle(rng);
    let cap = cap.unwrap_or(usize::MAX);
    let mut code: Vec<u64> = Vec::new();
    for v in order {
        if code.len() >= cap {
            break;
        }
        if code.iter().all(|&c| mask_distance(c, v, n) >= d) {
            code.push(v);
        }
    }
    Ok(code)
}

pub fn minimum_distance(code: &[u64], n: u32) -> Option<u32> {
    let mut best = None;
    for (a, &x) in code.iter().enumerate() {
        for &y in &code[a + 1..] {
            let dist = mask_distance(x, y, n);
            best = Some(best.map_or(dist, |b: u32| b.min(dist)));
        }
    }
    best
}

/// `lambda^t_{i,j}`: ordered triples of codewords of each profile.
pub fn triple_counts(code: &[u64], n: u32) -> BTreeMap<(u32, u32, u32), u64> {
    let mut out = BTreeMap::new();
    for &x in code {
        for &y in code {
            for &z in code {
                *out.entry(classify_masks(x, y, z, n)).or_insert(0) += 1;
            }
        }
    }
    out
}

/// `lambda / (|C| gamma)` for every profile of the index set.
pub fn empirical_x(code: &[u64], n: u32) -> Result<BTreeMap<(u32, u32, u32), BigRational>> {
    empirical_x_with(code, n, &orbit_counts(n)?)
}

/// As [`empirical_x`], with precomputed orbit sizes.
pub fn empirical_x_with(
    code: &[u64],
    n: u32,
    gamma: &BTreeMap<(u32, u32, u32), u64>,
) -> Result<BTreeMap<(u32, u32, u32), BigRational>> {
    if code.is_empty() {
        return Err(invalid("empty code"));
    }
    let lambda = triple_counts(code, n);
    let size = BigInt::from(code.len());
    Ok(gamma
        .iter()
        .map(|(&key, &g)| {
            let l = lambda.get(&key).copied().unwrap_or(0);
            (
                key,
                BigRational::new(BigInt::from(l), &size * BigInt::from(g)),
            )
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub size: usize,
    /// Largest difference of `x` within one variable class.
    pub class_spread: f64,
    /// Largest violation of a fixing or a box constraint.
    pub linear_violation: f64,
    /// `sum_i k_i x^0_{i,0}`, exact.
    pub objective: String,
    pub objective_matches: bool,
    pub min_eig_containing: f64,
    pub min_eig_avoiding: f64,
}

impl WitnessReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.class_spread <= tol
            && self.linear_violation <= tol
            && self.objective_matches
            && self.min_eig_containing >= -tol
            && self.min_eig_avoiding >= -tol
    }
}

/// Evaluates the point a code induces against every constraint of `prob`.
pub fn check_witness(prob: &SdpProblem, code: &[u64]) -> Result<WitnessReport> {
    WitnessChecker::new(prob)?.check(code)
}

/// Checks many codes against one problem, sharing the orbit sizes.
pub struct WitnessChecker<'a> {
    prob: &'a SdpProblem,
    gamma: BTreeMap<(u32, u32, u32), u64>,
}

impl<'a> WitnessChecker<'a> {
    pub fn new(prob: &'a SdpProblem) -> Result<Self> {
        Ok(Self {
            prob,
            gamma: orbit_counts(prob.n)?,
        })
    }

    pub fn check(&self, code: &[u64]) -> Result<WitnessReport> {
        evaluate(
            self.prob,
            &empirical_x_with(code, self.prob.n, &self.gamma)?,
            code.len(),
        )
    }
}

fn evaluate(
    prob: &SdpProblem,
    x: &BTreeMap<(u32, u32, u32), BigRational>,
    size: usize,
) -> Result<WitnessReport> {
    let n = prob.n;
    let xf = |k: &(u32, u32, u32)| x[k].to_f64().unwrap_or(f64::NAN);

    let mut class_spread = 0.0f64;
    let mut values = Vec::with_capacity(prob.map.len());
    for c in &prob.map.classes {
        let first = &x[&c.representative.key()];
        for p in &c.members {
            let diff = (&x[&p.key()] - first).to_f64().unwrap_or(f64::NAN).abs();
            class_spread = class_spread.max(diff);
        }
        values.push(xf(&c.representative.key()));
    }

    let mut linear_violation = 0.0f64;
    for (k, c) in prob.map.classes.iter().enumerate() {
        if let Some(v) = prob.fixed[k] {
            for p in &c.members {
                linear_violation = linear_violation.max((xf(&p.key()) - v).abs());
            }
        }
    }
    let y = prob.point_from_classes(&values);
    for &b in &prob.boxes {
        let s = prob.box_block(b).evaluate(&y)[(0, 0)];
        linear_violation = linear_violation.max(-s);
    }

    let mut objective = BigRational::zero();
    for i in 0..=diameter(n) {
        objective += BigRational::from_integer(BigInt::from(valency(i, n)?)) * &x[&(i, 0, 0)];
    }
    let objective_matches = objective == BigRational::from_integer(BigInt::from(size));

    let mut min_eig = [f64::INFINITY; 2];
    for b in &prob.blocks {
        let m = b.lmi.evaluate(&y).symmetrize();
        let e = min_eigenvalue(&m).unwrap_or(f64::NAN);
        let slot = match b.family {
            BlockFamily::Containing => 0,
            BlockFamily::Avoiding => 1,
        };
        min_eig[slot] = min_eig[slot].min(e);
    }

    Ok(WitnessReport {
        size,
        class_spread,
        linear_violation,
        objective: objective.to_string(),
        objective_matches,
        min_eig_containing: min_eig[0],
        min_eig_avoiding: min_eig[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_sdp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn greedy_codes_respect_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=4 {
            let code = greedy_code(9, d, &mut rng, None).unwrap();
            if code.len() > 1 {
                assert!(minimum_distance(&code, 9).unwrap() >= d);
            }
        }
        assert_eq!(greedy_code(8, 1, &mut rng, None).unwrap().len(), 128);
    }

    #[test]
    fn single_word_and_full_space() {
        let prob = build_sdp(8, 3).unwrap();
        let r = check_witness(&prob, &[0]).unwrap();
        assert!(r.passes(1e-9), "{r:?}");
        assert_eq!(r.objective, "1");

        let all: Vec<u64> = (0..128).collect();
        let prob = build_sdp(8, 1).unwrap();
        let r = check_witness(&prob, &all).unwrap();
        assert!(r.passes(1e-9), "{r:?}");
        assert_eq!(r.objective, "128");
    }

    #[test]
    fn lambda_totals() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let code = greedy_code(10, 3, &mut rng, Some(12)).unwrap();
        let total: u64 = triple_counts(&code, 10).values().sum();
        assert_eq!(total, (code.len() as u64).pow(3));
    }
}

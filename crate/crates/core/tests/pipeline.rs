mod common;

use conic::{solve, Matrix, SolverConfig, Status};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use foldcode::codes::{check_witness, greedy_code, minimum_distance, WitnessChecker};
use foldcode::coefficients::{beta_even_literal, beta_table, beta_table_with, block_spec};
use foldcode::cube::{diameter, distance, num_vertices, vertices};
use foldcode::delsarte::{delsarte_bound, eigenmatrix};
use foldcode::model::{build_sdp, build_sdp_mode, sdp_bound, Coefficients};
use foldcode::oracle::{oracle_beta_values, BasisMatrices};
use foldcode::sdpa::{export_sdpa, parse_sdpa};

fn distance_matrices(n: u32) -> Vec<Matrix> {
    let vs: Vec<_> = vertices(n).unwrap().collect();
    let size = vs.len();
    let mut out = vec![Matrix::zeros(size, size); diameter(n) as usize + 1];
    for (a, &x) in vs.iter().enumerate() {
        for (b, &y) in vs.iter().enumerate() {
            out[distance(x, y).unwrap() as usize][(a, b)] = 1.0;
        }
    }
    out
}

#[test]
fn eigenmatrix_against_distance_matrices() {
    let n = 8;
    let a = distance_matrices(n);
    let t = eigenmatrix(n).unwrap();
    let p = t.p_f64();
    let x = num_vertices(n) as f64;
    let dd = diameter(n) as usize;
    // E_j = |X|^{-1} sum_i Q_ij A_i must be the idempotent on which A_i acts as P_ji
    let idem: Vec<Matrix> = (0..=dd)
        .map(|j| {
            let mut e = Matrix::zeros(a[0].rows(), a[0].cols());
            for i in 0..=dd {
                let q: f64 = t.q[i][j].to_string().parse().unwrap();
                e.axpy(q / x, &a[i]);
            }
            e
        })
        .collect();
    for j in 0..=dd {
        for l in 0..=dd {
            let prod = idem[j].matmul(&idem[l]);
            let want = if j == l {
                idem[j].clone()
            } else {
                Matrix::zeros(prod.rows(), prod.cols())
            };
            assert!(prod.add_scaled(-1.0, &want).max_abs() < 1e-8, "j={j} l={l}");
        }
        for i in 0..=dd {
            let lhs = a[i].matmul(&idem[j]);
            let res = lhs.add_scaled(-p[j][i], &idem[j]).max_abs();
            assert!(res < 1e-8, "i={i} j={j}: residual {res}");
        }
    }
}

#[test]
fn delsarte_table_values() {
    let cfg = SolverConfig::default();
    for (n, d, want) in [(10, 3, 32), (13, 2, 1877), (8, 1, 128), (12, 4, 85)] {
        let r = delsarte_bound(n, d, &cfg).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert_eq!(r.bound, want, "n={n} d={d}");
        let exact = common::exact_delsarte(n, d);
        assert!(
            (r.objective - exact_f64(&exact)).abs() < 1e-5,
            "n={n} d={d}"
        );
    }
}

fn exact_f64(v: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap()
}

#[test]
fn closed_form_matches_oracle_and_literal_does_not() {
    for n in [6, 7, 8] {
        let basis = BasisMatrices::build(n).unwrap();
        let measured = oracle_beta_values(&basis).unwrap();
        let mut exact = beta_table(n).unwrap();
        assert!(exact.reconcile(&measured).is_empty(), "n={n}");
        if n % 2 == 0 {
            let mut literal = beta_table_with(n, beta_even_literal).unwrap();
            assert!(!literal.reconcile(&measured).is_empty(), "n={n}");
        }
    }
}

#[test]
fn explicit_codes_are_feasible() {
    for (n, d) in [(8, 2), (10, 3), (12, 3), (12, 4)] {
        let (_, code) = common::known_code(n, d).unwrap();
        assert!(minimum_distance(&code, n).unwrap() >= d);
        let prob = build_sdp(n, d).unwrap();
        let r = check_witness(&prob, &code).unwrap();
        assert!(r.passes(1e-9), "n={n} d={d}: {r:?}");
        assert_eq!(r.objective, code.len().to_string());
        let bound = sdp_bound(n, d, &SolverConfig::default()).unwrap();
        assert!(bound.bound >= code.len() as i64);
    }
    let code = common::intersecting_code(13);
    assert_eq!(code.len(), 1586);
    assert_eq!(minimum_distance(&code, 13), Some(2));
}

#[test]
fn sdpa_export_solves_to_the_same_value() {
    let cfg = SolverConfig::default();
    for (n, d) in [(8, 2), (10, 3), (9, 2)] {
        let prob = build_sdp(n, d).unwrap();
        let back = parse_sdpa(&export_sdpa(&prob)).unwrap();
        let a = solve(&prob.to_conic(), &cfg).unwrap();
        let b = solve(&back.problem, &cfg).unwrap();
        assert_eq!(a.objective, b.objective);
    }
}

#[test]
fn sdpa_header_for_ten_three() {
    let prob = build_sdp(10, 3).unwrap();
    let text = export_sdpa(&prob);
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(first.contains("n=10") && first.contains("d=3"));
    assert!(first.contains(&format!("version={}", env!("CARGO_PKG_VERSION"))));
    let structure = lines.nth(2).unwrap();
    let sizes: Vec<String> = block_spec(10)
        .unwrap()
        .blocks
        .iter()
        .map(|b| b.size().to_string())
        .collect();
    let doubled = [sizes.clone(), sizes].concat().join(" ");
    assert_eq!(structure, format!("{doubled} -{}", prob.boxes.len()));
}

#[test]
fn literal_mode_is_a_different_problem() {
    let exact = build_sdp_mode(8, 2, Coefficients::Exact).unwrap();
    let literal = build_sdp_mode(8, 2, Coefficients::Literal).unwrap();
    assert_eq!(exact.num_vars(), literal.num_vars());
    assert_ne!(exact.to_conic(), literal.to_conic());
    let all_even = common::even_weight_code(8);
    assert!(check_witness(&exact, &all_even).unwrap().passes(1e-9));
    assert!(!check_witness(&literal, &all_even).unwrap().passes(1e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn greedy_codes_are_witnesses(n in 8u32..=11, d_off in 0u32..5, seed in any::<u64>(), cap in 1usize..30) {
        let d = 1 + d_off % diameter(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = greedy_code(n, d, &mut rng, Some(cap)).unwrap();
        let prob = build_sdp(n, d).unwrap();
        let r = WitnessChecker::new(&prob).unwrap().check(&code).unwrap();
        prop_assert!(r.passes(1e-9), "{:?}", r);
        prop_assert_eq!(r.objective, code.len().to_string());
    }

    #[test]
    fn bound_is_monotone_in_distance(n in 8u32..=12) {
        let cfg = SolverConfig::default();
        let bounds: Vec<i64> = (1..=diameter(n))
            .map(|d| sdp_bound(n, d, &cfg).unwrap().bound)
            .collect();
        prop_assert!(bounds.windows(2).all(|w| w[0] >= w[1]), "{:?}", bounds);
    }
}

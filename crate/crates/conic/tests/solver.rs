use conic::{check_certificate, solve, LmiBlock, Matrix, Problem, SolverConfig, Status};
use proptest::prelude::*;

fn toy_sdp() -> Problem {
    // maximize y  s.t.  [[1, y], [y, 1]] >= 0
    let mut p = Problem::new(vec![1.0]);
    let off = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    p.push(LmiBlock::new(Matrix::identity(2)).with_term(0, off));
    p
}

fn toy_lp() -> Problem {
    // maximize 3a + 2b  s.t.  a + b <= 4, a + 3b <= 6, a <= 3, a >= 0, b >= 0
    // optimum a = 3, b = 1, value 11
    let mut p = Problem::new(vec![3.0, 2.0]);
    p.push(LmiBlock::scalar(4.0, &[(0, -1.0), (1, -1.0)]));
    p.push(LmiBlock::scalar(6.0, &[(0, -1.0), (1, -3.0)]));
    p.push(LmiBlock::scalar(3.0, &[(0, -1.0)]));
    p.push(LmiBlock::scalar(0.0, &[(0, 1.0)]));
    p.push(LmiBlock::scalar(0.0, &[(1, 1.0)]));
    p
}

/// maximize y1 + y2 s.t. [[1 - y1, y2], [y2, 2]] >= 0 and y2 <= 1.
/// PSD means y1 <= 1 - y2^2/2, so the objective peaks at y2 = 1 with value 1.5.
fn mixed() -> Problem {
    let mut p = Problem::new(vec![1.0, 1.0]);
    let c = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
    let f1 = Matrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, 0.0]]);
    let f2 = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    p.push(LmiBlock::new(c).with_term(0, f1).with_term(1, f2));
    p.push(LmiBlock::scalar(1.0, &[(1, -1.0)]));
    p
}

#[test]
fn toy_sdp_reaches_analytic_optimum() {
    let cfg = SolverConfig::default();
    let r = solve(&toy_sdp(), &cfg).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert!((r.objective - 1.0).abs() < 1e-7, "{}", r.objective);
    assert!((r.y[0] - 1.0).abs() < 1e-6);
    assert!(check_certificate(&toy_sdp(), &r, &cfg).passed());
}

#[test]
fn toy_lp_reaches_vertex() {
    let cfg = SolverConfig::default();
    let p = toy_lp();
    assert!(p.is_lp());
    let r = solve(&p, &cfg).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert!((r.objective - 11.0).abs() < 1e-7, "{}", r.objective);
    assert!((r.y[0] - 3.0).abs() < 1e-6 && (r.y[1] - 1.0).abs() < 1e-6);
    assert_eq!(r.bound, 11);
    let rep = check_certificate(&p, &r, &cfg);
    assert!(rep.passed(), "{:?}", rep.failures());
}

#[test]
fn mixed_blocks() {
    let cfg = SolverConfig::default();
    let r = solve(&mixed(), &cfg).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert!((r.objective - 1.5).abs() < 1e-7, "{}", r.objective);
}

#[test]
fn corrupted_dual_point_is_flagged() {
    let cfg = SolverConfig::default();
    let p = toy_lp();
    let mut r = solve(&p, &cfg).unwrap();
    r.y[0] += 0.5;
    let rep = check_certificate(&p, &r, &cfg);
    assert!(!rep.passed());
    assert!(rep.failures().iter().any(|c| c.name == "dual-psd"));
}

#[test]
fn corrupted_primal_point_is_flagged() {
    let cfg = SolverConfig::default();
    let p = toy_sdp();
    let mut r = solve(&p, &cfg).unwrap();
    r.primal[0][(0, 1)] += 0.25;
    r.primal[0][(1, 0)] += 0.25;
    let rep = check_certificate(&p, &r, &cfg);
    assert!(rep.failures().iter().any(|c| c.name == "primal-residual"));
}

#[test]
fn repeated_runs_are_identical() {
    let cfg = SolverConfig::default();
    let a = solve(&mixed(), &cfg).unwrap();
    let b = solve(&mixed(), &cfg).unwrap();
    assert_eq!(a.log_csv(), b.log_csv());
    assert_eq!(
        a.y.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        b.y.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
}

#[test]
fn log_is_csv() {
    let r = solve(&toy_sdp(), &SolverConfig::default()).unwrap();
    let csv = r.log_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iter,mu,pinf,dinf,gap"));
    assert_eq!(lines.count(), r.log.len());
}

#[test]
fn unbounded_problem_is_not_optimal() {
    // maximize y s.t. y >= 0
    let mut p = Problem::new(vec![1.0]);
    p.push(LmiBlock::scalar(0.0, &[(0, 1.0)]));
    let r = solve(&p, &SolverConfig::default()).unwrap();
    assert_ne!(r.status, Status::Optimal);
}

#[test]
fn infeasible_problem_is_not_optimal() {
    // y <= -1 and y >= 1
    let mut p = Problem::new(vec![1.0]);
    p.push(LmiBlock::scalar(-1.0, &[(0, -1.0)]));
    p.push(LmiBlock::scalar(-1.0, &[(0, 1.0)]));
    let r = solve(&p, &SolverConfig::default()).unwrap();
    assert_ne!(r.status, Status::Optimal);
}

#[test]
fn rejects_bad_input() {
    let mut p = Problem::new(vec![1.0]);
    let asym = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
    p.push(LmiBlock::new(Matrix::identity(2)).with_term(0, asym));
    assert!(solve(&p, &SolverConfig::default()).is_err());
    let empty = Problem::new(vec![]);
    assert!(solve(&empty, &SolverConfig::default()).is_err());
}

fn scaled(p: &Problem, block: usize, factor: f64) -> Problem {
    let mut q = p.clone();
    let b = &mut q.blocks[block];
    b.constant = b.constant.scale(factor);
    for (_, f) in &mut b.coefficients {
        *f = f.scale(factor);
    }
    q
}

#[test]
fn block_scaling_leaves_optimum() {
    let cfg = SolverConfig::default();
    let base = solve(&mixed(), &cfg).unwrap().objective;
    for block in 0..2 {
        let r = solve(&scaled(&mixed(), block, 2.0), &cfg).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective - base).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // maximize c^T y over the box 0 <= y <= u; optimum is sum of positive c_k u_k.
    #[test]
    fn box_lp_matches_closed_form(
        data in prop::collection::vec((-5.0f64..5.0, 0.5f64..10.0), 1..6)
    ) {
        let c: Vec<f64> = data.iter().map(|d| d.0).collect();
        let mut p = Problem::new(c.clone());
        for (k, &(_, u)) in data.iter().enumerate() {
            p.push(LmiBlock::scalar(0.0, &[(k, 1.0)]));
            p.push(LmiBlock::scalar(u, &[(k, -1.0)]));
        }
        let r = solve(&p, &SolverConfig::default()).unwrap();
        let expect: f64 = data.iter().map(|&(ck, u)| (ck * u).max(0.0)).sum();
        prop_assert_eq!(r.status, Status::Optimal);
        prop_assert!((r.objective - expect).abs() < 1e-6 * (1.0 + expect.abs()));
        prop_assert!(r.dual_objective <= r.objective + 1e-7 * (1.0 + expect.abs()));
    }

    // maximize the smallest eigenvalue shift: max t s.t. A - t I >= 0 gives lambda_min(A).
    #[test]
    fn eigenvalue_sdp(entries in prop::collection::vec(-3.0f64..3.0, 6)) {
        let a = Matrix::from_rows(&[
            vec![entries[0], entries[1], entries[2]],
            vec![entries[1], entries[3], entries[4]],
            vec![entries[2], entries[4], entries[5]],
        ]);
        let mut p = Problem::new(vec![1.0]);
        p.push(LmiBlock::new(a.clone()).with_term(0, Matrix::identity(3).scale(-1.0)));
        let r = solve(&p, &SolverConfig::default()).unwrap();
        let lo = conic::min_eigenvalue(&a).unwrap();
        prop_assert_eq!(r.status, Status::Optimal);
        prop_assert!((r.objective - lo).abs() < 1e-6, "{} vs {}", r.objective, lo);
    }
}

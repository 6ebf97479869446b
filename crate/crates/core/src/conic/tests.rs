use super::*;
use crate::cxmat::{orthogonal_complement, outer, ComplexVector, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rv(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    ComplexVector::new(
        (0..n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
    .unwrap()
}

fn rh(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    HermitianMatrix::from_upper(n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn solve(p: &ConicProblem) -> ConicSolution {
    solve_sdp(p, DEFAULT_GAP_TOL, DEFAULT_FEAS_TOL, DEFAULT_MAX_ITER).unwrap()
}

/// Minimization with a planted primal-dual pair: `X* = vvᴴ`, `Z*` PSD on
/// `v⊥`, `C = Σ yᵢAᵢ + Z*`. The optimum is `bᵀy` and `X*` is the unique
/// minimizer.
struct Planted {
    problem: ConicProblem,
    x: HermitianMatrix,
    value: f64,
}

fn planted(seed: u64, n: usize, m: usize) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = rv(&mut rng, n);
    let x = outer(&v);
    let mut z = HermitianMatrix::zeros(n);
    for q in orthogonal_complement(&[v]).unwrap() {
        z = z.add(&outer(&q).scaled(rng.random_range(0.5..2.0)));
    }
    let mut p = ConicProblem::new(Sense::Minimize);
    let w = p.add_block("W", n);
    let mut c = z;
    let mut value = 0.0;
    for i in 0..m {
        let a = rh(&mut rng, n);
        let y: f64 = rng.random_range(-1.0..1.0);
        let b = a.trace_product(&x);
        value += b * y;
        c = c.add(&a.scaled(y));
        p.add_constraint(&alloc::format!("row{i}"), vec![(w, a)], Relation::Eq, b);
    }
    p.add_objective_term(w, c);
    Planted { problem: p, x, value }
}

#[test]
fn maximize_trace_under_unit_bound() {
    let mut p = ConicProblem::new(Sense::Maximize);
    let w = p.add_block("W", 1);
    p.add_objective_term(w, HermitianMatrix::identity(1));
    p.add_constraint("cap", vec![(w, HermitianMatrix::identity(1))], Relation::Le, 1.0);
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective_value - 1.0).abs() < 1e-6);
    assert!((s.blocks[0].get(0, 0).re - 1.0).abs() < 1e-6);
}

#[test]
fn diagonal_feasibility_example() {
    let mut p = ConicProblem::new(Sense::Feasibility);
    let w = p.add_block("W", 2);
    p.add_constraint("trace", vec![(w, HermitianMatrix::identity(2))], Relation::Eq, 1.0);
    p.add_constraint("weighted", vec![(w, HermitianMatrix::diag(&[3.0, 1.0]))], Relation::Eq, 2.0);
    match check_feasible(&p, DEFAULT_FEAS_TOL).unwrap() {
        Feasibility::Feasible(s) => {
            assert!(s.max_constraint_violation <= DEFAULT_FEAS_TOL);
            // the diagonal is forced: w11 + w22 = 1, 3 w11 + w22 = 2
            assert!((s.blocks[0].get(0, 0).re - 0.5).abs() < 1e-6);
            assert!((s.blocks[0].get(1, 1).re - 0.5).abs() < 1e-6);
        }
        other => panic!("expected feasible, got {other:?}"),
    }
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!(s.max_constraint_violation <= DEFAULT_FEAS_TOL);
}

#[test]
fn contradictory_bounds_are_infeasible() {
    let mut p = ConicProblem::new(Sense::Feasibility);
    let w = p.add_block("W", 1);
    p.add_constraint("upper", vec![(w, HermitianMatrix::identity(1))], Relation::Le, 1.0);
    p.add_constraint("lower", vec![(w, HermitianMatrix::identity(1))], Relation::Ge, 2.0);
    match check_feasible(&p, DEFAULT_FEAS_TOL).unwrap() {
        Feasibility::Infeasible(cert) => {
            assert_eq!(cert.kind, CertificateKind::MinViolation);
            assert!(cert.margin > DEFAULT_FEAS_TOL);
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::Infeasible);
    let cert = s.certificate.expect("certificate attached");
    assert_eq!(cert.kind, CertificateKind::FarkasRay);
    // y_upper ≤ 0 ≤ y_lower combine the two rows into 0 ≥ 1
    assert!(cert.multipliers[0] < 0.0 && cert.multipliers[1] > 0.0);
}

#[test]
fn unit_trace_is_feasible() {
    let mut p = ConicProblem::new(Sense::Feasibility);
    let w = p.add_block("W", 2);
    p.add_constraint("trace", vec![(w, HermitianMatrix::identity(2))], Relation::Eq, 1.0);
    let f = check_feasible(&p, DEFAULT_FEAS_TOL).unwrap();
    assert!(f.is_feasible());
}

#[test]
fn negative_trace_is_infeasible_for_psd() {
    let mut p = ConicProblem::new(Sense::Feasibility);
    let w = p.add_block("W", 3);
    p.add_constraint("trace", vec![(w, HermitianMatrix::identity(3))], Relation::Eq, -1.0);
    assert!(matches!(
        check_feasible(&p, DEFAULT_FEAS_TOL).unwrap(),
        Feasibility::Infeasible(_)
    ));
}

#[test]
fn unbounded_is_reported() {
    let mut p = ConicProblem::new(Sense::Maximize);
    let w = p.add_block("W", 2);
    p.add_objective_term(w, HermitianMatrix::diag(&[1.0, 0.0]));
    p.add_constraint("second", vec![(w, HermitianMatrix::diag(&[0.0, 1.0]))], Relation::Le, 1.0);
    let s = solve_sdp(&p, DEFAULT_GAP_TOL, DEFAULT_FEAS_TOL, 200).unwrap();
    assert_eq!(s.status, SolveStatus::Unbounded);
}

#[test]
fn planted_optimum_is_recovered() {
    for seed in 0..10 {
        let pl = planted(seed, 4, 5);
        let s = solve(&pl.problem);
        assert_eq!(s.status, SolveStatus::Optimal, "seed {seed}");
        let rel = (s.objective_value - pl.value).abs() / (1.0 + pl.value.abs());
        assert!(rel < 1e-6, "seed {seed}: {} vs {}", s.objective_value, pl.value);
        assert!(s.blocks[0].sub(&pl.x).norm() < 1e-3 * pl.x.norm());
        assert!(s.duality_gap <= DEFAULT_GAP_TOL);
        assert!(s.max_constraint_violation <= DEFAULT_FEAS_TOL);
        assert!(s.min_block_eigenvalue() >= -DEFAULT_FEAS_TOL);
    }
}

#[test]
fn scaling_the_problem_leaves_the_argmax_unchanged() {
    for seed in 20..25 {
        let pl = planted(seed, 4, 5);
        let a = solve_sdp(&pl.problem, 1e-10, 1e-10, 100).unwrap();
        let b = solve_sdp(&pl.problem.scaled(10.0), 1e-10, 1e-10, 100).unwrap();
        let rel = a.blocks[0].sub(&b.blocks[0]).norm() / a.blocks[0].norm();
        assert!(rel <= 1e-6, "seed {seed}: {rel:e}");
    }
}

#[test]
fn mixed_blocks_and_inequalities() {
    // max Tr(W1) + 2 Tr(W2) s.t. Tr(W1) + Tr(W2) ≤ 3, Tr(W2) ≤ 1, Tr(W1) ≥ 0.5
    let mut p = ConicProblem::new(Sense::Maximize);
    let a = p.add_block("A", 2);
    let b = p.add_block("B", 3);
    p.add_objective_term(a, HermitianMatrix::identity(2));
    p.add_objective_term(b, HermitianMatrix::identity(3).scaled(2.0));
    p.add_constraint(
        "budget",
        vec![(a, HermitianMatrix::identity(2)), (b, HermitianMatrix::identity(3))],
        Relation::Le,
        3.0,
    );
    p.add_constraint("capB", vec![(b, HermitianMatrix::identity(3))], Relation::Le, 1.0);
    p.add_constraint("floorA", vec![(a, HermitianMatrix::identity(2))], Relation::Ge, 0.5);
    let s = solve(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective_value - 4.0).abs() < 1e-5);
    assert!(s.objective_value <= s.dual_objective + 1e-6 * (1.0 + s.dual_objective.abs()));
}

#[test]
fn dump_lists_blocks_and_rows() {
    let pl = planted(1, 2, 2);
    let text = dump_problem(&pl.problem);
    assert!(text.starts_with("sense minimize\nblock W 2\n"));
    assert_eq!(text.matches("constraint ").count(), 2);
    assert!(text.ends_with("end\n"));
}

#[test]
fn validation_rejects_bad_input() {
    let mut p = ConicProblem::new(Sense::Feasibility);
    let w = p.add_block("W", 2);
    assert!(matches!(check_feasible(&p, 1e-7), Err(Error::InvalidInput(_))));
    p.add_constraint("wrong", vec![(w, HermitianMatrix::identity(3))], Relation::Eq, 1.0);
    assert!(matches!(solve_sdp(&p, 1e-7, 1e-7, 10), Err(Error::InvalidInput(_))));
    let mut q = ConicProblem::new(Sense::Feasibility);
    let w = q.add_block("W", 1);
    q.add_constraint("ok", vec![(w, HermitianMatrix::identity(1))], Relation::Eq, 1.0);
    assert!(solve_sdp(&q, 0.0, 1e-7, 10).is_err());
}

#[test]
fn socp_cauchy_schwarz() {
    let h = ComplexVector::new(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.3), C64::new(0.0, -1.0)]).unwrap();
    let x = solve_socp(&SocpProblem {
        objective: h.clone(),
        rows: vec![],
        rho: 1.0,
    })
    .unwrap();
    assert!(x.sub(&h.scaled_re(1.0 / h.norm())).norm() < 1e-12);
    let x = solve_socp(&SocpProblem {
        objective: h,
        rows: vec![],
        rho: 0.0,
    })
    .unwrap();
    assert_eq!(x.norm(), 0.0);
}

#[test]
fn socp_matches_projection_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let (hb, hc, hw) = (rv(&mut rng, 5), rv(&mut rng, 5), rv(&mut rng, 5));
        let budget = rng.random_range(0.5..10.0);
        let x = solve_socp(&SocpProblem {
            objective: hb.clone(),
            rows: vec![
                SocpRow::Complex(hc.clone()),
                SocpRow::Complex(hw.clone()),
                SocpRow::Imag(hb.clone()),
            ],
            rho: budget,
        })
        .unwrap();
        let proj = crate::cxmat::null_projector(&[hc, hw]).unwrap().apply(&hb);
        let want = proj.scaled_re(budget.sqrt() / proj.norm());
        assert!(x.sub(&want).norm() <= 1e-8 * want.norm());
    }
}

#[test]
fn socp_rejects_negative_radius() {
    let p = SocpProblem {
        objective: ComplexVector::basis(2, 0),
        rows: vec![],
        rho: -1.0,
    };
    assert!(solve_socp(&p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weak_duality_holds(seed in 0u64..10_000) {
        // random bounded maximization: trace budget plus random inequalities
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..4);
        let mut p = ConicProblem::new(Sense::Maximize);
        let w = p.add_block("W", n);
        p.add_objective_term(w, rh(&mut rng, n));
        p.add_constraint("budget", vec![(w, HermitianMatrix::identity(n))], Relation::Le, 1.0);
        for i in 0..rng.random_range(0..3) {
            let a = rh(&mut rng, n);
            p.add_constraint(&alloc::format!("r{i}"), vec![(w, a)], Relation::Le, rng.random_range(0.1..1.0));
        }
        let s = solve(&p);
        prop_assert_eq!(s.status, SolveStatus::Optimal);
        let tol = DEFAULT_GAP_TOL * 10.0 * (1.0 + s.objective_value.abs() + s.dual_objective.abs());
        prop_assert!(s.objective_value <= s.dual_objective + tol);
    }
}

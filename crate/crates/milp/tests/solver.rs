mod support;

use nfvplan_milp::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::vertex::{random_lp, random_lp_shape, vertex_enumeration};

#[test]
fn simplex_matches_vertex_enumeration() {
    for seed in 0..40u64 {
        let (n, m) = random_lp_shape(seed);
        let p = random_lp(seed, n, m);
        let reference = vertex_enumeration(&p).expect("generator builds feasible LPs");
        let s = solve_lp(&p, &LpOptions::default()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal, "seed {seed}");
        assert!(
            (s.objective - reference).abs() <= 1e-6 * (1.0 + reference.abs()),
            "seed {seed}: simplex {} vs vertices {reference}",
            s.objective
        );
        assert!(p.max_residual(&s.x) <= 1e-7);
        assert!(p.max_bound_violation(&s.x) <= 1e-7);
        let recomputed = p.objective_value(&s.x);
        assert!((recomputed - s.objective).abs() <= 1e-9 * (1.0 + s.objective.abs()));
    }
}

#[test]
fn lp_solution_is_deterministic() {
    let p = random_lp(7, 6, 10);
    let a = solve_lp(&p, &LpOptions::default()).unwrap();
    let b = solve_lp(&p, &LpOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn frequent_refactorization_gives_same_optimum() {
    for seed in 0..10u64 {
        let p = random_lp(seed + 100, 6, 12);
        let normal = solve_lp(&p, &LpOptions::default()).unwrap();
        let eager = solve_lp(
            &p,
            &LpOptions {
                refactor_interval: 1,
                ..LpOptions::default()
            },
        )
        .unwrap();
        assert!((normal.objective - eager.objective).abs() < 1e-9);
    }
}

/// Fixed-charge facility problem with `k` sites and random data.
fn random_facility(seed: u64, k: usize) -> MilpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = MilpProblem::new();
    let demand = rng.random_range(1.0..20.0);
    let mut served = Vec::new();
    for i in 0..k {
        let open = p.add_binary(format!("y{i}"), rng.random_range(0.0..30.0));
        let cap = rng.random_range(2.0..15.0);
        let x = p.add_var(format!("x{i}"), 0.0, cap, rng.random_range(0.5..4.0));
        p.add_constraint(format!("gate{i}"), vec![(x, 1.0), (open, -cap)], Relation::Le, 0.0);
        served.push((x, 1.0));
    }
    p.add_constraint("demand", served, Relation::Ge, demand);
    p
}

#[test]
fn branch_and_bound_agrees_with_enumeration() {
    for seed in 0..30u64 {
        let p = random_facility(seed, 2 + (seed as usize % 7));
        let exact = solve_milp(&p, &MilpOptions::default()).unwrap();
        let oracle = brute_force(&p, &LpOptions::default()).unwrap();
        assert_eq!(exact.status, oracle.status, "seed {seed}");
        if exact.status == MilpStatus::Optimal {
            assert!((exact.objective - oracle.objective).abs() <= 1e-6, "seed {seed}");
            for (j, &b) in p.binary.iter().enumerate() {
                if b {
                    assert!(exact.x[j] == 0.0 || exact.x[j] == 1.0);
                }
            }
        }
        assert!(exact.bound_trace.windows(2).all(|w| w[0] <= w[1]), "seed {seed}");
        assert_eq!(exact.gap, 0.0);
    }
}

#[test]
fn branch_and_bound_is_deterministic() {
    let p = random_facility(3, 8);
    let a = solve_milp(&p, &MilpOptions::default()).unwrap();
    let b = solve_milp(&p, &MilpOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exported_text_solves_to_same_optimum() {
    let p = random_facility(11, 5);
    let text = write_lp(&p).unwrap();
    let back = read_lp(&text).unwrap();
    let a = solve_milp(&p, &MilpOptions::default()).unwrap();
    let b = solve_milp(&back, &MilpOptions::default()).unwrap();
    assert_eq!(a.objective, b.objective);
}

fn arb_problem() -> impl Strategy<Value = MilpProblem> {
    (1usize..6, 0usize..5, any::<u64>()).prop_map(|(n, m, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = MilpProblem::new();
        for j in 0..n {
            if rng.random_bool(0.3) {
                p.add_binary(format!("b{j}"), rng.random_range(-9.0..9.0));
            } else {
                let lo: f64 = rng.random_range(-5.0..5.0);
                let hi = if rng.random_bool(0.5) { f64::INFINITY } else { lo + rng.random_range(0.0..5.0) };
                p.add_var(format!("v{j}"), lo, hi, rng.random_range(-1e3..1e3));
            }
        }
        for i in 0..m {
            let mut coeffs = Vec::new();
            for j in 0..n {
                if rng.random_bool(0.6) {
                    coeffs.push((j, rng.random_range(-1e4..1e4)));
                }
            }
            let rel = [Relation::Le, Relation::Eq, Relation::Ge][rng.random_range(0..3)];
            p.add_constraint(format!("c{i}"), coeffs, rel, rng.random_range(-1e-3..1e6));
        }
        p
    })
}

proptest! {
    #[test]
    fn lp_text_round_trip(p in arb_problem()) {
        let text = write_lp(&p).unwrap();
        let back = read_lp(&text).unwrap();
        // empty rows gain an explicit zero term on the way out
        let mut expected = p.clone();
        for row in &mut expected.constraints {
            if row.coeffs.is_empty() {
                row.coeffs.push((0, 0.0));
            }
        }
        prop_assert_eq!(back, expected);
    }
}

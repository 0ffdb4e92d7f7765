use proptest::prelude::*;

use nfvplan_core::formulation::*;
use nfvplan_core::gen::{random_scenario, RandomParams};
use nfvplan_core::model::Scenario;

fn scaled(s: &Scenario, k: f64) -> Scenario {
    let mut out = s.clone();
    for c in &mut out.costs {
        c.fixed *= k;
        c.var *= k;
        c.elas *= k;
    }
    out
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_TOL * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn decoded_plans_pass_every_check(seed in 0u64..10_000) {
        let s = random_scenario(seed, &RandomParams::default());
        if let SolveOutcome::Optimal(plan) = solve_scenario(&s, &SolveOptions::default()).unwrap() {
            let problems = check_plan(&s, &plan);
            prop_assert!(problems.is_empty(), "{:?}", problems);
            for (c, class) in s.classes.iter().enumerate() {
                for e in 0..s.epochs {
                    let lat = latency_of(&s, &plan, c, e);
                    prop_assert!((lat - plan.per_class_latency[&class.id][e]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn scaling_all_prices_scales_the_optimum(seed in 0u64..10_000, k in 0.1f64..10.0) {
        let s = random_scenario(seed, &RandomParams::default());
        let base = solve_scenario(&s, &SolveOptions::default()).unwrap();
        let big = scaled(&s, k);
        let other = solve_scenario(&big, &SolveOptions::default()).unwrap();
        match (&base, &other) {
            (SolveOutcome::Optimal(p), SolveOutcome::Optimal(q)) => {
                prop_assert!(rel_close(q.cost_total, k * p.cost_total), "{} vs {}", q.cost_total, k * p.cost_total);
                // the unscaled argmin is still optimal after scaling
                let reused = recompute_cost(&big, p).total();
                prop_assert!(rel_close(reused, q.cost_total), "{} vs {}", reused, q.cost_total);
            }
            (SolveOutcome::Infeasible { .. }, SolveOutcome::Infeasible { .. }) => {}
            _ => prop_assert!(false, "feasibility changed under scaling"),
        }
    }

    #[test]
    fn latency_rows_only_for_bounded_classes(seed in 0u64..10_000) {
        let s = random_scenario(seed, &RandomParams::default());
        let (lp, _) = build_milp(&s).unwrap();
        let rows = lp.constraints.iter().filter(|c| c.name.starts_with("lat_")).count();
        let bounded = s.classes.iter().filter(|c| c.latency_threshold.is_some()).count();
        prop_assert_eq!(rows, bounded * s.epochs);
    }

    #[test]
    fn build_is_deterministic(seed in 0u64..10_000) {
        let s = random_scenario(seed, &RandomParams::default());
        prop_assert_eq!(export_lp(&s).unwrap(), export_lp(&s.clone()).unwrap());
    }
}

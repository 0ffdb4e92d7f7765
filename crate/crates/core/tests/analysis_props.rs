use nfvplan_core::analysis::*;
use nfvplan_core::fixtures;
use nfvplan_core::formulation::{build_milp, SolveOptions};
use nfvplan_core::gen::{random_scenario, Policy, RandomParams};
use nfvplan_core::model::PlatformKind;
use nfvplan_milp::{brute_force, LpOptions};

fn costs(r: &SweepReport) -> Vec<Option<f64>> {
    r.rows.iter().map(|r| r.cost_total).collect()
}

fn non_decreasing(v: &[Option<f64>]) -> bool {
    v.windows(2).all(|w| match (w[0], w[1]) {
        (Some(a), Some(b)) => a <= b + 1e-6 * b.abs().max(1.0),
        (None, None) => true,
        _ => false,
    })
}

#[test]
fn cost_rises_with_price_multipliers() {
    let opts = SolveOptions::default();
    for seed in 0..25 {
        let s = random_scenario(seed, &RandomParams::default());
        for parameter in [SweepParameter::CloudElasMultiplier, SweepParameter::FixedOpexMultiplier] {
            let spec = SweepSpec::new(parameter, vec![0.0, 0.5, 1.0, 2.0, 8.0]);
            let r = sweep(&spec, &s, &opts).unwrap();
            assert!(non_decreasing(&costs(&r)), "seed {seed} {parameter}: {:?}", costs(&r));
        }
    }
}

#[test]
fn hybrid_dominates_restricted_models() {
    let opts = SolveOptions::default();
    for seed in 0..25 {
        let s = random_scenario(seed, &RandomParams::default());
        let r = compare_models(&s, "random", &opts).unwrap();
        let Some(hybrid) = r.cost(Policy::FullHybrid) else {
            assert!(r.rows.iter().all(|row| row.status == Status::Infeasible), "seed {seed}");
            continue;
        };
        for (model, cost) in optimal_costs(&r) {
            assert!(hybrid <= cost + 1e-6 * cost.abs().max(1.0), "seed {seed}: hybrid {hybrid} > {model} {cost}");
        }
    }
}

#[test]
fn reruns_are_identical() {
    let s = random_scenario(11, &RandomParams::default());
    let spec = SweepSpec::new(SweepParameter::CloudElasMultiplier, vec![2.0, 1.0, 0.5, 0.1]);
    let opts = SolveOptions::default();
    let a = sweep(&spec, &s, &opts).unwrap();
    let b = sweep(&spec, &s, &opts).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
}

#[test]
fn in_network_share_falls_as_fixed_costs_rise() {
    let mut s = fixtures::sec2_combined(false);
    for c in &mut s.costs {
        if c.kind != PlatformKind::Cloud {
            c.fixed = 40.0;
        }
    }
    let values = vec![0.0, 1.0, 2.0, 4.0, 8.0];
    let spec = SweepSpec::new(SweepParameter::FixedOpexMultiplier, values.clone());
    let r = sweep(&spec, &s, &SolveOptions::default()).unwrap();
    let shares: Vec<f64> = r
        .rows
        .iter()
        .map(|row| {
            let m = row.mix.unwrap();
            m.dedicated + m.flexhw
        })
        .collect();
    assert!(shares.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{shares:?}");
    assert!(shares[0] > 0.0 && shares[4] == 0.0, "{shares:?}");
    // every point agrees with exhaustive enumeration
    for (row, v) in r.rows.iter().zip(values) {
        let point = SweepParameter::FixedOpexMultiplier.apply(&s, v);
        let (lp, _) = build_milp(&point).unwrap();
        let oracle = brute_force(&lp, &LpOptions::default()).unwrap();
        assert!((row.cost_total.unwrap() - oracle.objective).abs() < 1e-6);
    }
}

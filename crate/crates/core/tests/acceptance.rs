//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Criteria 1 to 6 run twice; the second run feeds the rerun
//! check and every plan of both runs goes through `check_plan`.

#[path = "../../milp/tests/support/vertex.rs"]
mod vertex;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nfvplan_core::analysis::*;
use nfvplan_core::fixtures;
use nfvplan_core::formulation::{build_milp, check_plan, solve_scenario, Plan, SolveOptions, SolveOutcome};
use nfvplan_core::gen::{paper_workload, paper_workload_with, random_scenario, Policy, RandomParams, VariabilityModel, WorkloadParams};
use nfvplan_core::model::{PlatformKind, Scenario};
use nfvplan_milp::{brute_force, solve_lp, solve_milp, LpOptions, LpStatus, MilpOptions, MilpStatus};

const TOL: f64 = 1e-6;

/// Result of one criterion.
struct Outcome {
    failures: Vec<String>,
    summary: String,
    /// Everything the criterion produced, for the rerun comparison.
    fingerprint: String,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.failures.is_empty() && self.limit.is_none_or(|l| self.elapsed < l)
    }

    fn line(&self, n: usize) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {n}: {verdict} ({:.2}s) {}", self.elapsed.as_secs_f64(), self.summary);
        if let Some(l) = self.limit.filter(|l| self.elapsed >= *l) {
            line += &format!("; over the {}s limit", l.as_secs());
        }
        for f in &self.failures {
            line += &format!("\n    {f}");
        }
        line
    }
}

/// Plans seen so far and the invariant violations among them.
#[derive(Default)]
struct Audit {
    plans: usize,
    issues: Vec<String>,
}

impl Audit {
    fn check(&mut self, label: &str, s: &Scenario, plan: &Plan) {
        self.plans += 1;
        for issue in check_plan(s, plan) {
            self.issues.push(format!("{label}: {issue}"));
        }
    }
}

struct Check {
    failures: Vec<String>,
    fingerprint: String,
}

impl Check {
    fn new() -> Self {
        Check {
            failures: Vec::new(),
            fingerprint: String::new(),
        }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn cost(&mut self, label: &str, got: Option<f64>, want: f64) {
        self.expect(got.is_some_and(|g| (g - want).abs() <= TOL), || format!("{label}: cost {got:?}, expected {want}"));
    }

    fn record(&mut self, text: &str) {
        self.fingerprint.push_str(text);
        self.fingerprint.push('\n');
    }

    fn finish(self, summary: String, started: Instant, limit: Option<Duration>) -> Outcome {
        Outcome {
            failures: self.failures,
            summary,
            fingerprint: self.fingerprint,
            elapsed: started.elapsed(),
            limit,
        }
    }
}

/// Solves and audits; returns the plan if optimal.
fn solve(label: &str, s: &Scenario, audit: &mut Audit, check: &mut Check) -> Option<Plan> {
    match solve_scenario(s, &SolveOptions::default()) {
        Ok(SolveOutcome::Optimal(plan)) => {
            audit.check(label, s, &plan);
            check.record(&plan.to_json());
            Some(plan)
        }
        Ok(SolveOutcome::Infeasible { nodes }) => {
            check.record(&format!("{label}: infeasible after {nodes} nodes"));
            None
        }
        Err(e) => {
            check.failures.push(format!("{label}: {e}"));
            None
        }
    }
}

fn only_kind(s: &Scenario, plan: &Plan, kind: PlatformKind) -> bool {
    !plan.active.is_empty() && plan.active.iter().all(|id| s.instance(id).is_some_and(|p| p.kind() == kind))
}

fn video(audit: &mut Audit) -> Outcome {
    let started = Instant::now();
    let mut check = Check::new();
    let s = fixtures::sec2_video();
    let hybrid = solve("video", &s, audit, &mut check);
    check.cost("video", hybrid.as_ref().map(|p| p.cost_total), 130.0);
    check.expect(hybrid.as_ref().is_some_and(|p| only_kind(&s, p, PlatformKind::Cloud)), || {
        format!("video: expected a cloud-only plan, got {:?}", hybrid.as_ref().map(|p| &p.active))
    });
    let forced = solve("video, flex only", &fixtures::sec2_video_forced_flex(), audit, &mut check);
    check.cost("video, flex only", forced.as_ref().map(|p| p.cost_total), 200.0);
    let summary = format!(
        "hybrid {:?} (cloud only), forced flex {:?}",
        hybrid.map(|p| p.cost_total),
        forced.map(|p| p.cost_total)
    );
    check.finish(summary, started, Some(Duration::from_secs(1)))
}

fn combined(audit: &mut Audit) -> Outcome {
    let started = Instant::now();
    let mut check = Check::new();
    let with_sla = fixtures::sec2_combined(true);
    let no_sla = fixtures::sec2_combined(false);
    let cases = [
        ("hybrid", with_sla.clone(), Some(300.0)),
        ("cloud only, no SLA", no_sla.restricted_to(&[PlatformKind::Cloud]), Some(380.0)),
        ("flex only", with_sla.restricted_to(&[PlatformKind::FlexHw]), Some(400.0)),
        ("cloud only, SLA", with_sla.restricted_to(&[PlatformKind::Cloud]), None),
    ];
    let mut got = Vec::new();
    for (label, s, want) in cases {
        let plan = solve(label, &s, audit, &mut check);
        let cost = plan.map(|p| p.cost_total);
        match want {
            Some(w) => check.cost(label, cost, w),
            None => check.expect(cost.is_none(), || format!("{label}: expected infeasible, got cost {cost:?}")),
        }
        got.push(format!("{label} {}", cost.map_or("infeasible".to_string(), |c| c.to_string())));
    }
    check.finish(got.join(", "), started, Some(Duration::from_secs(5)))
}

fn oracle() -> Outcome {
    let started = Instant::now();
    let mut check = Check::new();
    let params = RandomParams::default();
    let (mut optimal, mut infeasible) = (0, 0);
    for seed in 0..50 {
        let s = random_scenario(seed, &params);
        let (lp, _) = match build_milp(&s) {
            Ok(built) => built,
            Err(e) => {
                check.failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let exact = solve_milp(&lp, &MilpOptions::default());
        let brute = brute_force(&lp, &LpOptions::default());
        match (exact, brute) {
            (Ok(a), Ok(b)) => {
                check.record(&format!("{seed} {:?} {:x} {:?} {:x}", a.status, a.objective.to_bits(), b.status, b.objective.to_bits()));
                check.expect(a.status == b.status, || format!("seed {seed}: status {:?} vs brute force {:?}", a.status, b.status));
                if a.status == MilpStatus::Optimal {
                    optimal += 1;
                    check.expect((a.objective - b.objective).abs() <= TOL, || {
                        format!("seed {seed}: branch and bound {} vs brute force {}", a.objective, b.objective)
                    });
                } else {
                    infeasible += 1;
                }
            }
            (a, b) => check.failures.push(format!("seed {seed}: {:?} / {:?}", a.err(), b.err())),
        }
    }
    let summary = format!("50 random scenarios, {optimal} optimal and {infeasible} infeasible, all matching brute force");
    check.finish(summary, started, Some(Duration::from_secs(300)))
}

fn lp_reference() -> Outcome {
    let started = Instant::now();
    let mut check = Check::new();
    let count = 40;
    for seed in 0..count {
        let (n, m) = vertex::random_lp_shape(seed);
        let p = vertex::random_lp(seed, n, m);
        let Some(reference) = vertex::vertex_enumeration(&p) else {
            check.failures.push(format!("seed {seed}: reference found no vertex"));
            continue;
        };
        match solve_lp(&p, &LpOptions::default()) {
            Ok(s) if s.status == LpStatus::Optimal => {
                check.expect((s.objective - reference).abs() <= TOL, || {
                    format!("seed {seed} ({n}x{m}): simplex {} vs vertices {reference}", s.objective)
                });
            }
            Ok(s) => check.failures.push(format!("seed {seed}: status {:?}", s.status)),
            Err(e) => check.failures.push(format!("seed {seed}: {e}")),
        }
    }
    check.finish(format!("{count} random LPs against vertex enumeration"), started, None)
}

fn elastic_sweep(audit: &mut Audit) -> Outcome {
    let started = Instant::now();
    let mut check = Check::new();
    let s = paper_workload();
    let values = vec![1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01];
    let spec = SweepSpec::new(SweepParameter::CloudElasMultiplier, values.clone());
    let (report, plans) = match sweep_with_plans(&spec, &s, &SolveOptions::default()) {
        Ok(out) => out,
        Err(e) => {
            check.failures.push(e.to_string());
            return check.finish("sweep failed".into(), started, Some(Duration::from_secs(600)));
        }
    };
    check.record(&report.to_json());
    for (value, plan) in values.iter().zip(&plans) {
        match plan {
            Some(plan) => {
                let point = SweepParameter::CloudElasMultiplier.apply(&s, *value);
                audit.check(&format!("cloud elasticity x{value}"), &point, plan);
            }
            None => check.failures.push(format!("point {value}: no plan")),
        }
    }
    let costs: Vec<Option<f64>> = report.rows.iter().map(|r| r.cost_total).collect();
    for w in costs.windows(2) {
        if let (Some(a), Some(b)) = (w[0], w[1]) {
            check.expect(b <= a + TOL * a.abs().max(1.0), || format!("cost rises from {a} to {b}: {costs:?}"));
        }
    }
    let last = report.rows.last().and_then(|r| r.mix);
    check.expect(last.is_some_and(|m| (m.cloud - 1.0).abs() <= TOL), || format!("final mix {last:?} is not all cloud"));
    let summary = format!(
        "costs {:?}, final cloud share {:?}",
        costs.iter().map(|c| c.map(|c| (c * 1000.0).round() / 1000.0)).collect::<Vec<_>>(),
        last.map(|m| m.cloud)
    );
    check.finish(summary, started, Some(Duration::from_secs(600)))
}

fn flex_versus_hybrid(audit: &mut Audit) -> Outcome {
    let started = Instant::now();
    let mut check = Check::new();
    let mut summary = Vec::new();
    for (label, variability) in [
        ("flat", VariabilityModel::None),
        ("spike", VariabilityModel::SingleSpike { epoch: 3, factor: 5.0 }),
    ] {
        let params = WorkloadParams {
            variability,
            ..WorkloadParams::default()
        };
        let s = match paper_workload_with(&params) {
            Ok(s) => s,
            Err(e) => {
                check.failures.push(format!("{label}: {e}"));
                continue;
            }
        };
        let mut cost = |policy: Policy| {
            let restricted = s.restricted_to(policy.kinds());
            solve(&format!("{label} {policy}"), &restricted, audit, &mut check).map(|p| p.cost_total)
        };
        let (flex, hybrid) = (cost(Policy::FlexOnly), cost(Policy::FullHybrid));
        match (flex, hybrid) {
            (Some(f), Some(h)) if label == "flat" => {
                check.expect((f - h).abs() <= TOL * h.abs().max(1.0), || format!("flat: flex {f} vs hybrid {h}"))
            }
            (Some(f), Some(h)) => check.expect(f >= h - TOL * h.abs().max(1.0), || format!("spike: flex {f} below hybrid {h}")),
            _ => check.failures.push(format!("{label}: flex {flex:?}, hybrid {hybrid:?}")),
        }
        summary.push(format!("{label}: flex {flex:?} hybrid {hybrid:?}"));
    }
    check.finish(summary.join(", "), started, None)
}

/// Runs criteria 1 to 6, handing each outcome to `report` as soon as it is known.
fn run_all(audit: &mut Audit, mut report: impl FnMut(usize, &Outcome)) -> Vec<Outcome> {
    let mut out = Vec::new();
    for n in 1..=6 {
        let outcome = match n {
            1 => video(audit),
            2 => combined(audit),
            3 => oracle(),
            4 => lp_reference(),
            5 => elastic_sweep(audit),
            _ => flex_versus_hybrid(audit),
        };
        report(n, &outcome);
        out.push(outcome);
    }
    out
}

fn main() -> ExitCode {
    let mut audit = Audit::default();
    let mut all_pass = true;
    let first = run_all(&mut audit, |n, outcome| {
        println!("{}", outcome.line(n));
        all_pass &= outcome.passed();
    });

    let started = Instant::now();
    let second = run_all(&mut audit, |n, outcome| eprintln!("criterion {n} rerun in {:.2}s", outcome.elapsed.as_secs_f64()));
    let formal = Outcome {
        failures: audit.issues.iter().take(20).cloned().collect(),
        summary: format!("{} plans checked, {} violations", audit.plans, audit.issues.len()),
        fingerprint: String::new(),
        elapsed: Duration::ZERO,
        limit: None,
    };
    println!("{}", formal.line(7));
    all_pass &= formal.passed();

    let differing: Vec<String> = first
        .iter()
        .zip(&second)
        .enumerate()
        .filter(|(_, (a, b))| a.fingerprint != b.fingerprint || a.failures != b.failures)
        .map(|(n, _)| format!("criterion {} differs between runs", n + 1))
        .collect();
    let rerun = Outcome {
        failures: differing,
        summary: "criteria 1-6 rerun bit-identically".into(),
        fingerprint: String::new(),
        elapsed: started.elapsed(),
        limit: None,
    };
    println!("{}", rerun.line(8));
    all_pass &= rerun.passed();

    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Deployment-model comparison, parameter sweeps and tabular reports.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{kind_shares, solve_scenario, CostBreakdown, Plan, SolveOptions, SolveOutcome};
use crate::gen::Policy;
use crate::model::{validate, PlatformKind, Scenario};

pub const COMPARISON_FORMAT: &str = "nfv-comparison/1";
pub const SWEEP_FORMAT: &str = "nfv-sweep/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
        }
    }
}

/// Resource share per platform kind, summing to 1 unless nothing is provisioned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Mix {
    pub dedicated: f64,
    pub flexhw: f64,
    pub cloud: f64,
}

impl Mix {
    pub fn of(s: &Scenario, plan: &Plan) -> Mix {
        let shares = kind_shares(s, plan);
        Mix {
            dedicated: shares[&PlatformKind::Dedicated],
            flexhw: shares[&PlatformKind::FlexHw],
            cloud: shares[&PlatformKind::Cloud],
        }
    }

    pub fn get(&self, kind: PlatformKind) -> f64 {
        match kind {
            PlatformKind::Dedicated => self.dedicated,
            PlatformKind::FlexHw => self.flexhw,
            PlatformKind::Cloud => self.cloud,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub model: Policy,
    pub status: Status,
    pub cost_total: Option<f64>,
    pub breakdown: Option<CostBreakdown>,
    pub mix: Option<Mix>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub format: String,
    pub scenario: String,
    pub variability: String,
    pub rows: Vec<ModelRow>,
}

impl ComparisonReport {
    pub fn row(&self, model: Policy) -> Option<&ModelRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    pub fn cost(&self, model: Policy) -> Option<f64> {
        self.row(model).and_then(|r| r.cost_total)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "model",
            "status",
            "cost_total",
            "fixed",
            "hardware",
            "elastic",
            "mix_dedicated",
            "mix_flexhw",
            "mix_cloud",
            "nodes",
            "variability",
            "detail",
        ])?;
        for r in &self.rows {
            let mut rec = vec![r.model.as_str().to_string(), r.status.as_str().to_string(), opt(r.cost_total)];
            rec.extend(breakdown_cells(r.breakdown));
            rec.extend(mix_cells(r.mix));
            rec.push(r.nodes.to_string());
            rec.push(self.variability.clone());
            rec.push(r.detail.clone());
            w.write_record(&rec)?;
        }
        finish(w)
    }
}

/// Solves the scenario once per deployment model, each restricted to the
/// platform kinds that model allows.
pub fn compare_models(s: &Scenario, variability: &str, opts: &SolveOptions) -> Result<ComparisonReport> {
    compare_models_with_plans(s, variability, opts).map(|(report, _)| report)
}

/// [`compare_models`] plus the plan behind each optimal row, in row order.
pub fn compare_models_with_plans(
    s: &Scenario,
    variability: &str,
    opts: &SolveOptions,
) -> Result<(ComparisonReport, Vec<Option<Plan>>)> {
    let violations = validate(s);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let mut report = ComparisonReport {
        format: COMPARISON_FORMAT.into(),
        scenario: s.content_hash(),
        variability: variability.to_string(),
        rows: Vec::new(),
    };
    let mut plans = Vec::new();
    for model in Policy::ALL {
        let restricted = s.restricted_to(model.kinds());
        let problems = validate(&restricted);
        if let Some(first) = problems.first() {
            report.rows.push(ModelRow {
                model,
                status: Status::Infeasible,
                cost_total: None,
                breakdown: None,
                mix: None,
                detail: format!("no admissible placement: {first}"),
                nodes: 0,
            });
            plans.push(None);
            continue;
        }
        match solve_scenario(&restricted, opts) {
            Ok(outcome) => {
                report.rows.push(model_row(model, &restricted, &outcome));
                plans.push(outcome.plan().cloned());
            }
            Err(Error::Solver(source)) => {
                return Err(Error::Incomplete {
                    source,
                    partial: Box::new(Partial::Comparison(report)),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok((report, plans))
}

fn model_row(model: Policy, s: &Scenario, outcome: &SolveOutcome) -> ModelRow {
    match outcome {
        SolveOutcome::Optimal(plan) => ModelRow {
            model,
            status: Status::Optimal,
            cost_total: Some(plan.cost_total),
            breakdown: Some(plan.cost_breakdown),
            mix: Some(Mix::of(s, plan)),
            detail: String::new(),
            nodes: plan.solver.nodes,
        },
        SolveOutcome::Infeasible { nodes } => ModelRow {
            model,
            status: Status::Infeasible,
            cost_total: None,
            breakdown: None,
            mix: None,
            detail: "no placement meets capacity and latency bounds".into(),
            nodes: *nodes,
        },
    }
}

/// Reports finished before a solver error stopped the run.
#[derive(Debug, Clone, PartialEq)]
pub enum Partial {
    Comparison(ComparisonReport),
    Sweep(SweepReport),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Scales every Elas price.
    CloudElasMultiplier,
    /// Scales every Fixed price.
    FixedOpexMultiplier,
    /// Scales FlexHW and Cloud footprints; candidates drop to FlexHW and Dedicated.
    FootprintGap,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 3] = [
        SweepParameter::CloudElasMultiplier,
        SweepParameter::FixedOpexMultiplier,
        SweepParameter::FootprintGap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::CloudElasMultiplier => "cloud_elas_multiplier",
            SweepParameter::FixedOpexMultiplier => "fixed_opex_multiplier",
            SweepParameter::FootprintGap => "footprint_gap",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|p| p.as_str()).collect()
    }

    /// The scenario solved at one sweep point.
    pub fn apply(self, s: &Scenario, value: f64) -> Scenario {
        match self {
            SweepParameter::CloudElasMultiplier => {
                let mut out = s.clone();
                out.costs.iter_mut().for_each(|c| c.elas *= value);
                out
            }
            SweepParameter::FixedOpexMultiplier => {
                let mut out = s.clone();
                out.costs.iter_mut().for_each(|c| c.fixed *= value);
                out
            }
            SweepParameter::FootprintGap => {
                let mut out = s.restricted_to(&[PlatformKind::FlexHw, PlatformKind::Dedicated]);
                for f in &mut out.footprints {
                    if f.kind != PlatformKind::Dedicated {
                        f.fp *= value;
                    }
                }
                out
            }
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<SweepParameter> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown sweep parameter `{s}`; valid: {}", Self::names().join(", "))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
}

impl SweepSpec {
    pub fn new(parameter: SweepParameter, values: Vec<f64>) -> SweepSpec {
        SweepSpec {
            parameter,
            values,
            scenario: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Argument("sweep needs at least one value".into()));
        }
        if let Some(v) = self.values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Argument(format!("sweep value {v} must be finite and >= 0")));
        }
        let up = self.values.windows(2).all(|w| w[0] < w[1]);
        let down = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return Err(Error::Argument("sweep values must be strictly increasing or strictly decreasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub status: Status,
    pub cost_total: Option<f64>,
    pub breakdown: Option<CostBreakdown>,
    pub mix: Option<Mix>,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub format: String,
    pub scenario: String,
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "parameter",
            "value",
            "status",
            "cost_total",
            "fixed",
            "hardware",
            "elastic",
            "mix_dedicated",
            "mix_flexhw",
            "mix_cloud",
            "nodes",
        ])?;
        for r in &self.rows {
            let mut rec = vec![
                self.parameter.as_str().to_string(),
                r.value.to_string(),
                r.status.as_str().to_string(),
                opt(r.cost_total),
            ];
            rec.extend(breakdown_cells(r.breakdown));
            rec.extend(mix_cells(r.mix));
            rec.push(r.nodes.to_string());
            w.write_record(&rec)?;
        }
        finish(w)
    }
}

/// Re-solves the scenario at every value. Points run in parallel; rows keep
/// the order of `spec.values`.
pub fn sweep(spec: &SweepSpec, s: &Scenario, opts: &SolveOptions) -> Result<SweepReport> {
    sweep_with_plans(spec, s, opts).map(|(report, _)| report)
}

/// [`sweep`] plus the plan behind each optimal row, in row order.
pub fn sweep_with_plans(spec: &SweepSpec, s: &Scenario, opts: &SolveOptions) -> Result<(SweepReport, Vec<Option<Plan>>)> {
    spec.check()?;
    let violations = validate(s);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let points: Vec<Result<(SweepRow, Option<Plan>)>> = spec
        .values
        .par_iter()
        .map(|&value| {
            let point = spec.parameter.apply(s, value);
            if let Some(first) = validate(&point).first() {
                return Err(Error::Argument(format!("sweep point {value}: {first}")));
            }
            let outcome = solve_scenario(&point, opts)?;
            let row = match &outcome {
                SolveOutcome::Optimal(plan) => SweepRow {
                    value,
                    status: Status::Optimal,
                    cost_total: Some(plan.cost_total),
                    breakdown: Some(plan.cost_breakdown),
                    mix: Some(Mix::of(&point, plan)),
                    nodes: plan.solver.nodes,
                },
                SolveOutcome::Infeasible { nodes } => SweepRow {
                    value,
                    status: Status::Infeasible,
                    cost_total: None,
                    breakdown: None,
                    mix: None,
                    nodes: *nodes,
                },
            };
            Ok((row, outcome.plan().cloned()))
        })
        .collect();
    let mut report = SweepReport {
        format: SWEEP_FORMAT.into(),
        scenario: s.content_hash(),
        parameter: spec.parameter,
        rows: Vec::with_capacity(points.len()),
    };
    let mut plans = Vec::with_capacity(points.len());
    for point in points {
        match point {
            Ok((row, plan)) => {
                report.rows.push(row);
                plans.push(plan);
            }
            Err(Error::Solver(source)) => {
                return Err(Error::Incomplete {
                    source,
                    partial: Box::new(Partial::Sweep(report)),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok((report, plans))
}

/// Fixed, hardware and elastic amounts of a plan; they sum to its cost.
pub fn breakdown(plan: &Plan) -> CostBreakdown {
    plan.cost_breakdown
}

/// One row per (instance, epoch) with the provisioned and used resource.
pub fn plan_report_csv(s: &Scenario, plan: &Plan) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "instance",
        "kind",
        "location",
        "active",
        "capacity",
        "res",
        "epoch",
        "res_epoch",
        "utilization",
    ])?;
    let active: std::collections::BTreeSet<&str> = plan.active.iter().map(String::as_str).collect();
    let empty = Vec::new();
    for p in &s.instances {
        let res = plan.res.get(&p.id).copied().unwrap_or(0.0);
        let per_epoch = plan.res_epoch.get(&p.id).unwrap_or(&empty);
        for e in 0..plan.epochs {
            let used = per_epoch.get(e).copied().unwrap_or(0.0);
            w.write_record([
                p.id.clone(),
                p.kind().as_str().to_string(),
                p.location.clone(),
                active.contains(p.id.as_str()).to_string(),
                p.capacity.to_string(),
                res.to_string(),
                (e + 1).to_string(),
                used.to_string(),
                (used / p.capacity).to_string(),
            ])?;
        }
    }
    finish(w)
}

/// Costs per deployment model keyed by name, skipping infeasible ones.
pub fn optimal_costs(report: &ComparisonReport) -> BTreeMap<&'static str, f64> {
    report
        .rows
        .iter()
        .filter_map(|r| r.cost_total.map(|c| (r.model.as_str(), c)))
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn breakdown_cells(b: Option<CostBreakdown>) -> [String; 3] {
    match b {
        Some(b) => [b.fixed.to_string(), b.hardware.to_string(), b.elastic.to_string()],
        None => Default::default(),
    }
}

fn mix_cells(m: Option<Mix>) -> [String; 3] {
    match m {
        Some(m) => [m.dedicated.to_string(), m.flexhw.to_string(), m.cloud.to_string()],
        None => Default::default(),
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

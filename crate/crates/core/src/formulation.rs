//! Compiles a scenario into a mixed-binary program and decodes solutions
//! back into deployment plans.

use std::collections::{BTreeMap, HashMap, HashSet};

use nfvplan_milp::{
    is_valid_name, solve_milp, write_lp, MilpOptions, MilpProblem, MilpSolution, MilpStatus, Relation,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, PlatformKind, Scenario};

pub const DEFAULT_VAR_BUDGET: usize = 2_000_000;
pub const PLAN_FORMAT: &str = "nfv-plan/1";

/// Relative tolerance when comparing recomputed costs with the solver.
pub const COST_TOL: f64 = 1e-6;
/// Absolute tolerance for flow mass, load and latency checks.
pub const PLAN_TOL: f64 = 1e-6;

/// Identity of one decision variable. Indices refer to positions in the
/// scenario's `instances` and `classes`; epochs and stages are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    Active { instance: usize },
    Res { instance: usize },
    ResEpoch { instance: usize, epoch: usize },
    /// Share of the class entering its first stage at `instance`.
    FlowFirst { class: usize, epoch: usize, instance: usize },
    /// Share moving from stage `stage` on `from` to stage `stage + 1` on `to`.
    Flow {
        class: usize,
        epoch: usize,
        stage: usize,
        from: usize,
        to: usize,
    },
}

#[derive(Debug, Clone)]
pub struct VarIndex {
    keys: Vec<VarKey>,
    positions: HashMap<VarKey, usize>,
    hosts: Vec<Vec<Vec<usize>>>,
}

impl VarIndex {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn get(&self, key: &VarKey) -> Option<usize> {
        self.positions.get(key).copied()
    }

    pub fn keys(&self) -> &[VarKey] {
        &self.keys
    }

    /// Instances able to run stage `stage` of class `class`.
    pub fn hosts(&self, class: usize, stage: usize) -> &[usize] {
        &self.hosts[class][stage]
    }

    fn at(&self, key: VarKey) -> usize {
        self.positions[&key]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub var_budget: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            var_budget: DEFAULT_VAR_BUDGET,
        }
    }
}

fn lp_ident(raw: &str) -> String {
    raw.chars()
        .map(|ch| if ch.is_ascii_alphanumeric() || ch == '_' { ch } else { '_' })
        .collect()
}

#[derive(Default)]
struct Names {
    taken: HashSet<String>,
}

impl Names {
    fn claim(&mut self, wanted: String, fallback: usize) -> String {
        let mut name = if is_valid_name(&wanted) { wanted } else { format!("x{fallback}") };
        let mut k = 1;
        while self.taken.contains(&name) {
            name = format!("{name}_{k}");
            k += 1;
        }
        self.taken.insert(name.clone());
        name
    }
}

fn hosts_per_stage(s: &Scenario) -> Vec<Vec<Vec<usize>>> {
    s.classes
        .iter()
        .map(|c| {
            c.chain
                .stages
                .iter()
                .map(|m| (0..s.instances.len()).filter(|&p| s.instances[p].hosts(m)).collect())
                .collect()
        })
        .collect()
}

fn count_vars(s: &Scenario, hosts: &[Vec<Vec<usize>>]) -> usize {
    let per_epoch: usize = hosts
        .iter()
        .map(|stages| {
            stages[0].len() + stages.windows(2).map(|w| w[0].len() * w[1].len()).sum::<usize>()
        })
        .sum();
    s.instances.len() * (2 + s.epochs) + s.epochs * per_epoch
}

pub fn build_milp(s: &Scenario) -> Result<(MilpProblem, VarIndex)> {
    build_milp_with(s, &BuildOptions::default())
}

pub fn build_milp_with(s: &Scenario, opts: &BuildOptions) -> Result<(MilpProblem, VarIndex)> {
    let violations = validate(s);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let hosts = hosts_per_stage(s);
    let vars = count_vars(s, &hosts);
    if vars > opts.var_budget {
        return Err(Error::TooLarge {
            vars,
            budget: opts.var_budget,
        });
    }
    let look = s.lookup();
    let epochs = s.epochs;
    let inst: Vec<String> = s.instances.iter().map(|p| lp_ident(&p.id)).collect();
    let cls: Vec<String> = s.classes.iter().map(|c| lp_ident(&c.id)).collect();
    let mut names = Names::default();
    let mut lp = MilpProblem::new();
    let mut keys = Vec::with_capacity(vars);

    let mut add = |lp: &mut MilpProblem, keys: &mut Vec<VarKey>, key: VarKey, name: String, lo, hi, cost| {
        let name = names.claim(name, keys.len());
        let j = if key_is_binary(&key) {
            lp.add_binary(name, cost)
        } else {
            lp.add_var(name, lo, hi, cost)
        };
        keys.push(key);
        j
    };

    for (p, instance) in s.instances.iter().enumerate() {
        let cost = look
            .cost(&instance.location, instance.kind())
            .expect("validated scenario prices every instance");
        add(&mut lp, &mut keys, VarKey::Active { instance: p }, format!("act_{}", inst[p]), 0.0, 1.0, cost.fixed);
        add(
            &mut lp,
            &mut keys,
            VarKey::Res { instance: p },
            format!("res_{}", inst[p]),
            0.0,
            instance.capacity,
            cost.var,
        );
        for e in 0..epochs {
            add(
                &mut lp,
                &mut keys,
                VarKey::ResEpoch { instance: p, epoch: e },
                format!("rese_{}_{}", inst[p], e + 1),
                0.0,
                f64::INFINITY,
                cost.elas,
            );
        }
    }
    for (c, class) in s.classes.iter().enumerate() {
        let nf: Vec<String> = class.chain.stages.iter().map(|m| lp_ident(m)).collect();
        for e in 0..epochs {
            for &p in &hosts[c][0] {
                add(
                    &mut lp,
                    &mut keys,
                    VarKey::FlowFirst { class: c, epoch: e, instance: p },
                    format!("f_{}_{}_{}_{}", cls[c], e + 1, inst[p], nf[0]),
                    0.0,
                    1.0,
                    0.0,
                );
            }
            for j in 0..class.chain.len() - 1 {
                for &p in &hosts[c][j] {
                    for &q in &hosts[c][j + 1] {
                        add(
                            &mut lp,
                            &mut keys,
                            VarKey::Flow {
                                class: c,
                                epoch: e,
                                stage: j,
                                from: p,
                                to: q,
                            },
                            format!("f_{}_{}_{}_{}_{}_{}", cls[c], e + 1, inst[p], nf[j], inst[q], nf[j + 1]),
                            0.0,
                            1.0,
                            0.0,
                        );
                    }
                }
            }
        }
    }
    let positions: HashMap<VarKey, usize> = keys.iter().enumerate().map(|(j, k)| (*k, j)).collect();
    let index = VarIndex { keys, positions, hosts };

    // inflow terms into (class, epoch, stage, instance)
    let inflow = |c: usize, e: usize, j: usize, p: usize| -> Vec<usize> {
        if j == 0 {
            vec![index.at(VarKey::FlowFirst { class: c, epoch: e, instance: p })]
        } else {
            index
                .hosts(c, j - 1)
                .iter()
                .map(|&q| {
                    index.at(VarKey::Flow {
                        class: c,
                        epoch: e,
                        stage: j - 1,
                        from: q,
                        to: p,
                    })
                })
                .collect()
        }
    };

    let mut load: Vec<Vec<Vec<(usize, f64)>>> = vec![vec![Vec::new(); epochs]; s.instances.len()];
    for (c, class) in s.classes.iter().enumerate() {
        for (j, m) in class.chain.stages.iter().enumerate() {
            for &p in index.hosts(c, j) {
                let fp = look
                    .footprint(&class.id, m, s.instances[p].kind())
                    .expect("validated scenario has every footprint");
                for e in 0..epochs {
                    let coef = fp * class.volumes[e];
                    if coef != 0.0 {
                        load[p][e].extend(inflow(c, e, j, p).into_iter().map(|v| (v, coef)));
                    }
                }
            }
        }
    }
    for (p, instance) in s.instances.iter().enumerate() {
        let act = index.at(VarKey::Active { instance: p });
        let res = index.at(VarKey::Res { instance: p });
        lp.add_constraint(
            format!("gate_{}", inst[p]),
            vec![(res, 1.0), (act, -instance.capacity)],
            Relation::Le,
            0.0,
        );
        for e in 0..epochs {
            let rese = index.at(VarKey::ResEpoch { instance: p, epoch: e });
            let mut terms = std::mem::take(&mut load[p][e]);
            terms.push((rese, -1.0));
            lp.add_constraint(format!("load_{}_{}", inst[p], e + 1), terms, Relation::Eq, 0.0);
            lp.add_constraint(
                format!("cap_{}_{}", inst[p], e + 1),
                vec![(rese, 1.0), (res, -1.0)],
                Relation::Le,
                0.0,
            );
        }
    }

    let legs = s.options.include_ingress_egress_latency;
    for (c, class) in s.classes.iter().enumerate() {
        let last = class.chain.len() - 1;
        for e in 0..epochs {
            let first: Vec<(usize, f64)> = index.hosts(c, 0).iter().map(|&p| (inflow(c, e, 0, p)[0], 1.0)).collect();
            lp.add_constraint(format!("first_{}_{}", cls[c], e + 1), first, Relation::Eq, 1.0);
            for j in 0..last {
                for &p in index.hosts(c, j) {
                    let mut terms: Vec<(usize, f64)> = inflow(c, e, j, p).into_iter().map(|v| (v, 1.0)).collect();
                    for &q in index.hosts(c, j + 1) {
                        terms.push((
                            index.at(VarKey::Flow {
                                class: c,
                                epoch: e,
                                stage: j,
                                from: p,
                                to: q,
                            }),
                            -1.0,
                        ));
                    }
                    lp.add_constraint(
                        format!("cons_{}_{}_{}_{}", cls[c], e + 1, j + 1, inst[p]),
                        terms,
                        Relation::Eq,
                        0.0,
                    );
                }
            }
            let Some(threshold) = class.latency_threshold else {
                continue;
            };
            let mut terms = Vec::new();
            for j in 0..last {
                for &p in index.hosts(c, j) {
                    for &q in index.hosts(c, j + 1) {
                        let ms = look
                            .stage_latency(&s.instances[p].id, &s.instances[q].id)
                            .expect("validated scenario has every stage latency");
                        if ms != 0.0 {
                            let v = index.at(VarKey::Flow {
                                class: c,
                                epoch: e,
                                stage: j,
                                from: p,
                                to: q,
                            });
                            terms.push((v, ms));
                        }
                    }
                }
            }
            if legs {
                if let Some(loc) = &class.ingress {
                    for &p in index.hosts(c, 0) {
                        let ms = look.ingress_latency(loc, &s.instances[p].id).expect("validated ingress leg");
                        if ms != 0.0 {
                            terms.push((inflow(c, e, 0, p)[0], ms));
                        }
                    }
                }
                if let Some(loc) = &class.egress {
                    for &p in index.hosts(c, last) {
                        let ms = look.egress_latency(&s.instances[p].id, loc).expect("validated egress leg");
                        if ms != 0.0 {
                            terms.extend(inflow(c, e, last, p).into_iter().map(|v| (v, ms)));
                        }
                    }
                }
            }
            lp.add_constraint(format!("lat_{}_{}", cls[c], e + 1), terms, Relation::Le, threshold);
        }
    }

    if s.options.static_routing {
        for (j, key) in index.keys().iter().enumerate() {
            let base = match *key {
                VarKey::FlowFirst { class, epoch, instance } if epoch > 0 => VarKey::FlowFirst {
                    class,
                    epoch: 0,
                    instance,
                },
                VarKey::Flow {
                    class,
                    epoch,
                    stage,
                    from,
                    to,
                } if epoch > 0 => VarKey::Flow {
                    class,
                    epoch: 0,
                    stage,
                    from,
                    to,
                },
                _ => continue,
            };
            let name = format!("static_{}", lp.names[j]);
            lp.add_constraint(name, vec![(j, 1.0), (index.at(base), -1.0)], Relation::Eq, 0.0);
        }
    }
    Ok((lp, index))
}

fn key_is_binary(key: &VarKey) -> bool {
    matches!(key, VarKey::Active { .. })
}

/// The built program in CPLEX LP text form.
pub fn export_lp(s: &Scenario) -> Result<String> {
    let (lp, _) = build_milp(s)?;
    Ok(write_lp(&lp)?)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub fixed: f64,
    pub hardware: f64,
    pub elastic: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.fixed + self.hardware + self.elastic
    }
}

/// Nonzero share of one class-epoch's traffic arriving at `to` for chain
/// position `stage` (1-based). `from` is absent on the first hop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub class: String,
    pub epoch: usize,
    pub stage: usize,
    pub nf: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
    pub to: String,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub objective: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub format: String,
    pub scenario: String,
    pub epochs: usize,
    /// Deployed instances in scenario order.
    pub active: Vec<String>,
    pub res: BTreeMap<String, f64>,
    pub res_epoch: BTreeMap<String, Vec<f64>>,
    pub flows: Vec<FlowRecord>,
    pub cost_total: f64,
    pub cost_breakdown: CostBreakdown,
    /// Average chain latency in ms, one entry per epoch.
    pub per_class_latency: BTreeMap<String, Vec<f64>>,
    pub solver: SolverStats,
}

impl Plan {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Plan> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Cost of the plan's decisions priced from the scenario.
pub fn recompute_cost(s: &Scenario, plan: &Plan) -> CostBreakdown {
    let look = s.lookup();
    let mut out = CostBreakdown::default();
    for p in &s.instances {
        let Some(cost) = look.cost(&p.location, p.kind()) else {
            continue;
        };
        if plan.active.contains(&p.id) {
            out.fixed += cost.fixed;
        }
        out.hardware += cost.var * plan.res.get(&p.id).copied().unwrap_or(0.0);
        if let Some(per_epoch) = plan.res_epoch.get(&p.id) {
            out.elastic += cost.elas * per_epoch.iter().sum::<f64>();
        }
    }
    out
}

pub fn decode(s: &Scenario, index: &VarIndex, sol: &MilpSolution) -> Result<Plan> {
    if sol.status != MilpStatus::Optimal {
        return Err(Error::NoPlan("the program is infeasible".into()));
    }
    let x = &sol.x;
    let mut active = Vec::new();
    let mut res = BTreeMap::new();
    let mut res_epoch = BTreeMap::new();
    for (p, instance) in s.instances.iter().enumerate() {
        if x[index.at(VarKey::Active { instance: p })] > 0.5 {
            active.push(instance.id.clone());
        }
        res.insert(instance.id.clone(), x[index.at(VarKey::Res { instance: p })]);
        let per_epoch = (0..s.epochs)
            .map(|e| x[index.at(VarKey::ResEpoch { instance: p, epoch: e })])
            .collect();
        res_epoch.insert(instance.id.clone(), per_epoch);
    }
    let mut flows = Vec::new();
    for (j, key) in index.keys().iter().enumerate() {
        if x[j] <= 0.0 {
            continue;
        }
        let (class, epoch, stage, from, to) = match *key {
            VarKey::FlowFirst { class, epoch, instance } => (class, epoch, 0, None, instance),
            VarKey::Flow {
                class,
                epoch,
                stage,
                from,
                to,
            } => (class, epoch, stage + 1, Some(from), to),
            _ => continue,
        };
        let c = &s.classes[class];
        flows.push(FlowRecord {
            class: c.id.clone(),
            epoch: epoch + 1,
            stage: stage + 1,
            nf: c.chain.stages[stage].clone(),
            from: from.map(|p| s.instances[p].id.clone()),
            to: s.instances[to].id.clone(),
            fraction: x[j],
        });
    }
    let mut plan = Plan {
        format: PLAN_FORMAT.into(),
        scenario: s.content_hash(),
        epochs: s.epochs,
        active,
        res,
        res_epoch,
        flows,
        cost_total: 0.0,
        cost_breakdown: CostBreakdown::default(),
        per_class_latency: BTreeMap::new(),
        solver: SolverStats {
            objective: sol.objective,
            nodes: sol.node_count,
        },
    };
    let breakdown = recompute_cost(s, &plan);
    let total = breakdown.total();
    if (total - sol.objective).abs() > COST_TOL * sol.objective.abs().max(1.0) {
        return Err(Error::CostMismatch {
            recomputed: total,
            objective: sol.objective,
        });
    }
    plan.cost_breakdown = breakdown;
    plan.cost_total = total;
    for (c, class) in s.classes.iter().enumerate() {
        let per_epoch = (0..s.epochs).map(|e| latency_of(s, &plan, c, e)).collect();
        plan.per_class_latency.insert(class.id.clone(), per_epoch);
    }
    Ok(plan)
}

/// Flow-weighted chain latency of class `class` in epoch `epoch` (both
/// 0-based indices), including ingress and egress legs when enabled.
pub fn latency_of(s: &Scenario, plan: &Plan, class: usize, epoch: usize) -> f64 {
    let look = s.lookup();
    let c = &s.classes[class];
    let legs = s.options.include_ingress_egress_latency;
    let mut total = 0.0;
    for f in plan.flows.iter().filter(|f| f.class == c.id && f.epoch == epoch + 1) {
        let hop = match &f.from {
            Some(from) => look.stage_latency(from, &f.to),
            None if legs => c.ingress.as_ref().and_then(|loc| look.ingress_latency(loc, &f.to)),
            None => None,
        };
        total += hop.unwrap_or(0.0) * f.fraction;
        if legs && f.stage == c.chain.len() {
            if let Some(loc) = &c.egress {
                total += look.egress_latency(&f.to, loc).unwrap_or(0.0) * f.fraction;
            }
        }
    }
    total
}

/// Every plan invariant that does not hold, as readable messages.
pub fn check_plan(s: &Scenario, plan: &Plan) -> Vec<String> {
    let mut issues = Vec::new();
    let look = s.lookup();
    let class_pos: HashMap<&str, usize> = s.classes.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();

    let mut mass: HashMap<(usize, usize, usize), f64> = HashMap::new();
    let mut load: HashMap<(&str, usize), f64> = HashMap::new();
    for f in &plan.flows {
        let Some(&c) = class_pos.get(f.class.as_str()) else {
            issues.push(format!("flow references unknown class `{}`", f.class));
            continue;
        };
        if !(-PLAN_TOL..=1.0 + PLAN_TOL).contains(&f.fraction) {
            issues.push(format!("flow fraction {} outside [0, 1]", f.fraction));
        }
        *mass.entry((c, f.epoch, f.stage)).or_default() += f.fraction;
        let Some(p) = s.instance(&f.to) else {
            issues.push(format!("flow references unknown instance `{}`", f.to));
            continue;
        };
        let fp = look.footprint(&f.class, &f.nf, p.kind()).unwrap_or(0.0);
        let volume = s.classes[c].volumes.get(f.epoch - 1).copied().unwrap_or(0.0);
        *load.entry((p.id.as_str(), f.epoch)).or_default() += fp * volume * f.fraction;
    }
    for (c, class) in s.classes.iter().enumerate() {
        for e in 1..=s.epochs {
            for j in 1..=class.chain.len() {
                let m = mass.get(&(c, e, j)).copied().unwrap_or(0.0);
                if (m - 1.0).abs() > PLAN_TOL {
                    issues.push(format!("class {} epoch {e} stage {j}: flow mass {m}", class.id));
                }
            }
            let lat = latency_of(s, plan, c, e - 1);
            let reported = plan.per_class_latency.get(&class.id).and_then(|v| v.get(e - 1)).copied();
            if reported.is_none_or(|r| (r - lat).abs() > PLAN_TOL) {
                issues.push(format!("class {} epoch {e}: reported latency {reported:?}, recomputed {lat}", class.id));
            }
            if let Some(t) = class.latency_threshold {
                if lat > t + PLAN_TOL {
                    issues.push(format!("class {} epoch {e}: latency {lat} over threshold {t}", class.id));
                }
            }
        }
    }
    for p in &s.instances {
        let res = plan.res.get(&p.id).copied().unwrap_or(0.0);
        if res > PLAN_TOL && !plan.active.contains(&p.id) {
            issues.push(format!("instance {}: res {res} while inactive", p.id));
        }
        if res > p.capacity + PLAN_TOL {
            issues.push(format!("instance {}: res {res} over capacity {}", p.id, p.capacity));
        }
        let per_epoch = plan.res_epoch.get(&p.id);
        for e in 1..=s.epochs {
            let l = load.get(&(p.id.as_str(), e)).copied().unwrap_or(0.0);
            let re = per_epoch.and_then(|v| v.get(e - 1)).copied().unwrap_or(0.0);
            if (l - re).abs() > PLAN_TOL {
                issues.push(format!("instance {} epoch {e}: load {l} but res_epoch {re}", p.id));
            }
            if l > res + PLAN_TOL {
                issues.push(format!("instance {} epoch {e}: load {l} over res {res}", p.id));
            }
        }
    }
    let b = plan.cost_breakdown;
    let scale = plan.cost_total.abs().max(1.0);
    if (b.total() - plan.cost_total).abs() > COST_TOL * scale {
        issues.push(format!("breakdown sums to {} but cost_total is {}", b.total(), plan.cost_total));
    }
    let again = recompute_cost(s, plan);
    if (again.total() - plan.cost_total).abs() > COST_TOL * scale {
        issues.push(format!("recomputed cost {} but cost_total is {}", again.total(), plan.cost_total));
    }
    if (plan.solver.objective - plan.cost_total).abs() > COST_TOL * scale {
        issues.push(format!("objective {} but cost_total is {}", plan.solver.objective, plan.cost_total));
    }
    issues
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub node_budget: usize,
    pub var_budget: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            node_budget: MilpOptions::default().node_budget,
            var_budget: DEFAULT_VAR_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Optimal(Plan),
    Infeasible { nodes: usize },
}

impl SolveOutcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            SolveOutcome::Optimal(p) => Some(p),
            SolveOutcome::Infeasible { .. } => None,
        }
    }

    pub fn cost(&self) -> Option<f64> {
        self.plan().map(|p| p.cost_total)
    }
}

/// Builds, solves exactly and decodes.
pub fn solve_scenario(s: &Scenario, opts: &SolveOptions) -> Result<SolveOutcome> {
    let (lp, index) = build_milp_with(s, &BuildOptions { var_budget: opts.var_budget })?;
    let milp = MilpOptions {
        node_budget: opts.node_budget,
        ..MilpOptions::default()
    };
    let sol = solve_milp(&lp, &milp)?;
    match sol.status {
        MilpStatus::Optimal => Ok(SolveOutcome::Optimal(decode(s, &index, &sol)?)),
        MilpStatus::Infeasible => Ok(SolveOutcome::Infeasible { nodes: sol.node_count }),
    }
}

/// Kinds in a fixed order, for reports keyed by platform type.
pub fn kind_shares(s: &Scenario, plan: &Plan) -> BTreeMap<PlatformKind, f64> {
    let mut units: BTreeMap<PlatformKind, f64> = PlatformKind::ALL.iter().map(|&k| (k, 0.0)).collect();
    for p in &s.instances {
        let amount = if p.ptype.elastic {
            plan.res_epoch.get(&p.id).map(|v| v.iter().sum()).unwrap_or(0.0)
        } else {
            plan.res.get(&p.id).copied().unwrap_or(0.0)
        };
        *units.get_mut(&p.kind()).expect("all kinds present") += amount.max(0.0);
    }
    let total: f64 = units.values().sum();
    if total > 0.0 {
        for v in units.values_mut() {
            *v /= total;
        }
    }
    units
}

//! Scenario types, their JSON file format, and validation.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCENARIO_FORMAT: &str = "nfv-scenario/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlatformKind {
    #[serde(rename = "dedicated")]
    Dedicated,
    #[serde(rename = "flexhw")]
    FlexHw,
    #[serde(rename = "cloud")]
    Cloud,
}

impl PlatformKind {
    pub const ALL: [PlatformKind; 3] = [PlatformKind::Dedicated, PlatformKind::FlexHw, PlatformKind::Cloud];

    pub fn as_str(self) -> &'static str {
        match self {
            PlatformKind::Dedicated => "dedicated",
            PlatformKind::FlexHw => "flexhw",
            PlatformKind::Cloud => "cloud",
        }
    }
}

impl fmt::Display for PlatformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Location {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<f64>,
    #[serde(default)]
    pub is_ingress: bool,
    #[serde(default)]
    pub is_egress: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformType {
    pub kind: PlatformKind,
    pub supported_nfs: Vec<String>,
    /// Whether per-epoch usage is billed.
    pub elastic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformInstance {
    pub id: String,
    pub location: String,
    pub ptype: PlatformType,
    /// Resource units this instance can provision.
    pub capacity: f64,
}

impl PlatformInstance {
    pub fn hosts(&self, nf: &str) -> bool {
        self.ptype.supported_nfs.iter().any(|m| m == nf)
    }

    pub fn kind(&self) -> PlatformKind {
        self.ptype.kind
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFunction {
    pub id: String,
    pub name: String,
}

/// Ordered NF ids a class traverses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ServiceChain {
    pub stages: Vec<String>,
}

impl ServiceChain {
    pub fn new<S: Into<String>>(stages: impl IntoIterator<Item = S>) -> Self {
        ServiceChain {
            stages: stages.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// NF at 1-based position `index`.
    pub fn stage_of(&self, index: usize) -> Result<&str> {
        if index == 0 || index > self.stages.len() {
            return Err(Error::StageOutOfRange {
                index,
                len: self.stages.len(),
            });
        }
        Ok(&self.stages[index - 1])
    }
}

pub fn stage_of(chain: &ServiceChain, index: usize) -> Result<&str> {
    chain.stage_of(index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficClass {
    pub id: String,
    pub chain: ServiceChain,
    /// Traffic units per epoch.
    pub volumes: Vec<f64>,
    /// Average chain latency bound in ms; absent means unconstrained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ingress: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub egress: Option<String>,
}

/// Resource units consumed per traffic unit of `class` by `nf` on `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Footprint {
    pub class: String,
    pub nf: String,
    pub kind: PlatformKind,
    pub fp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostEntry {
    pub location: String,
    pub kind: PlatformKind,
    /// Per deployed instance.
    pub fixed: f64,
    /// Per provisioned resource unit.
    pub var: f64,
    /// Per resource unit used in one epoch.
    pub elas: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leg {
    /// Instance to instance between consecutive stages.
    #[default]
    Stage,
    /// Ingress location to instance.
    Ingress,
    /// Instance to egress location.
    Egress,
}

impl Leg {
    fn is_stage(&self) -> bool {
        *self == Leg::Stage
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyEntry {
    pub from: String,
    pub to: String,
    pub ms: f64,
    #[serde(default, skip_serializing_if = "Leg::is_stage")]
    pub leg: Leg,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOptions {
    #[serde(default)]
    pub include_ingress_egress_latency: bool,
    /// Force every class to use the same routing in all epochs.
    #[serde(default)]
    pub static_routing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format: String,
    pub locations: Vec<Location>,
    pub instances: Vec<PlatformInstance>,
    pub nfs: Vec<NetworkFunction>,
    pub classes: Vec<TrafficClass>,
    pub footprints: Vec<Footprint>,
    pub costs: Vec<CostEntry>,
    pub latency: Vec<LatencyEntry>,
    pub epochs: usize,
    #[serde(default)]
    pub options: ScenarioOptions,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        Ok(serde_json::from_str(text)?)
    }

    /// Pretty-printed canonical form, newline terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    /// Hex SHA-256 of the compact canonical serialization.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn instance(&self, id: &str) -> Option<&PlatformInstance> {
        self.instances.iter().find(|p| p.id == id)
    }

    pub fn class(&self, id: &str) -> Option<&TrafficClass> {
        self.classes.iter().find(|c| c.id == id)
    }

    /// Whether instance `instance` can run NF `nf`.
    pub fn hostable(&self, instance: &str, nf: &str) -> Result<bool> {
        let p = self.instance(instance).ok_or_else(|| Error::UnknownId {
            kind: "instance",
            id: instance.to_string(),
        })?;
        if !self.nfs.iter().any(|m| m.id == nf) {
            return Err(Error::UnknownId {
                kind: "nf",
                id: nf.to_string(),
            });
        }
        Ok(p.hosts(nf))
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }

    pub fn lookup(&self) -> Lookup<'_> {
        Lookup::new(self)
    }

    /// Copy keeping only instances of the given kinds.
    pub fn restricted_to(&self, kinds: &[PlatformKind]) -> Scenario {
        let mut s = self.clone();
        s.instances.retain(|p| kinds.contains(&p.kind()));
        let keep: HashSet<&str> = s.instances.iter().map(|p| p.id.as_str()).collect();
        s.latency.retain(|e| match e.leg {
            Leg::Stage => keep.contains(e.from.as_str()) && keep.contains(e.to.as_str()),
            Leg::Ingress => keep.contains(e.to.as_str()),
            Leg::Egress => keep.contains(e.from.as_str()),
        });
        s
    }
}

/// Hash-map views over the record arrays of a scenario.
pub struct Lookup<'a> {
    footprints: HashMap<(&'a str, &'a str, PlatformKind), f64>,
    costs: HashMap<(&'a str, PlatformKind), &'a CostEntry>,
    latency: HashMap<(Leg, &'a str, &'a str), f64>,
}

impl<'a> Lookup<'a> {
    fn new(s: &'a Scenario) -> Self {
        Lookup {
            footprints: s
                .footprints
                .iter()
                .map(|f| ((f.class.as_str(), f.nf.as_str(), f.kind), f.fp))
                .collect(),
            costs: s.costs.iter().map(|c| ((c.location.as_str(), c.kind), c)).collect(),
            latency: s
                .latency
                .iter()
                .map(|e| ((e.leg, e.from.as_str(), e.to.as_str()), e.ms))
                .collect(),
        }
    }

    pub fn footprint(&self, class: &str, nf: &str, kind: PlatformKind) -> Option<f64> {
        self.footprints.get(&(class, nf, kind)).copied()
    }

    pub fn cost(&self, location: &str, kind: PlatformKind) -> Option<&'a CostEntry> {
        self.costs.get(&(location, kind)).copied()
    }

    /// Latency between two instances; zero from an instance to itself.
    pub fn stage_latency(&self, from: &str, to: &str) -> Option<f64> {
        if from == to {
            return Some(0.0);
        }
        self.latency.get(&(Leg::Stage, from, to)).copied()
    }

    pub fn ingress_latency(&self, location: &str, instance: &str) -> Option<f64> {
        self.latency.get(&(Leg::Ingress, location, instance)).copied()
    }

    pub fn egress_latency(&self, instance: &str, location: &str) -> Option<f64> {
        self.latency.get(&(Leg::Egress, instance, location)).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    BadFormat,
    NoEpochs,
    DuplicateId,
    DuplicateEntry,
    UnknownReference,
    InvalidNumber,
    NonPositiveCapacity,
    DedicatedArity,
    EmptyChain,
    RepeatedNf,
    EpochMismatch,
    UncoverableStage,
    MissingFootprint,
    MissingCost,
    ElasticMismatch,
    MissingLatency,
    SelfLatency,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::BadFormat => "bad format",
            Rule::NoEpochs => "no epochs",
            Rule::DuplicateId => "duplicate id",
            Rule::DuplicateEntry => "duplicate entry",
            Rule::UnknownReference => "unknown reference",
            Rule::InvalidNumber => "invalid number",
            Rule::NonPositiveCapacity => "non-positive capacity",
            Rule::DedicatedArity => "dedicated arity",
            Rule::EmptyChain => "empty chain",
            Rule::RepeatedNf => "repeated nf",
            Rule::EpochMismatch => "epoch mismatch",
            Rule::UncoverableStage => "uncoverable stage",
            Rule::MissingFootprint => "missing footprint",
            Rule::MissingCost => "missing cost",
            Rule::ElasticMismatch => "elastic mismatch",
            Rule::MissingLatency => "missing latency",
            Rule::SelfLatency => "self latency",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Offending entity, e.g. `class video`.
    pub entity: String,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.entity, self.rule.as_str(), self.detail)
    }
}

struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, entity: String, rule: Rule, detail: impl Into<String>) {
        self.0.push(Violation {
            entity,
            rule,
            detail: detail.into(),
        });
    }

    fn number(&mut self, entity: &str, field: &str, v: f64) {
        if !v.is_finite() || v < 0.0 {
            self.push(entity.to_string(), Rule::InvalidNumber, format!("{field} = {v} must be finite and >= 0"));
        }
    }

    fn unique<'a>(&mut self, kind: &str, ids: impl Iterator<Item = &'a str>) -> HashSet<&'a str> {
        let mut seen = HashSet::new();
        for id in ids {
            if !seen.insert(id) {
                self.push(format!("{kind} {id}"), Rule::DuplicateId, format!("{kind} id appears more than once"));
            }
        }
        seen
    }
}

/// Every invariant and cross-reference problem found in `s`. Never aborts.
pub fn validate(s: &Scenario) -> Vec<Violation> {
    let mut r = Report(Vec::new());
    if s.format != SCENARIO_FORMAT {
        r.push("scenario".into(), Rule::BadFormat, format!("expected `{SCENARIO_FORMAT}`, found `{}`", s.format));
    }
    if s.epochs == 0 {
        r.push("scenario".into(), Rule::NoEpochs, "epochs must be at least 1");
    }
    let locations = r.unique("location", s.locations.iter().map(|l| l.id.as_str()));
    let nfs = r.unique("nf", s.nfs.iter().map(|m| m.id.as_str()));
    let instances = r.unique("instance", s.instances.iter().map(|p| p.id.as_str()));
    let classes = r.unique("class", s.classes.iter().map(|c| c.id.as_str()));

    for l in &s.locations {
        if let Some(pop) = l.population {
            r.number(&format!("location {}", l.id), "population", pop);
        }
    }

    for p in &s.instances {
        let entity = format!("instance {}", p.id);
        if !locations.contains(p.location.as_str()) {
            r.push(entity.clone(), Rule::UnknownReference, format!("location `{}`", p.location));
        }
        let mut seen = HashSet::new();
        for m in &p.ptype.supported_nfs {
            if !nfs.contains(m.as_str()) {
                r.push(entity.clone(), Rule::UnknownReference, format!("nf `{m}`"));
            }
            if !seen.insert(m) {
                r.push(entity.clone(), Rule::DuplicateEntry, format!("nf `{m}` listed twice"));
            }
        }
        if p.kind() == PlatformKind::Dedicated && p.ptype.supported_nfs.len() != 1 {
            r.push(
                entity.clone(),
                Rule::DedicatedArity,
                format!("dedicated platforms host exactly one nf, found {}", p.ptype.supported_nfs.len()),
            );
        }
        if !(p.capacity.is_finite() && p.capacity > 0.0) {
            r.push(entity, Rule::NonPositiveCapacity, format!("capacity = {}", p.capacity));
        }
    }

    for c in &s.classes {
        let entity = format!("class {}", c.id);
        if c.chain.is_empty() {
            r.push(entity.clone(), Rule::EmptyChain, "chain needs at least one stage");
        }
        let mut seen = HashSet::new();
        for m in &c.chain.stages {
            if !nfs.contains(m.as_str()) {
                r.push(entity.clone(), Rule::UnknownReference, format!("nf `{m}`"));
            } else if !s.instances.iter().any(|p| p.hosts(m)) {
                r.push(entity.clone(), Rule::UncoverableStage, format!("no candidate instance hosts nf `{m}`"));
            }
            if !seen.insert(m) {
                r.push(entity.clone(), Rule::RepeatedNf, format!("nf `{m}` appears twice in the chain"));
            }
        }
        if c.volumes.len() != s.epochs {
            r.push(
                entity.clone(),
                Rule::EpochMismatch,
                format!("{} volumes for {} epochs", c.volumes.len(), s.epochs),
            );
        }
        for v in &c.volumes {
            r.number(&entity, "volume", *v);
        }
        if let Some(t) = c.latency_threshold {
            r.number(&entity, "latency_threshold", t);
        }
        for (field, loc) in [("ingress", &c.ingress), ("egress", &c.egress)] {
            if let Some(loc) = loc {
                if !locations.contains(loc.as_str()) {
                    r.push(entity.clone(), Rule::UnknownReference, format!("{field} location `{loc}`"));
                }
            }
        }
    }

    let mut fp_keys = HashSet::new();
    for f in &s.footprints {
        let entity = format!("footprint {}/{}/{}", f.class, f.nf, f.kind);
        if !classes.contains(f.class.as_str()) {
            r.push(entity.clone(), Rule::UnknownReference, format!("class `{}`", f.class));
        }
        if !nfs.contains(f.nf.as_str()) {
            r.push(entity.clone(), Rule::UnknownReference, format!("nf `{}`", f.nf));
        }
        r.number(&entity, "fp", f.fp);
        if !fp_keys.insert((f.class.as_str(), f.nf.as_str(), f.kind)) {
            r.push(entity, Rule::DuplicateEntry, "footprint given twice");
        }
    }
    for c in &s.classes {
        for m in &c.chain.stages {
            for kind in PlatformKind::ALL {
                let needed = s.instances.iter().any(|p| p.kind() == kind && p.hosts(m));
                if needed && !fp_keys.contains(&(c.id.as_str(), m.as_str(), kind)) {
                    r.push(format!("class {}", c.id), Rule::MissingFootprint, format!("nf `{m}` on {kind}"));
                }
            }
        }
    }

    let mut cost_keys: HashMap<(&str, PlatformKind), &CostEntry> = HashMap::new();
    for c in &s.costs {
        let entity = format!("cost {}/{}", c.location, c.kind);
        if !locations.contains(c.location.as_str()) {
            r.push(entity.clone(), Rule::UnknownReference, format!("location `{}`", c.location));
        }
        r.number(&entity, "fixed", c.fixed);
        r.number(&entity, "var", c.var);
        r.number(&entity, "elas", c.elas);
        if cost_keys.insert((c.location.as_str(), c.kind), c).is_some() {
            r.push(entity, Rule::DuplicateEntry, "cost given twice");
        }
    }
    for p in &s.instances {
        match cost_keys.get(&(p.location.as_str(), p.kind())) {
            None => r.push(
                format!("instance {}", p.id),
                Rule::MissingCost,
                format!("no cost entry for {} at `{}`", p.kind(), p.location),
            ),
            Some(c) if !p.ptype.elastic && c.elas != 0.0 => r.push(
                format!("instance {}", p.id),
                Rule::ElasticMismatch,
                format!("non-elastic platform priced with elas = {}", c.elas),
            ),
            Some(_) => {}
        }
    }

    let mut lat_keys = HashSet::new();
    for e in &s.latency {
        let entity = format!("latency {}->{}", e.from, e.to);
        let (from_ok, to_ok) = match e.leg {
            Leg::Stage => (instances.contains(e.from.as_str()), instances.contains(e.to.as_str())),
            Leg::Ingress => (locations.contains(e.from.as_str()), instances.contains(e.to.as_str())),
            Leg::Egress => (instances.contains(e.from.as_str()), locations.contains(e.to.as_str())),
        };
        if !from_ok {
            r.push(entity.clone(), Rule::UnknownReference, format!("from `{}`", e.from));
        }
        if !to_ok {
            r.push(entity.clone(), Rule::UnknownReference, format!("to `{}`", e.to));
        }
        r.number(&entity, "ms", e.ms);
        if e.leg == Leg::Stage && e.from == e.to && e.ms != 0.0 {
            r.push(entity.clone(), Rule::SelfLatency, "latency from an instance to itself must be 0");
        }
        if !lat_keys.insert((e.leg, e.from.as_str(), e.to.as_str())) {
            r.push(entity, Rule::DuplicateEntry, "latency given twice");
        }
    }
    let mut missing = HashSet::new();
    for c in &s.classes {
        fn hosts<'a>(s: &'a Scenario, m: &'a str) -> impl Iterator<Item = &'a PlatformInstance> + 'a {
            s.instances.iter().filter(move |p| p.hosts(m))
        }
        for pair in c.chain.stages.windows(2) {
            for p in hosts(s, &pair[0]) {
                for q in hosts(s, &pair[1]) {
                    if p.id != q.id && !lat_keys.contains(&(Leg::Stage, p.id.as_str(), q.id.as_str())) {
                        missing.insert((Leg::Stage, p.id.clone(), q.id.clone()));
                    }
                }
            }
        }
        if !s.options.include_ingress_egress_latency {
            continue;
        }
        if let (Some(loc), Some(first)) = (&c.ingress, c.chain.stages.first()) {
            for p in hosts(s, first) {
                if !lat_keys.contains(&(Leg::Ingress, loc.as_str(), p.id.as_str())) {
                    missing.insert((Leg::Ingress, loc.clone(), p.id.clone()));
                }
            }
        }
        if let (Some(loc), Some(last)) = (&c.egress, c.chain.stages.last()) {
            for p in hosts(s, last) {
                if !lat_keys.contains(&(Leg::Egress, p.id.as_str(), loc.as_str())) {
                    missing.insert((Leg::Egress, p.id.clone(), loc.clone()));
                }
            }
        }
    }
    let mut missing: Vec<_> = missing.into_iter().collect();
    missing.sort_by(|a, b| (a.1.as_str(), a.2.as_str()).cmp(&(b.1.as_str(), b.2.as_str())));
    for (leg, from, to) in missing {
        let leg = match leg {
            Leg::Stage => "stage",
            Leg::Ingress => "ingress",
            Leg::Egress => "egress",
        };
        r.push(format!("latency {from}->{to}"), Rule::MissingLatency, format!("{leg} leg has no entry"));
    }
    r.0
}

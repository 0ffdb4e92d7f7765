//! Synthetic backbone workload: four classes with three-NF chains over a
//! catalog of eight NFs, gravity-model volumes on the Abilene topology.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::candidates::{make_candidates, Policy};
use super::presets::{preset_costs, CostPreset};
use super::topology::TopologySpec;
use super::traffic::{apply_variability, gravity_traffic, VariabilityModel};
use crate::error::{Error, Result};
use crate::model::*;

/// NF catalog as (id, display name).
pub const CATALOG: [(&str, &str); 8] = [
    ("sgw", "Serving gateway"),
    ("pgw", "Packet gateway"),
    ("ims", "IMS core"),
    ("fw", "Firewall"),
    ("dpi", "Deep packet inspection"),
    ("nat", "Carrier NAT"),
    ("ids", "Intrusion detection"),
    ("proxy", "Web proxy"),
];

/// Synthetic class-to-chain assignment with optional latency bound (ms).
pub const CLASSES: [(&str, [&str; 3], Option<f64>); 4] = [
    ("voice", ["sgw", "pgw", "ims"], Some(80.0)),
    ("video", ["sgw", "pgw", "fw"], None),
    ("roaming", ["sgw", "dpi", "nat"], None),
    ("m2m", ["ids", "proxy", "pgw"], None),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadParams {
    pub seed: u64,
    pub variability: VariabilityModel,
    /// Sum of the class volumes before variability, in Mbps.
    pub total_volume: f64,
    pub epochs: usize,
    pub preset: String,
    pub policy: Policy,
    /// Number of most populous nodes offered for in-network platforms.
    pub sites: usize,
    pub ingress_egress_latency: bool,
}

impl Default for WorkloadParams {
    fn default() -> Self {
        WorkloadParams::seeded(2014)
    }
}

impl WorkloadParams {
    /// Defaults with jitter of ±20% drawn from `seed`.
    pub fn seeded(seed: u64) -> Self {
        WorkloadParams {
            seed,
            variability: VariabilityModel::UniformJitter { alpha: 0.2, seed },
            total_volume: 1500.0,
            epochs: 4,
            preset: "paper-2014".into(),
            policy: Policy::FullHybrid,
            sites: 3,
            ingress_egress_latency: true,
        }
    }
}

pub fn paper_workload() -> Scenario {
    paper_workload_with(&WorkloadParams::default()).expect("default workload builds")
}

/// The top `k` origin-destination pairs by gravity volume, skipping the
/// reverse of a pair already taken.
fn top_pairs(topology: &TopologySpec, k: usize) -> Result<Vec<(String, String, f64)>> {
    let pops: Vec<(String, f64)> = topology.nodes.iter().map(|n| (n.id.clone(), n.population)).collect();
    let mut od: Vec<(usize, super::traffic::OdVolume)> = gravity_traffic(&pops, 1.0)?
        .into_iter()
        .enumerate()
        .filter(|(_, o)| o.from != o.to)
        .collect();
    od.sort_by(|a, b| b.1.volume.total_cmp(&a.1.volume).then(a.0.cmp(&b.0)));
    let mut taken: Vec<(String, String, f64)> = Vec::new();
    for (_, o) in od {
        if taken.len() == k {
            break;
        }
        if !taken.iter().any(|(a, b, _)| *a == o.to && *b == o.from) {
            taken.push((o.from, o.to, o.volume));
        }
    }
    if taken.len() < k {
        return Err(Error::Argument(format!("topology has fewer than {k} node pairs")));
    }
    Ok(taken)
}

pub fn paper_workload_with(params: &WorkloadParams) -> Result<Scenario> {
    if params.epochs == 0 {
        return Err(Error::Argument("epochs must be at least 1".into()));
    }
    let mut topology = TopologySpec::abilene();
    topology.network_sites = Some(topology.most_populous(params.sites));
    let preset = preset_costs(&params.preset)?;
    let pairs = top_pairs(&topology, CLASSES.len())?;
    let weight: f64 = pairs.iter().map(|p| p.2).sum();
    let base: Vec<Vec<f64>> = pairs
        .iter()
        .map(|p| vec![params.total_volume * p.2 / weight; params.epochs])
        .collect();
    let volumes = apply_variability(&base, &params.variability)?;
    let classes = CLASSES
        .iter()
        .zip(pairs)
        .zip(volumes)
        .map(|(((id, chain, pc), (from, to, _)), volumes)| TrafficClass {
            id: id.to_string(),
            chain: ServiceChain::new(chain.iter().copied()),
            volumes,
            latency_threshold: *pc,
            ingress: Some(from),
            egress: Some(to),
        })
        .collect();
    let nfs = CATALOG
        .iter()
        .map(|(id, name)| NetworkFunction {
            id: id.to_string(),
            name: name.to_string(),
        })
        .collect();
    let catalog: Vec<String> = CATALOG.iter().map(|(id, _)| id.to_string()).collect();
    let instances = make_candidates(&topology, &catalog, params.policy, &preset)?;
    let mut s = assemble(&topology, instances, nfs, classes, &preset, params.epochs);
    s.options.include_ingress_egress_latency = params.ingress_egress_latency;
    if s.options.include_ingress_egress_latency {
        add_leg_latency(&mut s, &topology);
    }
    Ok(s)
}

/// Builds a scenario with unit footprints, preset prices, and stage latency
/// taken from topology paths. Ingress/egress legs are left off.
pub fn assemble(
    topology: &TopologySpec,
    instances: Vec<PlatformInstance>,
    nfs: Vec<NetworkFunction>,
    classes: Vec<TrafficClass>,
    preset: &CostPreset,
    epochs: usize,
) -> Scenario {
    let used: BTreeSet<&str> = classes
        .iter()
        .flat_map(|c| c.ingress.iter().chain(c.egress.iter()))
        .map(String::as_str)
        .collect();
    let locations = topology
        .nodes
        .iter()
        .map(|n| Location {
            id: n.id.clone(),
            name: n.name.clone(),
            population: Some(n.population),
            is_ingress: classes.iter().any(|c| c.ingress.as_deref() == Some(n.id.as_str())),
            is_egress: classes.iter().any(|c| c.egress.as_deref() == Some(n.id.as_str())),
        })
        .filter(|l| {
            used.contains(l.id.as_str()) || instances.iter().any(|p| p.location == l.id)
        })
        .collect();
    let mut footprints = Vec::new();
    for c in &classes {
        for m in &c.chain.stages {
            for kind in PlatformKind::ALL {
                if instances.iter().any(|p| p.kind() == kind && p.hosts(m)) {
                    footprints.push(Footprint {
                        class: c.id.clone(),
                        nf: m.clone(),
                        kind,
                        fp: 1.0,
                    });
                }
            }
        }
    }
    let mut costs: Vec<CostEntry> = Vec::new();
    for p in &instances {
        if !costs.iter().any(|c| c.location == p.location && c.kind == p.kind()) {
            let k = preset.for_kind(p.kind());
            costs.push(CostEntry {
                location: p.location.clone(),
                kind: p.kind(),
                fixed: k.fixed,
                var: k.var,
                elas: k.elas,
            });
        }
    }
    let paths = topology.path_latency();
    let mut pairs = BTreeSet::new();
    for c in &classes {
        for w in c.chain.stages.windows(2) {
            for (i, p) in instances.iter().enumerate().filter(|(_, p)| p.hosts(&w[0])) {
                for (j, q) in instances.iter().enumerate().filter(|(_, q)| q.hosts(&w[1])) {
                    if p.id != q.id {
                        pairs.insert((i, j));
                    }
                }
            }
        }
    }
    let latency = pairs
        .into_iter()
        .map(|(i, j)| LatencyEntry {
            from: instances[i].id.clone(),
            to: instances[j].id.clone(),
            ms: paths.get(&instances[i].location, &instances[j].location).unwrap_or(f64::MAX),
            leg: Leg::Stage,
        })
        .collect();
    Scenario {
        format: SCENARIO_FORMAT.into(),
        locations,
        instances,
        nfs,
        classes,
        footprints,
        costs,
        latency,
        epochs,
        options: ScenarioOptions::default(),
    }
}

/// Adds ingress and egress legs for every class from topology paths.
pub fn add_leg_latency(s: &mut Scenario, topology: &TopologySpec) {
    let paths = topology.path_latency();
    let mut seen = BTreeSet::new();
    for c in &s.classes {
        let (Some(first), Some(last)) = (c.chain.stages.first(), c.chain.stages.last()) else {
            continue;
        };
        for p in &s.instances {
            if let Some(loc) = c.ingress.as_ref().filter(|_| p.hosts(first)) {
                if seen.insert((Leg::Ingress, loc.clone(), p.id.clone())) {
                    s.latency.push(LatencyEntry {
                        from: loc.clone(),
                        to: p.id.clone(),
                        ms: paths.get(loc, &p.location).unwrap_or(f64::MAX),
                        leg: Leg::Ingress,
                    });
                }
            }
            if let Some(loc) = c.egress.as_ref().filter(|_| p.hosts(last)) {
                if seen.insert((Leg::Egress, p.id.clone(), loc.clone())) {
                    s.latency.push(LatencyEntry {
                        from: p.id.clone(),
                        to: loc.clone(),
                        ms: paths.get(&p.location, loc).unwrap_or(f64::MAX),
                        leg: Leg::Egress,
                    });
                }
            }
        }
    }
}

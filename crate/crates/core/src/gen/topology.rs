//! `nfv-topology/1` files and all-pairs path latency.

use std::collections::{HashMap, HashSet};

use petgraph::algo::floyd_warshall;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOPOLOGY_FORMAT: &str = "nfv-topology/1";

const ABILENE: &str = include_str!("../../data/abilene.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopoNode {
    pub id: String,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    pub population: f64,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopoEdge {
    pub from: String,
    pub to: String,
    pub ms: f64,
    /// When false the edge only sets the `from -> to` direction.
    #[serde(default = "yes")]
    pub symmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub format: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub nodes: Vec<TopoNode>,
    pub edges: Vec<TopoEdge>,
    /// Nodes hosting a cloud datacenter.
    pub cloud_sites: Vec<String>,
    /// Nodes where in-network platforms may be placed; all nodes if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network_sites: Option<Vec<String>>,
}

impl TopologySpec {
    /// The bundled 11-node Abilene backbone.
    pub fn abilene() -> TopologySpec {
        TopologySpec::from_json(ABILENE).expect("bundled topology parses")
    }

    pub fn from_json(text: &str) -> Result<TopologySpec> {
        let t: TopologySpec = serde_json::from_str(text)?;
        t.check()?;
        Ok(t)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<TopologySpec> {
        TopologySpec::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Argument(format!("topology {}: {msg}", self.name)));
        if self.format != TOPOLOGY_FORMAT {
            return bad(format!("format must be `{TOPOLOGY_FORMAT}`"));
        }
        let mut ids = HashSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return bad(format!("duplicate node `{}`", n.id));
            }
            if !(n.population.is_finite() && n.population >= 0.0) {
                return bad(format!("node `{}` has population {}", n.id, n.population));
            }
        }
        for e in &self.edges {
            if !ids.contains(e.from.as_str()) || !ids.contains(e.to.as_str()) {
                return bad(format!("edge `{}`-`{}` references an unknown node", e.from, e.to));
            }
            if !(e.ms.is_finite() && e.ms >= 0.0) {
                return bad(format!("edge `{}`-`{}` has latency {}", e.from, e.to, e.ms));
            }
        }
        for site in self.cloud_sites.iter().chain(self.network_sites.iter().flatten()) {
            if !ids.contains(site.as_str()) {
                return bad(format!("site `{site}` is not a node"));
            }
        }
        Ok(())
    }

    pub fn network_sites(&self) -> Vec<String> {
        match &self.network_sites {
            Some(sites) => sites.clone(),
            None => self.nodes.iter().map(|n| n.id.clone()).collect(),
        }
    }

    /// The `k` most populous nodes, ties broken by node order.
    pub fn most_populous(&self, k: usize) -> Vec<String> {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| self.nodes[b].population.total_cmp(&self.nodes[a].population).then(a.cmp(&b)));
        order.into_iter().take(k).map(|i| self.nodes[i].id.clone()).collect()
    }

    /// Shortest-path latency between every pair of nodes.
    pub fn path_latency(&self) -> LatencyTable {
        let mut graph = DiGraph::<(), f64>::new();
        let idx: Vec<NodeIndex> = self.nodes.iter().map(|_| graph.add_node(())).collect();
        let pos: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let mut direct: HashMap<(usize, usize), f64> = HashMap::new();
        for e in &self.edges {
            let (a, b) = (pos[e.from.as_str()], pos[e.to.as_str()]);
            direct.insert((a, b), e.ms);
            if e.symmetric {
                direct.insert((b, a), e.ms);
            }
        }
        let mut pairs: Vec<_> = direct.into_iter().collect();
        pairs.sort_by_key(|&(k, _)| k);
        for ((a, b), ms) in pairs {
            graph.add_edge(idx[a], idx[b], ms);
        }
        let dist = floyd_warshall(&graph, |e| *e.weight()).expect("latencies are nonnegative");
        let n = self.nodes.len();
        let mut ms = vec![vec![f64::INFINITY; n]; n];
        for (a, row) in ms.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                if a == b {
                    *cell = 0.0;
                } else if let Some(&d) = dist.get(&(idx[a], idx[b])) {
                    if d < f64::MAX / 2.0 {
                        *cell = d;
                    }
                }
            }
        }
        LatencyTable {
            ids: self.nodes.iter().map(|n| n.id.clone()).collect(),
            ms,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LatencyTable {
    ids: Vec<String>,
    ms: Vec<Vec<f64>>,
}

impl LatencyTable {
    /// Path latency in ms, `None` for unknown nodes or no path.
    pub fn get(&self, from: &str, to: &str) -> Option<f64> {
        let a = self.ids.iter().position(|i| i == from)?;
        let b = self.ids.iter().position(|i| i == to)?;
        Some(self.ms[a][b]).filter(|v| v.is_finite())
    }
}

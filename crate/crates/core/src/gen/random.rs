//! Small random scenarios for cross-checking the exact solver.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::*;

#[derive(Debug, Clone, Copy)]
pub struct RandomParams {
    pub max_instances: usize,
    pub max_classes: usize,
    pub max_epochs: usize,
    pub max_nfs: usize,
    pub max_locations: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            max_instances: 10,
            max_classes: 3,
            max_epochs: 4,
            max_nfs: 3,
            max_locations: 3,
        }
    }
}

/// A valid scenario drawn from `seed`. It may still be infeasible through
/// capacity or latency bounds.
pub fn random_scenario(seed: u64, params: &RandomParams) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_loc = rng.random_range(1..=params.max_locations);
    let n_nf = rng.random_range(1..=params.max_nfs);
    let epochs = rng.random_range(1..=params.max_epochs);
    let n_inst = rng.random_range(2..=params.max_instances.max(2));
    let locations: Vec<Location> = (0..n_loc)
        .map(|i| Location {
            id: format!("s{i}"),
            name: format!("Site {i}"),
            population: None,
            is_ingress: false,
            is_egress: false,
        })
        .collect();
    let nf_ids: Vec<String> = (0..n_nf).map(|i| format!("nf{i}")).collect();

    let mut instances = Vec::with_capacity(n_inst);
    for i in 0..n_inst {
        let kind = if i == 0 {
            PlatformKind::FlexHw
        } else {
            PlatformKind::ALL[rng.random_range(0..3)]
        };
        let supported: Vec<String> = match kind {
            PlatformKind::Dedicated => vec![nf_ids[rng.random_range(0..n_nf)].clone()],
            PlatformKind::FlexHw if i > 0 => {
                let subset: Vec<String> = nf_ids.iter().filter(|_| rng.random_bool(0.7)).cloned().collect();
                if subset.is_empty() {
                    nf_ids.clone()
                } else {
                    subset
                }
            }
            _ => nf_ids.clone(),
        };
        instances.push(PlatformInstance {
            id: format!("p{i}"),
            location: locations[rng.random_range(0..n_loc)].id.clone(),
            ptype: PlatformType {
                kind,
                supported_nfs: supported,
                elastic: kind == PlatformKind::Cloud,
            },
            capacity: rng.random_range(5.0..40.0),
        });
    }

    let n_class = rng.random_range(1..=params.max_classes);
    let legs = rng.random_bool(0.3);
    let mut classes = Vec::with_capacity(n_class);
    for c in 0..n_class {
        let mut order = nf_ids.clone();
        order.shuffle(&mut rng);
        order.truncate(rng.random_range(1..=n_nf));
        let volumes = (0..epochs)
            .map(|_| if rng.random_bool(0.15) { 0.0 } else { rng.random_range(0.5..10.0) })
            .collect();
        let threshold = rng.random_bool(0.4).then(|| rng.random_range(5.0..40.0));
        let mut pick_loc = || legs.then(|| locations[rng.random_range(0..n_loc)].id.clone());
        classes.push(TrafficClass {
            id: format!("c{c}"),
            chain: ServiceChain { stages: order },
            volumes,
            latency_threshold: threshold,
            ingress: pick_loc(),
            egress: pick_loc(),
        });
    }

    let mut footprints = Vec::new();
    for c in &classes {
        for m in &c.chain.stages {
            for kind in PlatformKind::ALL {
                if instances.iter().any(|p| p.kind() == kind && p.hosts(m)) {
                    footprints.push(Footprint {
                        class: c.id.clone(),
                        nf: m.clone(),
                        kind,
                        fp: rng.random_range(0.5..2.0),
                    });
                }
            }
        }
    }
    let mut costs = Vec::new();
    for l in &locations {
        for kind in PlatformKind::ALL {
            costs.push(CostEntry {
                location: l.id.clone(),
                kind,
                fixed: rng.random_range(0.0..30.0),
                var: rng.random_range(0.0..5.0),
                elas: if kind == PlatformKind::Cloud { rng.random_range(0.0..6.0) } else { 0.0 },
            });
        }
    }
    let mut latency = Vec::new();
    for p in &instances {
        for q in &instances {
            if p.id != q.id {
                latency.push(LatencyEntry {
                    from: p.id.clone(),
                    to: q.id.clone(),
                    ms: rng.random_range(0.0..20.0),
                    leg: Leg::Stage,
                });
            }
        }
    }
    if legs {
        for l in &locations {
            for p in &instances {
                latency.push(LatencyEntry {
                    from: l.id.clone(),
                    to: p.id.clone(),
                    ms: rng.random_range(0.0..10.0),
                    leg: Leg::Ingress,
                });
                latency.push(LatencyEntry {
                    from: p.id.clone(),
                    to: l.id.clone(),
                    ms: rng.random_range(0.0..10.0),
                    leg: Leg::Egress,
                });
            }
        }
    }
    Scenario {
        format: SCENARIO_FORMAT.into(),
        locations,
        instances,
        nfs: nf_ids
            .iter()
            .map(|id| NetworkFunction {
                id: id.clone(),
                name: id.to_uppercase(),
            })
            .collect(),
        classes,
        footprints,
        costs,
        latency,
        epochs,
        options: ScenarioOptions {
            include_ingress_egress_latency: legs,
            static_routing: rng.random_bool(0.2),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_scenarios_validate_within_limits() {
        let params = RandomParams::default();
        for seed in 0..200 {
            let s = random_scenario(seed, &params);
            assert_eq!(validate(&s), vec![], "seed {seed}");
            assert!(s.instances.len() <= 10 && s.classes.len() <= 3 && s.epochs <= 4);
        }
    }

    #[test]
    fn seeded() {
        let p = RandomParams::default();
        assert_eq!(random_scenario(5, &p), random_scenario(5, &p));
        assert_ne!(random_scenario(5, &p), random_scenario(6, &p));
    }
}

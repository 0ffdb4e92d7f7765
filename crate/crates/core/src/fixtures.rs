//! Small hand-built scenarios with known optimal costs. The repository's
//! `fixtures/` directory holds their JSON form.

use crate::model::*;

/// Capacity large enough never to bind in the toy scenarios.
const TOY_CAPACITY: f64 = 1000.0;

fn location(id: &str, name: &str) -> Location {
    Location {
        id: id.into(),
        name: name.into(),
        population: None,
        is_ingress: false,
        is_egress: false,
    }
}

fn instance(id: &str, location: &str, kind: PlatformKind, nfs: &[&str]) -> PlatformInstance {
    PlatformInstance {
        id: id.into(),
        location: location.into(),
        ptype: PlatformType {
            kind,
            supported_nfs: nfs.iter().map(|m| m.to_string()).collect(),
            elastic: kind == PlatformKind::Cloud,
        },
        capacity: TOY_CAPACITY,
    }
}

fn nf(id: &str, name: &str) -> NetworkFunction {
    NetworkFunction {
        id: id.into(),
        name: name.into(),
    }
}

fn class(id: &str, chain: &[&str], volumes: &[f64]) -> TrafficClass {
    TrafficClass {
        id: id.into(),
        chain: ServiceChain::new(chain.iter().copied()),
        volumes: volumes.to_vec(),
        latency_threshold: None,
        ingress: None,
        egress: None,
    }
}

fn cost(location: &str, kind: PlatformKind, fixed: f64, var: f64, elas: f64) -> CostEntry {
    CostEntry {
        location: location.into(),
        kind,
        fixed,
        var,
        elas,
    }
}

fn latency(from: &str, to: &str, ms: f64, leg: Leg) -> LatencyEntry {
    LatencyEntry {
        from: from.into(),
        to: to.into(),
        ms,
        leg,
    }
}

/// Unit footprint for every (class, nf, kind) some instance can host.
fn unit_footprints(s: &Scenario) -> Vec<Footprint> {
    let mut out = Vec::new();
    for c in &s.classes {
        for m in &c.chain.stages {
            for kind in PlatformKind::ALL {
                if s.instances.iter().any(|p| p.kind() == kind && p.hosts(m)) {
                    out.push(Footprint {
                        class: c.id.clone(),
                        nf: m.clone(),
                        kind,
                        fp: 1.0,
                    });
                }
            }
        }
    }
    out
}

fn scenario(
    locations: Vec<Location>,
    instances: Vec<PlatformInstance>,
    nfs: Vec<NetworkFunction>,
    classes: Vec<TrafficClass>,
    costs: Vec<CostEntry>,
    latency: Vec<LatencyEntry>,
    epochs: usize,
) -> Scenario {
    let mut s = Scenario {
        format: SCENARIO_FORMAT.into(),
        locations,
        instances,
        nfs,
        classes,
        footprints: Vec::new(),
        costs,
        latency,
        epochs,
        options: ScenarioOptions::default(),
    };
    s.footprints = unit_footprints(&s);
    s
}

/// One video class with a burst in epoch 3, served by an in-network
/// server at 20 per unit or the cloud at 10 per unit-epoch. Routing is
/// static: the whole chain is placed once for all epochs.
pub fn sec2_video() -> Scenario {
    let mut s = scenario(
        vec![location("L1", "In-network site"), location("DC", "Cloud datacenter")],
        vec![
            instance("flex-L1", "L1", PlatformKind::FlexHw, &["video-chain"]),
            instance("cloud", "DC", PlatformKind::Cloud, &["video-chain"]),
        ],
        vec![nf("video-chain", "Video chain (SGW-PGW-FW)")],
        vec![class("video", &["video-chain"], &[1.0, 1.0, 10.0, 1.0])],
        vec![
            cost("L1", PlatformKind::FlexHw, 0.0, 20.0, 0.0),
            cost("DC", PlatformKind::Cloud, 0.0, 0.0, 10.0),
        ],
        Vec::new(),
        4,
    );
    s.options.static_routing = true;
    s
}

/// [`sec2_video`] without the cloud candidate.
pub fn sec2_video_forced_flex() -> Scenario {
    sec2_video().restricted_to(&[PlatformKind::FlexHw])
}

/// Video plus a latency-sensitive voice class, routed per epoch. Ingress
/// and egress legs are on: 50 ms each way to the in-network site, 60 ms each
/// way to the cloud. The in-network path sits exactly on the 100 ms voice
/// bound, so any cloud share of voice breaks the average.
pub fn sec2_combined(voice_sla: bool) -> Scenario {
    let mut voice = class("voice", &["voice-chain"], &[5.0, 5.0, 10.0, 5.0]);
    voice.latency_threshold = voice_sla.then_some(100.0);
    let mut video = class("video", &["video-chain"], &[1.0, 1.0, 10.0, 1.0]);
    for c in [&mut voice, &mut video] {
        c.ingress = Some("in".into());
        c.egress = Some("out".into());
    }
    let mut ingress = location("in", "Ingress");
    ingress.is_ingress = true;
    let mut egress = location("out", "Egress");
    egress.is_egress = true;
    let instances = vec![
        instance("flex-L1", "L1", PlatformKind::FlexHw, &["video-chain", "voice-chain"]),
        instance("ded-video-L1", "L1", PlatformKind::Dedicated, &["video-chain"]),
        instance("ded-voice-L1", "L1", PlatformKind::Dedicated, &["voice-chain"]),
        instance("cloud", "DC", PlatformKind::Cloud, &["video-chain", "voice-chain"]),
    ];
    let mut lat = Vec::new();
    for p in &instances {
        let ms = if p.kind() == PlatformKind::Cloud { 60.0 } else { 50.0 };
        lat.push(latency("in", &p.id, ms, Leg::Ingress));
        lat.push(latency(&p.id, "out", ms, Leg::Egress));
    }
    let mut s = scenario(
        vec![ingress, egress, location("L1", "In-network site"), location("DC", "Cloud datacenter")],
        instances,
        vec![
            nf("video-chain", "Video chain (SGW-PGW-FW)"),
            nf("voice-chain", "Voice chain (SGW-PGW-IMS)"),
        ],
        vec![video, voice],
        vec![
            cost("L1", PlatformKind::Dedicated, 0.0, 20.0, 0.0),
            cost("L1", PlatformKind::FlexHw, 0.0, 20.0, 0.0),
            cost("DC", PlatformKind::Cloud, 0.0, 0.0, 10.0),
        ],
        lat,
        4,
    );
    s.options.include_ingress_egress_latency = true;
    s
}

/// Two-stage chain whose only path takes 150 ms against a 100 ms bound.
pub fn infeasible_latency() -> Scenario {
    let mut flow = class("flow", &["a", "b"], &[1.0, 1.0]);
    flow.latency_threshold = Some(100.0);
    scenario(
        vec![location("L1", "Site 1"), location("L2", "Site 2")],
        vec![
            instance("ded-a", "L1", PlatformKind::Dedicated, &["a"]),
            instance("ded-b", "L2", PlatformKind::Dedicated, &["b"]),
        ],
        vec![nf("a", "A"), nf("b", "B")],
        vec![flow],
        vec![
            cost("L1", PlatformKind::Dedicated, 1.0, 1.0, 0.0),
            cost("L2", PlatformKind::Dedicated, 1.0, 1.0, 0.0),
        ],
        vec![latency("ded-a", "ded-b", 150.0, Leg::Stage)],
        2,
    )
}

/// [`sec2_combined`] without the voice bound and with every volume zero.
pub fn zero_traffic() -> Scenario {
    let mut s = sec2_combined(false);
    for c in &mut s.classes {
        c.volumes.iter_mut().for_each(|v| *v = 0.0);
    }
    s
}

/// File stem and scenario for every fixture shipped in `fixtures/`.
pub fn all() -> Vec<(&'static str, Scenario)> {
    vec![
        ("sec2-video", sec2_video()),
        ("sec2-video-flex", sec2_video_forced_flex()),
        ("sec2-combined", sec2_combined(true)),
        ("sec2-combined-nosla", sec2_combined(false)),
        ("infeasible-latency", infeasible_latency()),
        ("zero-traffic", zero_traffic()),
    ]
}

//! Candidate platform instances for each deployment model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::presets::CostPreset;
use super::topology::TopologySpec;
use crate::error::{Error, Result};
use crate::model::{PlatformInstance, PlatformKind, PlatformType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    FullHybrid,
    SingleOnly,
    FlexOnly,
    CloudOnly,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::SingleOnly, Policy::FlexOnly, Policy::CloudOnly, Policy::FullHybrid];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::FullHybrid => "full-hybrid",
            Policy::SingleOnly => "single-only",
            Policy::FlexOnly => "flex-only",
            Policy::CloudOnly => "cloud-only",
        }
    }

    /// Platform kinds the policy may deploy.
    pub fn kinds(self) -> &'static [PlatformKind] {
        match self {
            Policy::FullHybrid => &PlatformKind::ALL,
            Policy::SingleOnly => &[PlatformKind::Dedicated],
            Policy::FlexOnly => &[PlatformKind::FlexHw],
            Policy::CloudOnly => &[PlatformKind::Cloud],
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Policy> {
        Policy::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown policy `{s}`")))
    }
}

/// Per network site one FlexHW box hosting the whole catalog and one
/// Dedicated box per NF; one Cloud instance per cloud site. Policies keep
/// the subset of kinds they allow.
pub fn make_candidates(
    topology: &TopologySpec,
    catalog: &[String],
    policy: Policy,
    preset: &CostPreset,
) -> Result<Vec<PlatformInstance>> {
    if policy == Policy::CloudOnly && topology.cloud_sites.is_empty() {
        return Err(Error::Argument(format!("topology {} has no cloud site", topology.name)));
    }
    let kinds = policy.kinds();
    let make = |id: String, location: &str, kind: PlatformKind, nfs: Vec<String>| PlatformInstance {
        id,
        location: location.to_string(),
        ptype: PlatformType {
            kind,
            supported_nfs: nfs,
            elastic: kind == PlatformKind::Cloud,
        },
        capacity: preset.for_kind(kind).capacity,
    };
    let mut out = Vec::new();
    for site in topology.network_sites() {
        if kinds.contains(&PlatformKind::FlexHw) {
            out.push(make(format!("flex-{site}"), &site, PlatformKind::FlexHw, catalog.to_vec()));
        }
        if kinds.contains(&PlatformKind::Dedicated) {
            for m in catalog {
                out.push(make(format!("ded-{m}-{site}"), &site, PlatformKind::Dedicated, vec![m.clone()]));
            }
        }
    }
    if kinds.contains(&PlatformKind::Cloud) {
        for site in &topology.cloud_sites {
            out.push(make(format!("cloud-{site}"), site, PlatformKind::Cloud, catalog.to_vec()));
        }
    }
    Ok(out)
}

//! Versioned cost presets shipped under `presets/`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PlatformKind;

pub const PRESET_FORMAT: &str = "nfv-preset/1";

const BUNDLED: [(&str, &str); 2] = [
    ("paper-2014", include_str!("../../presets/paper-2014.json")),
    ("toy-sec2", include_str!("../../presets/toy-sec2.json")),
];

/// Bytes per GB over bits per megabit: 1 Mbps for one second is 1/8000 GB.
const GB_PER_MBPS_SECOND: f64 = 1.0 / 8000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindCost {
    pub fixed: f64,
    pub var: f64,
    pub elas: f64,
    pub capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Appliance {
    pub price: f64,
    pub throughput_mbps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgressTier {
    pub tb: f64,
    pub usd_per_gb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudPricing {
    pub egress_tiers: Vec<EgressTier>,
    pub monthly_volume_tb: f64,
    pub epoch_hours: f64,
    pub capacity_mbps: f64,
}

impl CloudPricing {
    /// Average $/GB when `monthly_volume_tb` is billed through the tiers;
    /// volume past the last tier pays the last tier's price.
    pub fn blended_usd_per_gb(&self) -> f64 {
        let mut left = self.monthly_volume_tb;
        let mut usd = 0.0;
        for tier in &self.egress_tiers {
            let here = left.min(tier.tb);
            usd += here * 1000.0 * tier.usd_per_gb;
            left -= here;
        }
        if let Some(last) = self.egress_tiers.last() {
            usd += left * 1000.0 * last.usd_per_gb;
        }
        usd / (self.monthly_volume_tb * 1000.0)
    }

    pub fn gb_per_mbps_epoch(&self) -> f64 {
        self.epoch_hours * 3600.0 * GB_PER_MBPS_SECOND
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PresetSource {
    /// Costs derived from equipment prices and cloud transfer pricing.
    Equipment {
        opex_multiplier: f64,
        dedicated: Appliance,
        flexhw: Appliance,
        cloud: CloudPricing,
    },
    /// Costs given directly per platform kind.
    Direct {
        dedicated: KindCost,
        flexhw: KindCost,
        cloud: KindCost,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetFile {
    pub format: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(flatten)]
    pub source: PresetSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostPreset {
    pub name: String,
    pub dedicated: KindCost,
    pub flexhw: KindCost,
    pub cloud: KindCost,
}

impl CostPreset {
    pub fn for_kind(&self, kind: PlatformKind) -> KindCost {
        match kind {
            PlatformKind::Dedicated => self.dedicated,
            PlatformKind::FlexHw => self.flexhw,
            PlatformKind::Cloud => self.cloud,
        }
    }
}

impl PresetFile {
    pub fn from_json(text: &str) -> Result<PresetFile> {
        let p: PresetFile = serde_json::from_str(text)?;
        if p.format != PRESET_FORMAT {
            return Err(Error::Argument(format!("preset format must be `{PRESET_FORMAT}`")));
        }
        Ok(p)
    }

    pub fn costs(&self) -> CostPreset {
        let (dedicated, flexhw, cloud) = match &self.source {
            PresetSource::Direct { dedicated, flexhw, cloud } => (*dedicated, *flexhw, *cloud),
            PresetSource::Equipment {
                opex_multiplier,
                dedicated,
                flexhw,
                cloud,
            } => {
                let box_cost = |a: &Appliance| KindCost {
                    fixed: opex_multiplier * a.price,
                    var: a.price / a.throughput_mbps,
                    elas: 0.0,
                    capacity: a.throughput_mbps,
                };
                (
                    box_cost(dedicated),
                    box_cost(flexhw),
                    KindCost {
                        fixed: 0.0,
                        var: 0.0,
                        elas: cloud.blended_usd_per_gb() * cloud.gb_per_mbps_epoch(),
                        capacity: cloud.capacity_mbps,
                    },
                )
            }
        };
        CostPreset {
            name: self.name.clone(),
            dedicated,
            flexhw,
            cloud,
        }
    }
}

pub fn preset_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn preset_file(name: &str) -> Result<PresetFile> {
    let text = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Argument(format!("unknown preset `{name}`; known: {}", preset_names().join(", "))))?;
    PresetFile::from_json(text)
}

pub fn preset_costs(name: &str) -> Result<CostPreset> {
    Ok(preset_file(name)?.costs())
}

//! Scenario generators: topology, traffic, cost presets, candidates.

pub mod candidates;
pub mod presets;
pub mod random;
pub mod topology;
pub mod traffic;
pub mod workload;

pub use candidates::{make_candidates, Policy};
pub use presets::{preset_costs, preset_file, preset_names, CostPreset, KindCost, PresetFile};
pub use random::{random_scenario, RandomParams};
pub use topology::{LatencyTable, TopologySpec};
pub use traffic::{apply_variability, gravity_traffic, OdVolume, TrafficMatrix, VariabilityModel};
pub use workload::{paper_workload, paper_workload_with, WorkloadParams};

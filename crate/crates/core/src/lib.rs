//! NFV deployment planning: scenario model, the provisioning program,
//! scenario generators and what-if analysis.

pub mod analysis;
pub mod error;
pub mod fixtures;
pub mod formulation;
pub mod gen;
pub mod model;

pub use error::{Error, Result};

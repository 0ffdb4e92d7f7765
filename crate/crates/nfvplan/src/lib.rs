//! Command line and HTTP front ends over `nfvplan-core`.

pub mod cli;
pub mod jobs;
pub mod server;
pub mod store;

//! Command-line orchestration for the actor-concepts engine: input digests,
//! run manifests and the `validate`, `cluster`, `baseline` and `compare`
//! subcommands.

pub mod commands;
pub mod inputs;
pub mod manifest;
pub mod output;

pub use commands::{
    baseline, cluster, compare, validate, BaselineReport, ClusterOutcome, ClusterRequest,
    Comparison, ValidationReport,
};
pub use inputs::{FileDigest, InputPaths, Inputs};
pub use manifest::RunManifest;

//! Run manifest: what went in, what came out, and how long it took.

use std::collections::BTreeMap;

use actor_concepts::pipeline::{StageCounts, StageTiming};
use actor_concepts::PipelineConfig;
use serde::{Deserialize, Serialize};

use crate::inputs::{sha256_hex, FileDigest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusions {
    /// RPs without any token in the embedding store.
    pub unembeddable_rps: Vec<String>,
    /// RPs whose head has no vector.
    pub headless_rps: Vec<String>,
}

/// Everything that must be equal between two runs on the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproducible {
    pub engine_version: String,
    pub inputs: BTreeMap<String, FileDigest>,
    pub config: PipelineConfig,
    pub counts: StageCounts,
    pub exclusions: Exclusions,
    /// Output file name to sha256.
    pub outputs: BTreeMap<String, String>,
}

impl Reproducible {
    /// sha256 over the compact JSON encoding.
    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("manifest serializes"))
    }
}

/// Wall-clock data; excluded from the reproducibility digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub threads: usize,
    pub stages: Vec<StageTiming>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub run: Reproducible,
    pub reproducibility_digest: String,
    pub timing: Timing,
}

impl RunManifest {
    pub fn new(run: Reproducible, timing: Timing) -> Self {
        let reproducibility_digest = run.digest();
        Self {
            run,
            reproducibility_digest,
            timing,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

//! Reading the engine inputs while keeping a digest of the exact bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use actor_concepts::ingest::{parse_embeddings, parse_mentions, parse_relations};
use actor_concepts::{EmbeddingStore, Mention, NeRelation, PipelineConfig};
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Paths of one run's inputs as given on the command line.
#[derive(Debug, Clone, Default)]
pub struct InputPaths {
    pub mentions: PathBuf,
    pub embeddings: PathBuf,
    pub relations: Option<PathBuf>,
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// File name only, so that digests compare across directories.
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A file's bytes and their digest.
pub struct RawFile {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
    pub digest: FileDigest,
}

pub fn read_raw(path: &Path) -> Result<RawFile> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let digest = FileDigest {
        file: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        bytes: bytes.len() as u64,
        sha256: sha256_hex(&bytes),
    };
    Ok(RawFile {
        path: path.to_path_buf(),
        bytes,
        digest,
    })
}

/// Reads and validates the config, or falls back to the defaults.
pub fn read_config(path: Option<&Path>) -> Result<(PipelineConfig, Option<FileDigest>)> {
    let Some(path) = path else {
        return Ok((PipelineConfig::default(), None));
    };
    let raw = read_raw(path)?;
    let text = std::str::from_utf8(&raw.bytes)
        .with_context(|| format!("{}: not UTF-8", path.display()))?;
    let cfg = PipelineConfig::from_json(text).with_context(|| path.display().to_string())?;
    Ok((cfg, Some(raw.digest)))
}

/// Fully parsed inputs of a run.
pub struct Inputs {
    pub mentions: Vec<Mention>,
    pub store: EmbeddingStore,
    pub relations: Vec<NeRelation>,
    pub config: PipelineConfig,
    /// Keyed by role: `mentions`, `embeddings`, `relations`, `config`.
    pub digests: BTreeMap<String, FileDigest>,
}

impl Inputs {
    /// Loads every input, failing on the first invalid record.
    pub fn load(paths: &InputPaths) -> Result<Self> {
        let mut digests = BTreeMap::new();
        let (config, cfg_digest) = read_config(paths.config.as_deref())?;
        if let Some(d) = cfg_digest {
            digests.insert("config".to_string(), d);
        }

        let raw = read_raw(&paths.mentions)?;
        let mentions =
            parse_mentions(raw.bytes.as_slice()).with_context(|| raw.path.display().to_string())?;
        digests.insert("mentions".to_string(), raw.digest);

        let raw = read_raw(&paths.embeddings)?;
        let loaded = parse_embeddings(raw.bytes.as_slice(), config.embedding_dim)
            .with_context(|| raw.path.display().to_string())?;
        digests.insert("embeddings".to_string(), raw.digest);

        let relations = match &paths.relations {
            Some(path) => {
                let raw = read_raw(path)?;
                let relations = parse_relations(raw.bytes.as_slice())
                    .with_context(|| raw.path.display().to_string())?;
                digests.insert("relations".to_string(), raw.digest);
                relations
            }
            None => Vec::new(),
        };

        Ok(Self {
            mentions,
            store: loaded.store,
            relations,
            config,
            digests,
        })
    }
}

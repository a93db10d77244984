//! Concept identification for mentions of groups of persons.
//!
//! Mentions extracted from a set of related news articles are collapsed into
//! representative phrases (RPs) and clustered in stages: cluster cores from
//! the most representative RPs, then bodies, borders, non-core clusters, and
//! a final merge over TF-IDF weighted cluster vectors. A named-entity grid
//! built from `SimilarTo` relations keeps phrases about different countries
//! or organizations apart and up-weights NE tokens of related phrases.
//!
//! ```no_run
//! use actor_concepts::{ingest, run_pipeline, PipelineConfig, ReportFormat};
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let cfg = PipelineConfig::default();
//! let mentions = ingest::load_mentions("mentions.jsonl".as_ref())?;
//! let store = ingest::load_embeddings("embeddings.tsv".as_ref(), cfg.embedding_dim)?.store;
//! let relations = ingest::load_relations("ne_relations.jsonl".as_ref())?;
//! let out = run_pipeline(&mentions, &store, &relations, &cfg)?;
//! print!("{}", actor_concepts::render_report(&out.clusters, &out.rps, &mentions, ReportFormat::Text));
//! # Ok(())
//! # }
//! ```

mod chains;
mod dsu;

pub mod baseline;
pub mod error;
pub mod ingest;
pub mod merge;
pub mod model;
pub mod negrid;
pub mod pipeline;
pub mod report;
pub mod similarity;
pub mod staged;

pub use baseline::{compare, hc_average_linkage, ComparisonReport, HcResult, Partition};
pub use error::{BaselineError, ConfigError, Error, IngestError, Result, SimilarityError};
pub use ingest::{ChainType, EmbeddingStore, NeRelation};
pub use model::{
    Cluster, ClusterKind, Component, ComponentRole, EntityType, Mention, NeComponent,
    PipelineConfig, RepresentativePhrase, RpId,
};
pub use negrid::{NeChain, NeGrid, PairWeight};
pub use pipeline::{run_pipeline, PipelineOutput, StageCounts, StageTrace};
pub use report::{render_report, ConceptReport, ReportFormat};
pub use similarity::{cosine, SimilarityBundle, SymMatrix};

/// Engine version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Six-stage orchestration over loaded inputs.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{derive_rps, EmbeddingStore, NeRelation};
use crate::merge::{merge_clusters, MergeOutcome};
use crate::model::{Cluster, Mention, PipelineConfig, RepresentativePhrase, RpId};
use crate::negrid::NeGrid;
use crate::similarity::{build_bundle, SimilarityBundle};
use crate::staged::{
    add_borders, collect_core_chains, form_bodies, form_noncore, or_threshold, ratio_matrix,
    resolve_conflicts, BodyCandidates, RatioMatrix,
};

/// Intermediate result of every stage, kept for inspection and testing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTrace {
    pub or_thr: f64,
    pub ratio: RatioMatrix,
    pub cores: Vec<BTreeSet<RpId>>,
    pub body_candidates: BodyCandidates,
    /// Cores with resolved bodies.
    pub bodies: Vec<Cluster>,
    /// Bodies with borders.
    pub staged: Vec<Cluster>,
    pub noncore: Vec<Cluster>,
    pub merge: MergeOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub rps: usize,
    pub core_rps: usize,
    pub cores: usize,
    pub body_members: usize,
    pub border_members: usize,
    pub noncore_clusters: usize,
    pub final_clusters: usize,
    pub unclustered_rps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub rps: Vec<RepresentativePhrase>,
    pub grid: NeGrid,
    pub bundle: SimilarityBundle,
    pub trace: StageTrace,
    /// Final clusters ordered by cluster_id.
    pub clusters: Vec<Cluster>,
    pub unclustered: BTreeSet<RpId>,
    pub timings: Vec<StageTiming>,
}

impl PipelineOutput {
    pub fn counts(&self) -> StageCounts {
        StageCounts {
            rps: self.rps.len(),
            core_rps: self.bundle.core_ids.len(),
            cores: self.trace.cores.len(),
            body_members: self.trace.bodies.iter().map(|c| c.body_members.len()).sum(),
            border_members: self
                .trace
                .staged
                .iter()
                .map(|c| c.border_members.len())
                .sum(),
            noncore_clusters: self.trace.noncore.len(),
            final_clusters: self.clusters.len(),
            unclustered_rps: self.unclustered.len(),
        }
    }
}

struct Clock {
    last: Instant,
    timings: Vec<StageTiming>,
}

impl Clock {
    fn new() -> Self {
        Self {
            last: Instant::now(),
            timings: Vec::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: (now - self.last).as_secs_f64(),
        });
        self.last = now;
    }
}

/// Runs preprocessing, cores, bodies, borders, non-core clusters and merging.
pub fn run_pipeline(
    mentions: &[Mention],
    store: &EmbeddingStore,
    relations: &[NeRelation],
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    if mentions.is_empty() {
        return Err(Error::NoMentions);
    }
    let cfg = cfg.clone().validate()?;
    let mut clock = Clock::new();

    let rps = derive_rps(mentions)?;
    let grid = NeGrid::from_relations(relations, cfg.wt);
    let bundle = build_bundle(&rps, store, &grid, &cfg)?;
    log::info!(
        "preprocessed {} RPs ({} core, {} unembeddable), {} NE chains",
        rps.len(),
        bundle.core_ids.len(),
        bundle.excluded.len(),
        grid.chains().len()
    );
    clock.lap("preprocess");

    let or_thr = or_threshold(rps.len(), &cfg);
    let ratio = ratio_matrix(&bundle.spc, &bundle.core_ids, or_thr);
    let cores = collect_core_chains(&ratio, &bundle, &rps, &grid);
    let core_clusters: Vec<Cluster> = cores
        .iter()
        .enumerate()
        .map(|(i, c)| Cluster::staged(i, c.clone()))
        .collect();
    log::info!("{} cluster cores (OR threshold {or_thr:.4})", cores.len());
    clock.lap("cores");

    let body_candidates = form_bodies(&core_clusters, &rps, &bundle, &grid, &cfg);
    let bodies = resolve_conflicts(&core_clusters, &body_candidates, &rps, &bundle, &grid);
    clock.lap("bodies");

    let staged = add_borders(&bodies, &rps, &bundle, &grid, &cfg);
    clock.lap("borders");

    let noncore = form_noncore(&staged, &rps, &bundle, &grid, &cfg, staged.len());
    clock.lap("noncore");

    let all: Vec<Cluster> = staged.iter().chain(&noncore).cloned().collect();
    let merge = merge_clusters(&all, &rps, store, &grid, &cfg);
    clock.lap("merge");

    let mut clusters = merge.clusters.clone();
    clusters.sort_by_key(|c| c.cluster_id);
    let clustered: BTreeSet<RpId> = clusters.iter().flat_map(Cluster::members).collect();
    let unclustered = rps
        .iter()
        .map(|r| r.rp_id)
        .filter(|r| !clustered.contains(r))
        .collect();
    log::info!("{} final clusters", clusters.len());

    Ok(PipelineOutput {
        rps,
        grid,
        trace: StageTrace {
            or_thr,
            ratio,
            cores,
            body_candidates,
            bodies,
            staged,
            noncore,
            merge,
        },
        bundle,
        clusters,
        unclustered,
        timings: clock.timings,
    })
}

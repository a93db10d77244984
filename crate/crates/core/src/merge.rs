//! Final merging of clusters through TF-IDF weighted lemma vectors.
//!
//! Each cluster is treated as a document whose words are the lowercased
//! lemmas of its members' components, appositions and number modifiers
//! included. Clusters whose vectors are close enough, and whose NEs the grid
//! allows together, are chained and merged.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::chains::grow_chains;
use crate::error::SimilarityError;
use crate::ingest::EmbeddingStore;
use crate::model::{Cluster, ClusterKind, PipelineConfig, RepresentativePhrase};
use crate::negrid::NeGrid;
use crate::similarity::cosine;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLemmaBag {
    pub cluster_id: usize,
    /// Lowercased lemma -> occurrences across member RPs.
    pub counts: BTreeMap<String, usize>,
    /// Lowercased lemma -> first original-case form (by rp_id), used as a
    /// fallback key for case-sensitive embedding lookups.
    pub forms: BTreeMap<String, String>,
}

impl ClusterLemmaBag {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

pub fn cluster_lemma_bag(cluster: &Cluster, rps: &[RepresentativePhrase]) -> ClusterLemmaBag {
    let mut counts = BTreeMap::new();
    let mut forms = BTreeMap::new();
    for id in cluster.members() {
        for c in &rps[id].components {
            let lower = c.lemma.to_lowercase();
            *counts.entry(lower.clone()).or_insert(0) += 1;
            forms.entry(lower).or_insert_with(|| c.lemma.clone());
        }
    }
    ClusterLemmaBag {
        cluster_id: cluster.cluster_id,
        counts,
        forms,
    }
}

/// cluster_id -> lemma -> tf·idf, with `idf = ln((1 + N) / (1 + df)) + 1`.
pub type TfIdf = BTreeMap<usize, BTreeMap<String, f64>>;

pub fn tfidf_weights(bags: &[ClusterLemmaBag]) -> TfIdf {
    let n = bags.len() as f64;
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for bag in bags {
        for lemma in bag.counts.keys() {
            *df.entry(lemma).or_insert(0) += 1;
        }
    }
    bags.iter()
        .map(|bag| {
            let total = bag.total() as f64;
            let weights = bag
                .counts
                .iter()
                .map(|(lemma, &count)| {
                    let idf = ((1.0 + n) / (1.0 + df[lemma.as_str()] as f64)).ln() + 1.0;
                    (lemma.clone(), count as f64 / total * idf)
                })
                .collect();
            (bag.cluster_id, weights)
        })
        .collect()
}

fn lemma_vector<'s>(
    bag: &ClusterLemmaBag,
    lemma: &str,
    store: &'s EmbeddingStore,
) -> Option<&'s [f64]> {
    let key = lemma.split_whitespace().collect::<Vec<_>>().join("_");
    store.get(&key).or_else(|| {
        bag.forms
            .get(lemma)
            .and_then(|f| store.get(&f.split_whitespace().collect::<Vec<_>>().join("_")))
    })
}

/// Sum of weighted lemma vectors over the number of resolvable lemmas.
pub fn cluster_vector(
    bag: &ClusterLemmaBag,
    weights: &BTreeMap<String, f64>,
    store: &EmbeddingStore,
) -> Result<Vec<f64>, SimilarityError> {
    let mut out = vec![0.0; store.dim()];
    let mut resolved = 0usize;
    for lemma in bag.counts.keys() {
        let Some(v) = lemma_vector(bag, lemma, store) else {
            continue;
        };
        let w = weights.get(lemma).copied().unwrap_or(0.0);
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
        resolved += 1;
    }
    if resolved == 0 {
        return Err(SimilarityError::UnembeddableCluster(bag.cluster_id));
    }
    out.iter_mut().for_each(|o| *o /= resolved as f64);
    Ok(out)
}

/// Chained NE surfaces of a cluster: lemmas matching a chain member
/// (case-insensitively) and the members' own NEs.
pub fn cluster_nes(
    cluster: &Cluster,
    bag: &ClusterLemmaBag,
    rps: &[RepresentativePhrase],
    grid: &NeGrid,
) -> BTreeSet<String> {
    let mut nes: BTreeSet<String> = bag
        .counts
        .keys()
        .filter_map(|l| grid.resolve_folded(l).map(str::to_string))
        .collect();
    for id in cluster.members() {
        if let Some(ne) = &rps[id].ne {
            if grid.in_any_chain(ne) {
                nes.insert(ne.clone());
            }
        }
    }
    nes
}

fn nes_compatible(grid: &NeGrid, a: &BTreeSet<String>, b: &BTreeSet<String>) -> bool {
    a.iter()
        .all(|x| b.iter().all(|y| grid.grid_weight(x, y) != 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeOutcome {
    pub clusters: Vec<Cluster>,
    /// Clusters without any resolvable lemma; they never merge.
    pub skipped: Vec<usize>,
    /// Positive SC entries as `(cluster_id, cluster_id, similarity)`, i < j.
    pub links: Vec<(usize, usize, f64)>,
}

/// Merges chains of similar, grid-compatible clusters.
///
/// A merged cluster keeps the smallest predecessor id, the stage labels of
/// all members and the list of predecessors in `merged_from`.
pub fn merge_clusters(
    clusters: &[Cluster],
    rps: &[RepresentativePhrase],
    store: &EmbeddingStore,
    grid: &NeGrid,
    cfg: &PipelineConfig,
) -> MergeOutcome {
    let mut sorted: Vec<&Cluster> = clusters.iter().collect();
    sorted.sort_by_key(|c| c.cluster_id);
    let bags: Vec<ClusterLemmaBag> = sorted.iter().map(|c| cluster_lemma_bag(c, rps)).collect();
    let tfidf = tfidf_weights(&bags);
    let vectors: Vec<Option<Vec<f64>>> = bags
        .iter()
        .map(|b| cluster_vector(b, &tfidf[&b.cluster_id], store).ok())
        .collect();
    let nes: Vec<BTreeSet<String>> = sorted
        .iter()
        .zip(&bags)
        .map(|(c, b)| cluster_nes(c, b, rps, grid))
        .collect();
    let skipped = sorted
        .iter()
        .zip(&vectors)
        .filter(|(_, v)| v.is_none())
        .map(|(c, _)| c.cluster_id)
        .collect();

    let n = sorted.len();
    let mut adjacency = vec![Vec::new(); n];
    let mut links = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (Some(vi), Some(vj)) = (&vectors[i], &vectors[j]) else {
                continue;
            };
            let Ok(sim) = cosine(vi, vj) else {
                continue;
            };
            if sim >= cfg.merge_thr && nes_compatible(grid, &nes[i], &nes[j]) {
                adjacency[i].push(j);
                adjacency[j].push(i);
                links.push((sorted[i].cluster_id, sorted[j].cluster_id, sim));
            }
        }
    }

    let groups = grow_chains(&adjacency, |chain, v| {
        chain
            .iter()
            .all(|&c| nes_compatible(grid, &nes[c], &nes[v]))
    });
    let merged = groups
        .into_iter()
        .map(|g| {
            if g.len() == 1 {
                return sorted[g[0]].clone();
            }
            let mut out = Cluster::staged(sorted[g[0]].cluster_id, BTreeSet::new());
            out.kind = ClusterKind::Noncore;
            for &i in &g {
                let c = sorted[i];
                out.core_members.extend(&c.core_members);
                out.body_members.extend(&c.body_members);
                out.border_members.extend(&c.border_members);
                if c.kind == ClusterKind::Staged {
                    out.kind = ClusterKind::Staged;
                }
                out.merged_from.push(c.cluster_id);
            }
            out
        })
        .collect();
    MergeOutcome {
        clusters: merged,
        skipped,
        links,
    }
}

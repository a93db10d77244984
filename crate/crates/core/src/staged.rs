//! Cluster cores, bodies, borders and non-core clusters.
//!
//! Stages run in order and only ever add members:
//!
//! 1. core RPs linked in SPC, SH and the ratio matrix form chains (cores);
//! 2. unclustered RPs close to a core member join as body candidates, and
//!    RPs claimed by several bodies go to the best-scoring one;
//! 3. RPs linked to at least `border_min_links` members of a cluster join
//!    the one with the highest mean positive similarity as borders;
//! 4. the remaining RPs group around dense seeds into non-core clusters.
//!
//! Whenever several RPs are admitted into one cluster, admission runs in
//! ascending rp_id order and skips an RP whose NE is grid-forbidden against
//! a member already admitted. No cluster ever holds two RPs with a zero grid
//! weight between their NEs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::chains::grow_chains;
use crate::model::{Cluster, PipelineConfig, RepresentativePhrase, RpId};
use crate::negrid::NeGrid;
use crate::similarity::{SimilarityBundle, SymMatrix};

/// Ratio threshold `clamp(log_base(n_rp), base, cap)`.
pub fn or_threshold(n_rp: usize, cfg: &PipelineConfig) -> f64 {
    let raw = (n_rp.max(1) as f64).ln() / cfg.or_thr_log_base.ln();
    raw.clamp(cfg.or_thr_base, cfg.or_thr_cap)
}

/// Normalized overlap of core RPs' SPC neighborhoods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioMatrix {
    /// Core rp_ids; rows follow this order.
    pub core_ids: Vec<RpId>,
    pub entries: SymMatrix,
    pub or_thr: f64,
}

/// Builds the ratio matrix from SPC.
///
/// The overlap of rows i and j is the number of columns where both are
/// positive, divided by the larger positive count of the two rows.
pub fn ratio_matrix(spc: &SymMatrix, core_ids: &[RpId], or_thr: f64) -> RatioMatrix {
    let n = spc.size();
    let words = n.div_ceil(64).max(1);
    let bits: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut row = vec![0u64; words];
            for (j, &x) in spc.row(i).iter().enumerate() {
                if x > 0.0 {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        })
        .collect();
    let mass: Vec<u32> = bits
        .iter()
        .map(|r| r.iter().map(|w| w.count_ones()).sum())
        .collect();
    let mut entries = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let denom = mass[i].max(mass[j]);
            if denom == 0 {
                continue;
            }
            let shared: u32 = bits[i]
                .iter()
                .zip(&bits[j])
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            let frac = f64::from(shared) / f64::from(denom);
            if frac >= or_thr {
                entries.set(i, j, frac);
            }
        }
    }
    RatioMatrix {
        core_ids: core_ids.to_vec(),
        entries,
        or_thr,
    }
}

fn ne_of(rps: &[RepresentativePhrase], id: RpId) -> Option<&str> {
    rps[id].ne.as_deref()
}

/// Whether `rp` may share a cluster with every RP in `members`.
pub fn grid_compatible<'a>(
    grid: &NeGrid,
    rps: &[RepresentativePhrase],
    rp: RpId,
    members: impl IntoIterator<Item = &'a RpId>,
) -> bool {
    let ne = ne_of(rps, rp);
    ne.is_none()
        || members
            .into_iter()
            .all(|&m| grid.allowed(ne, ne_of(rps, m)))
}

/// Chains of core RPs linked by RM, SPC and SH, keeping those of size ≥ 2.
pub fn collect_core_chains(
    rm: &RatioMatrix,
    bundle: &SimilarityBundle,
    rps: &[RepresentativePhrase],
    grid: &NeGrid,
) -> Vec<BTreeSet<RpId>> {
    let ids = &rm.core_ids;
    let n = ids.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let linked = rm.entries.get(i, j) > 0.0
                && bundle.spc.get(i, j) > 0.0
                && bundle.sh_between(&rps[ids[i]], &rps[ids[j]]) > 0.0;
            if linked {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    grow_chains(&adjacency, |chain, v| {
        grid_compatible(grid, rps, ids[v], chain.iter().map(|&c| &ids[c]))
    })
    .into_iter()
    .filter(|c| c.len() >= 2)
    .map(|c| c.into_iter().map(|p| ids[p]).collect())
    .collect()
}

/// Body candidates: for each claimed RP, the indices of the clusters that
/// claim it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodyCandidates {
    pub claims: BTreeMap<RpId, Vec<usize>>,
}

/// Claims every unclustered RP for each core it is close to.
///
/// An RP is claimed by core `i` when SP to some core member reaches
/// `body_thr` and the grid allows the RP against every core member.
pub fn form_bodies(
    cores: &[Cluster],
    rps: &[RepresentativePhrase],
    bundle: &SimilarityBundle,
    grid: &NeGrid,
    cfg: &PipelineConfig,
) -> BodyCandidates {
    let clustered: BTreeSet<RpId> = cores.iter().flat_map(|c| c.members()).collect();
    let mut claims = BTreeMap::new();
    for rp in rps
        .iter()
        .map(|r| r.rp_id)
        .filter(|r| !clustered.contains(r))
    {
        let claimants: Vec<usize> = cores
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                c.core_members
                    .iter()
                    .any(|&m| bundle.sp(rp, m) >= cfg.body_thr)
                    && grid_compatible(grid, rps, rp, &c.core_members)
            })
            .map(|(i, _)| i)
            .collect();
        if !claimants.is_empty() {
            claims.insert(rp, claimants);
        }
    }
    BodyCandidates { claims }
}

/// Conflict score of `rp` against a set of members: shared lemmas plus SP,
/// averaged over the members.
pub fn conflict_score(
    rp: RpId,
    members: &BTreeSet<RpId>,
    rps: &[RepresentativePhrase],
    bundle: &SimilarityBundle,
) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let lemmas = rps[rp].lemma_set();
    let overlap: usize = members
        .iter()
        .map(|&m| rps[m].lemma_set().intersection(&lemmas).count())
        .sum();
    let sim: f64 = members.iter().map(|&m| bundle.sp(rp, m)).sum();
    (overlap as f64 + sim) / members.len() as f64
}

/// Assigns each candidate to exactly one body and admits it.
///
/// RPs with a single claimant go there. Contested RPs are scored against the
/// uncontested members of each claimant and go to the highest score, ties to
/// the lower cluster id.
pub fn resolve_conflicts(
    cores: &[Cluster],
    candidates: &BodyCandidates,
    rps: &[RepresentativePhrase],
    bundle: &SimilarityBundle,
    grid: &NeGrid,
) -> Vec<Cluster> {
    let mut uncontested: Vec<BTreeSet<RpId>> =
        cores.iter().map(|c| c.core_members.clone()).collect();
    for (&rp, claimants) in &candidates.claims {
        if let [only] = claimants.as_slice() {
            uncontested[*only].insert(rp);
        }
    }

    let mut assigned: Vec<BTreeSet<RpId>> = vec![BTreeSet::new(); cores.len()];
    for (&rp, claimants) in &candidates.claims {
        let best = match claimants.as_slice() {
            [only] => *only,
            _ => {
                let mut best = claimants[0];
                let mut best_score = conflict_score(rp, &uncontested[best], rps, bundle);
                for &c in &claimants[1..] {
                    let s = conflict_score(rp, &uncontested[c], rps, bundle);
                    if s > best_score
                        || (s == best_score && cores[c].cluster_id < cores[best].cluster_id)
                    {
                        best = c;
                        best_score = s;
                    }
                }
                best
            }
        };
        assigned[best].insert(rp);
    }

    cores
        .iter()
        .zip(assigned)
        .map(|(core, body)| {
            let mut cluster = core.clone();
            for rp in body {
                if grid_compatible(grid, rps, rp, &cluster.members()) {
                    cluster.body_members.insert(rp);
                }
            }
            cluster
        })
        .collect()
}

fn clustered(clusters: &[Cluster]) -> BTreeSet<RpId> {
    clusters.iter().flat_map(|c| c.members()).collect()
}

/// Attaches remaining RPs with enough positive links as border members.
///
/// Links and scores are measured against each cluster's core and body; the
/// grid check also covers borders admitted earlier in the pass.
pub fn add_borders(
    bodies: &[Cluster],
    rps: &[RepresentativePhrase],
    bundle: &SimilarityBundle,
    grid: &NeGrid,
    cfg: &PipelineConfig,
) -> Vec<Cluster> {
    let taken = clustered(bodies);
    let bases: Vec<BTreeSet<RpId>> = bodies
        .iter()
        .map(|c| c.core_members.union(&c.body_members).copied().collect())
        .collect();
    let mut out: Vec<Cluster> = bodies.to_vec();
    for rp in rps.iter().map(|r| r.rp_id).filter(|r| !taken.contains(r)) {
        let mut best: Option<(usize, f64)> = None;
        for (ci, base) in bases.iter().enumerate() {
            let positive: Vec<f64> = base
                .iter()
                .map(|&m| bundle.sp(rp, m))
                .filter(|&s| s > 0.0)
                .collect();
            if positive.len() < cfg.border_min_links {
                continue;
            }
            if !grid_compatible(grid, rps, rp, &out[ci].members()) {
                continue;
            }
            let score = positive.iter().sum::<f64>() / positive.len() as f64;
            let better = match best {
                None => true,
                Some((bi, bs)) => {
                    score > bs || (score == bs && out[ci].cluster_id < out[bi].cluster_id)
                }
            };
            if better {
                best = Some((ci, score));
            }
        }
        if let Some((ci, _)) = best {
            out[ci].border_members.insert(rp);
        }
    }
    out
}

/// Groups the still-unclustered RPs around dense seeds.
///
/// Seeds are visited by descending count of unclustered neighbors
/// (SP ≥ `noncore_thr`), ties by rp_id. A seed takes every neighbor that is
/// still free; groups smaller than two are dropped and their RPs stay free.
/// New clusters are numbered from `first_id`.
pub fn form_noncore(
    clusters: &[Cluster],
    rps: &[RepresentativePhrase],
    bundle: &SimilarityBundle,
    grid: &NeGrid,
    cfg: &PipelineConfig,
    first_id: usize,
) -> Vec<Cluster> {
    let taken = clustered(clusters);
    let free: Vec<RpId> = rps
        .iter()
        .map(|r| r.rp_id)
        .filter(|r| !taken.contains(r))
        .collect();
    let neighbors: BTreeMap<RpId, Vec<RpId>> = free
        .iter()
        .map(|&r| {
            let ns = free
                .iter()
                .copied()
                .filter(|&u| u != r && bundle.sp(r, u) >= cfg.noncore_thr)
                .collect();
            (r, ns)
        })
        .collect();
    let mut order = free.clone();
    order.sort_by_key(|r| (std::cmp::Reverse(neighbors[r].len()), *r));

    let mut used: BTreeSet<RpId> = BTreeSet::new();
    let mut out = Vec::new();
    for seed in order {
        if used.contains(&seed) {
            continue;
        }
        let mut members = BTreeSet::from([seed]);
        for &u in &neighbors[&seed] {
            if !used.contains(&u) && grid_compatible(grid, rps, u, &members) {
                members.insert(u);
            }
        }
        if members.len() >= 2 {
            used.extend(members.iter().copied());
            out.push(Cluster::noncore(first_id + out.len(), members));
        }
    }
    out
}

//! Average-linkage agglomerative clustering on cosine distance, used as the
//! comparison baseline, and a pairwise agreement statistic between
//! partitions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{BaselineError, SimilarityError};
use crate::model::{Cluster, RpId};
use crate::similarity::cosine;

/// Clusters of size ≥ 2 plus the unclustered remainder.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub clusters: Vec<BTreeSet<RpId>>,
    pub unclustered: BTreeSet<RpId>,
}

/// Output of the hierarchical baseline.
pub type HcResult = Partition;

impl Partition {
    /// Final pipeline clusters over a universe of rp_ids.
    pub fn from_clusters(clusters: &[Cluster], universe: impl IntoIterator<Item = RpId>) -> Self {
        let sets: Vec<BTreeSet<RpId>> = clusters.iter().map(Cluster::members).collect();
        let covered: BTreeSet<RpId> = sets.iter().flatten().copied().collect();
        Self {
            unclustered: universe
                .into_iter()
                .filter(|r| !covered.contains(r))
                .collect(),
            clusters: sets,
        }
    }

    pub fn universe(&self) -> BTreeSet<RpId> {
        self.clusters
            .iter()
            .flatten()
            .chain(&self.unclustered)
            .copied()
            .collect()
    }

    pub fn unclustered_fraction(&self) -> f64 {
        let n = self.universe().len();
        if n == 0 {
            0.0
        } else {
            self.unclustered.len() as f64 / n as f64
        }
    }

    fn labels(&self) -> BTreeMap<RpId, usize> {
        let mut labels = BTreeMap::new();
        for (i, c) in self.clusters.iter().enumerate() {
            for &r in c {
                labels.insert(r, i);
            }
        }
        for (k, &r) in self.unclustered.iter().enumerate() {
            labels.insert(r, self.clusters.len() + k);
        }
        labels
    }
}

/// Agglomerative clustering with average linkage on cosine distance.
///
/// Merges proceed while the closest pair of clusters is within
/// `distance_thr`; equal distances merge the pair with the smallest
/// `(min id, max id)`, where a cluster's id is its smallest rp_id.
pub fn hc_average_linkage(
    points: &[(RpId, Vec<f64>)],
    distance_thr: f64,
) -> Result<HcResult, BaselineError> {
    if points.is_empty() {
        return Err(BaselineError::Empty);
    }
    let n = points.len();
    if points.iter().any(|(_, v)| v.iter().all(|&x| x == 0.0)) {
        return Err(SimilarityError::ZeroVector.into());
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = 1.0 - cosine(&points[i].1, &points[j].1)?;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    let mut members: Vec<Option<BTreeSet<RpId>>> = points
        .iter()
        .map(|(id, _)| Some(BTreeSet::from([*id])))
        .collect();
    let id_of = |m: &Option<BTreeSet<RpId>>| m.as_ref().and_then(|s| s.first().copied());

    loop {
        let mut best: Option<(f64, RpId, RpId, usize, usize)> = None;
        for i in 0..n {
            let Some(a) = id_of(&members[i]) else {
                continue;
            };
            for j in i + 1..n {
                let Some(b) = id_of(&members[j]) else {
                    continue;
                };
                let key = (dist[i * n + j], a.min(b), a.max(b), i, j);
                let better = match &best {
                    None => true,
                    Some(cur) => (key.0, key.1, key.2) < (cur.0, cur.1, cur.2),
                };
                if better {
                    best = Some(key);
                }
            }
        }
        let Some((d, _, _, i, j)) = best else { break };
        if d > distance_thr {
            break;
        }
        let si = members[i].as_ref().map_or(0, BTreeSet::len) as f64;
        let sj = members[j].as_ref().map_or(0, BTreeSet::len) as f64;
        for k in 0..n {
            if k == i || k == j || members[k].is_none() {
                continue;
            }
            let merged = (si * dist[i * n + k] + sj * dist[j * n + k]) / (si + sj);
            dist[i * n + k] = merged;
            dist[k * n + i] = merged;
        }
        let moved = members[j].take().unwrap_or_default();
        if let Some(m) = members[i].as_mut() {
            m.extend(moved);
        }
    }

    let mut out = Partition::default();
    for m in members.into_iter().flatten() {
        if m.len() >= 2 {
            out.clusters.push(m);
        } else {
            out.unclustered.extend(m);
        }
    }
    out.clusters.sort_by_key(|c| c.first().copied());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub universe_size: usize,
    pub ours_clusters: usize,
    pub baseline_clusters: usize,
    pub ours_unclustered_fraction: f64,
    pub baseline_unclustered_fraction: f64,
    /// Fraction of RP pairs on which both partitions agree (together or apart).
    pub agreement: f64,
}

pub fn compare(ours: &Partition, baseline: &Partition) -> Result<ComparisonReport, BaselineError> {
    let (ua, ub) = (ours.universe(), baseline.universe());
    if ua != ub {
        return Err(BaselineError::UniverseMismatch {
            left: ua.len(),
            right: ub.len(),
        });
    }
    let (la, lb) = (ours.labels(), baseline.labels());
    let ids: Vec<RpId> = ua.into_iter().collect();
    let mut agree = 0u64;
    let mut total = 0u64;
    for (x, &i) in ids.iter().enumerate() {
        for &j in &ids[x + 1..] {
            total += 1;
            if (la[&i] == la[&j]) == (lb[&i] == lb[&j]) {
                agree += 1;
            }
        }
    }
    Ok(ComparisonReport {
        universe_size: ids.len(),
        ours_clusters: ours.clusters.len(),
        baseline_clusters: baseline.clusters.len(),
        ours_unclustered_fraction: ours.unclustered_fraction(),
        baseline_unclustered_fraction: baseline.unclustered_fraction(),
        agreement: if total == 0 {
            1.0
        } else {
            agree as f64 / total as f64
        },
    })
}

//! NE-chains and the NE-grid.
//!
//! `SimilarTo` relations are closed transitively per chain type, so that
//! "United States"–"U.S." and "U.S."–"American" become one chain. The grid
//! then maps every NE pair to a merge weight:
//!
//! * `wt` when both NEs sit in the same chain,
//! * `0` when both sit in chains of one type but in different chains,
//! * `1` otherwise (unknown NEs, or NEs chained under different types).
//!
//! A zero forbids the pair from ever sharing a cluster; `wt` up-weights the
//! NE tokens when building pairwise phrase vectors.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::dsu::DisjointSet;
use crate::ingest::{ChainType, NeRelation};
use crate::model::RepresentativePhrase;

const ARTICLES: [&str; 3] = ["the", "a", "an"];

/// Trims, collapses inner whitespace and drops one leading article.
pub fn normalize_surface(surface: &str) -> String {
    let mut tokens: Vec<&str> = surface.split_whitespace().collect();
    if tokens.len() > 1 && ARTICLES.contains(&tokens[0].to_lowercase().as_str()) {
        tokens.remove(0);
    }
    tokens.join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeChain {
    pub chain_id: usize,
    pub chain_type: ChainType,
    pub members: BTreeSet<String>,
}

/// Connected components of the relation graph, one family per chain type.
/// Chains are numbered by their smallest member, then by type.
pub fn build_chains(relations: &[NeRelation]) -> Vec<NeChain> {
    let mut chains = Vec::new();
    for ty in ChainType::ALL {
        let edges: Vec<(String, String)> = relations
            .iter()
            .filter(|r| r.chain_type == ty)
            .map(|r| (normalize_surface(&r.a), normalize_surface(&r.b)))
            .filter(|(a, b)| a != b)
            .collect();
        let surfaces: BTreeSet<&str> = edges
            .iter()
            .flat_map(|(a, b)| [a.as_str(), b.as_str()])
            .collect();
        let index: BTreeMap<&str, usize> =
            surfaces.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let names: Vec<&str> = surfaces.into_iter().collect();
        let mut dsu = DisjointSet::new(names.len());
        for (a, b) in &edges {
            dsu.union(index[a.as_str()], index[b.as_str()]);
        }
        for group in dsu.groups() {
            chains.push(NeChain {
                chain_id: 0,
                chain_type: ty,
                members: group.into_iter().map(|i| names[i].to_string()).collect(),
            });
        }
    }
    chains
        .sort_by(|x, y| (x.members.first(), x.chain_type).cmp(&(y.members.first(), y.chain_type)));
    for (i, c) in chains.iter_mut().enumerate() {
        c.chain_id = i;
    }
    chains
}

/// Weights and permission for one phrase pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairWeight {
    /// Weight of the first phrase's NE tokens.
    pub w_k: f64,
    /// Weight of the second phrase's NE tokens.
    pub w_l: f64,
    pub allowed: bool,
}

impl PairWeight {
    pub const NEUTRAL: PairWeight = PairWeight {
        w_k: 1.0,
        w_l: 1.0,
        allowed: true,
    };
}

#[derive(Debug, Clone)]
pub struct NeGrid {
    chains: Vec<NeChain>,
    wt: f64,
    // surface -> (type, chain index); at most one chain per type
    membership: HashMap<String, Vec<(ChainType, usize)>>,
    // lowercase surface -> canonical surface
    folded: HashMap<String, String>,
}

impl NeGrid {
    pub fn new(chains: Vec<NeChain>, wt: f64) -> Self {
        let mut membership: HashMap<String, Vec<(ChainType, usize)>> = HashMap::new();
        let mut folded: HashMap<String, String> = HashMap::new();
        for (idx, chain) in chains.iter().enumerate() {
            for m in &chain.members {
                membership
                    .entry(m.clone())
                    .or_default()
                    .push((chain.chain_type, idx));
                let slot = folded.entry(m.to_lowercase()).or_insert_with(|| m.clone());
                if m < slot {
                    *slot = m.clone();
                }
            }
        }
        Self {
            chains,
            wt,
            membership,
            folded,
        }
    }

    pub fn from_relations(relations: &[NeRelation], wt: f64) -> Self {
        Self::new(build_chains(relations), wt)
    }

    pub fn chains(&self) -> &[NeChain] {
        &self.chains
    }

    pub fn wt(&self) -> f64 {
        self.wt
    }

    fn memberships(&self, surface: &str) -> &[(ChainType, usize)] {
        self.membership
            .get(surface)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn in_any_chain(&self, surface: &str) -> bool {
        !self.memberships(&normalize_surface(surface)).is_empty()
    }

    /// The chain of `chain_type` containing `surface`, if any.
    pub fn chain_of(&self, surface: &str, chain_type: ChainType) -> Option<&NeChain> {
        self.memberships(&normalize_surface(surface))
            .iter()
            .find(|(ty, _)| *ty == chain_type)
            .map(|&(_, idx)| &self.chains[idx])
    }

    /// Canonical chained surface matching a lowercased lemma.
    pub fn resolve_folded(&self, lemma: &str) -> Option<&str> {
        self.folded.get(&lemma.to_lowercase()).map(String::as_str)
    }

    /// Grid value for two NE surfaces.
    ///
    /// A shared type with different chains yields 0 even when the two NEs
    /// also share a chain of the other type.
    pub fn grid_weight(&self, ne_k: &str, ne_l: &str) -> f64 {
        let a = self.memberships(&normalize_surface(ne_k));
        let b = self.memberships(&normalize_surface(ne_l));
        let mut same_chain = false;
        for &(ta, ca) in a {
            for &(tb, cb) in b {
                if ta == tb {
                    if ca == cb {
                        same_chain = true;
                    } else {
                        return 0.0;
                    }
                }
            }
        }
        if same_chain {
            self.wt
        } else {
            1.0
        }
    }

    /// Whether two optional NEs may share a cluster.
    pub fn allowed(&self, ne_k: Option<&str>, ne_l: Option<&str>) -> bool {
        match (ne_k, ne_l) {
            (Some(a), Some(b)) => self.grid_weight(a, b) != 0.0,
            _ => true,
        }
    }

    /// NE-token weights for a phrase pair.
    pub fn pair_weight(
        &self,
        rp_k: &RepresentativePhrase,
        rp_l: &RepresentativePhrase,
    ) -> PairWeight {
        self.pair_weight_ne(rp_k.ne.as_deref(), rp_l.ne.as_deref())
    }

    pub(crate) fn pair_weight_ne(&self, ne_k: Option<&str>, ne_l: Option<&str>) -> PairWeight {
        match (ne_k, ne_l) {
            (Some(a), Some(b)) => {
                let g = self.grid_weight(a, b);
                if g == 0.0 {
                    PairWeight {
                        allowed: false,
                        ..PairWeight::NEUTRAL
                    }
                } else {
                    PairWeight {
                        w_k: g,
                        w_l: g,
                        allowed: true,
                    }
                }
            }
            (Some(a), None) if self.in_any_chain(a) => PairWeight {
                w_k: self.wt,
                ..PairWeight::NEUTRAL
            },
            (None, Some(b)) if self.in_any_chain(b) => PairWeight {
                w_l: self.wt,
                ..PairWeight::NEUTRAL
            },
            _ => PairWeight::NEUTRAL,
        }
    }
}

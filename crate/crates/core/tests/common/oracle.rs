//! Brute-force reference for every pipeline stage.
//!
//! Written for clarity, not speed: chains come from a fixpoint over relation
//! pairs, vectors are rebuilt for every pair, and every stage rescans whole
//! sets instead of keeping indexes. It shares only data types with the
//! library.

#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use actor_concepts::{
    ChainType, Cluster, ClusterKind, EmbeddingStore, NeRelation, PipelineConfig,
    RepresentativePhrase, RpId,
};

pub struct Grid {
    pub chains: Vec<(ChainType, BTreeSet<String>)>,
    pub wt: f64,
}

pub fn normalize(s: &str) -> String {
    let mut toks: Vec<&str> = s.split_whitespace().collect();
    if toks.len() >= 2 {
        let first = toks[0].to_lowercase();
        if first == "the" || first == "a" || first == "an" {
            toks.remove(0);
        }
    }
    toks.join(" ")
}

impl Grid {
    pub fn build(relations: &[NeRelation], wt: f64) -> Self {
        let mut chains: Vec<(ChainType, BTreeSet<String>)> = Vec::new();
        for r in relations {
            let (a, b) = (normalize(&r.a), normalize(&r.b));
            if a != b {
                chains.push((r.chain_type, BTreeSet::from([a, b])));
            }
        }
        // merge overlapping sets of one type until nothing changes
        loop {
            let mut merged = false;
            'scan: for i in 0..chains.len() {
                for j in i + 1..chains.len() {
                    if chains[i].0 == chains[j].0 && !chains[i].1.is_disjoint(&chains[j].1) {
                        let (_, other) = chains.remove(j);
                        chains[i].1.extend(other);
                        merged = true;
                        break 'scan;
                    }
                }
            }
            if !merged {
                break;
            }
        }
        Self { chains, wt }
    }

    fn chains_of(&self, ne: &str) -> Vec<usize> {
        let ne = normalize(ne);
        (0..self.chains.len())
            .filter(|&i| self.chains[i].1.contains(&ne))
            .collect()
    }

    pub fn in_chain(&self, ne: &str) -> bool {
        !self.chains_of(ne).is_empty()
    }

    pub fn weight(&self, a: &str, b: &str) -> f64 {
        let (ca, cb) = (self.chains_of(a), self.chains_of(b));
        let conflict = ca.iter().any(|&x| {
            cb.iter()
                .any(|&y| x != y && self.chains[x].0 == self.chains[y].0)
        });
        if conflict {
            0.0
        } else if ca.iter().any(|x| cb.contains(x)) {
            self.wt
        } else {
            1.0
        }
    }

    pub fn allowed(&self, a: Option<&str>, b: Option<&str>) -> bool {
        match (a, b) {
            (Some(a), Some(b)) => self.weight(a, b) != 0.0,
            _ => true,
        }
    }

    /// Chain surface whose lowercase form equals `lemma`'s; the byte-smallest
    /// when several do.
    fn fold(&self, lemma: &str) -> Option<String> {
        let lower = lemma.to_lowercase();
        self.chains
            .iter()
            .flat_map(|(_, members)| members.iter())
            .filter(|m| m.to_lowercase() == lower)
            .min()
            .cloned()
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        s += u[i] * v[i];
    }
    s
}

fn cos(u: &[f64], v: &[f64]) -> Option<f64> {
    let (nu, nv) = (dot(u, u).sqrt(), dot(v, v).sqrt());
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    Some(dot(u, v) / (nu * nv))
}

/// Greedy longest match: (token span, vector) per resolved token.
fn resolve(text: &str, store: &EmbeddingStore) -> Vec<((usize, usize), Vec<f64>)> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let mut found = None;
        let mut end = toks.len();
        while end > i {
            if let Some(v) = store.get(&toks[i..end].join("_")) {
                found = Some(((i, end), v.to_vec()));
                break;
            }
            end -= 1;
        }
        match found {
            Some(hit) => {
                i = hit.0 .1;
                out.push(hit);
            }
            None => i += 1,
        }
    }
    out
}

fn phrase_vector(
    rp: &RepresentativePhrase,
    ne_weight: f64,
    store: &EmbeddingStore,
) -> Option<Vec<f64>> {
    let toks = resolve(&rp.rp_text, store);
    if toks.is_empty() {
        return None;
    }
    let mut v = vec![0.0; store.dim()];
    for (span, tv) in &toks {
        let on_ne = rp.ne_span.is_some_and(|(s, e)| span.0 < e && s < span.1);
        let w = if on_ne { ne_weight } else { 1.0 };
        for d in 0..v.len() {
            v[d] += w * tv[d];
        }
    }
    for x in v.iter_mut() {
        *x /= toks.len() as f64;
    }
    Some(v)
}

pub struct Reference {
    pub sp: Vec<Vec<f64>>,
    pub core_ids: Vec<RpId>,
    pub rm: Vec<Vec<f64>>,
    pub cores: Vec<BTreeSet<RpId>>,
    pub claims: BTreeMap<RpId, Vec<usize>>,
    pub bodies: Vec<Cluster>,
    pub staged: Vec<Cluster>,
    pub noncore: Vec<Cluster>,
    pub merged: Vec<Cluster>,
}

pub struct Oracle<'a> {
    pub rps: &'a [RepresentativePhrase],
    pub store: &'a EmbeddingStore,
    pub grid: Grid,
    pub cfg: PipelineConfig,
}

impl<'a> Oracle<'a> {
    pub fn new(
        rps: &'a [RepresentativePhrase],
        store: &'a EmbeddingStore,
        relations: &[NeRelation],
        cfg: &PipelineConfig,
    ) -> Self {
        Self {
            rps,
            store,
            grid: Grid::build(relations, cfg.wt),
            cfg: cfg.clone(),
        }
    }

    fn ne(&self, id: RpId) -> Option<&str> {
        self.rps[id].ne.as_deref()
    }

    fn fits(&self, rp: RpId, members: &BTreeSet<RpId>) -> bool {
        members
            .iter()
            .all(|&m| self.grid.allowed(self.ne(rp), self.ne(m)))
    }

    pub fn sp_entry(&self, i: RpId, j: RpId) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = (&self.rps[i], &self.rps[j]);
        let (wa, wb) = match (a.ne.as_deref(), b.ne.as_deref()) {
            (Some(x), Some(y)) => {
                let g = self.grid.weight(x, y);
                if g == 0.0 {
                    return 0.0;
                }
                (g, g)
            }
            (Some(x), None) if self.grid.in_chain(x) => (self.grid.wt, 1.0),
            (None, Some(y)) if self.grid.in_chain(y) => (1.0, self.grid.wt),
            _ => (1.0, 1.0),
        };
        let (Some(va), Some(vb)) = (
            phrase_vector(a, wa, self.store),
            phrase_vector(b, wb, self.store),
        ) else {
            return 0.0;
        };
        let Some(c) = cos(&va, &vb) else { return 0.0 };
        let c = c.clamp(0.0, 1.0);
        if c < self.cfg.thr_sim_rp {
            0.0
        } else {
            c
        }
    }

    pub fn sh_entry(&self, i: RpId, j: RpId) -> f64 {
        let (ha, hb) = (&self.rps[i].head, &self.rps[j].head);
        let (Some(va), Some(vb)) = (self.store.get(ha), self.store.get(hb)) else {
            return 0.0;
        };
        if dot(va, va) == 0.0 || dot(vb, vb) == 0.0 {
            return 0.0;
        }
        if ha == hb {
            0.5
        } else {
            cos(va, vb).unwrap().max(0.0)
        }
    }

    pub fn run(&self) -> Reference {
        let n = self.rps.len();
        let cfg = &self.cfg;
        let sp: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.sp_entry(i, j)).collect())
            .collect();

        // ratio matrix over core RPs
        let core_ids: Vec<RpId> = (0..n).filter(|&i| self.rps[i].is_core).collect();
        let or_thr =
            ((n as f64).ln() / cfg.or_thr_log_base.ln()).clamp(cfg.or_thr_base, cfg.or_thr_cap);
        let row = |i: RpId| -> BTreeSet<RpId> {
            core_ids
                .iter()
                .copied()
                .filter(|&k| sp[i][k] > 0.0)
                .collect()
        };
        let m = core_ids.len();
        let mut rm = vec![vec![0.0; m]; m];
        for a in 0..m {
            for b in 0..m {
                let (ra, rb) = (row(core_ids[a]), row(core_ids[b]));
                let denom = ra.len().max(rb.len());
                if a == b || denom == 0 {
                    continue;
                }
                let frac = ra.intersection(&rb).count() as f64 / denom as f64;
                if frac >= or_thr {
                    rm[a][b] = frac;
                }
            }
        }

        // cores: grow from the smallest free core RP, always taking the
        // smallest linked RP compatible with the whole chain
        let linked = |a: usize, b: usize| {
            let (i, j) = (core_ids[a], core_ids[b]);
            rm[a][b] > 0.0 && sp[i][j] > 0.0 && self.sh_entry(i, j) > 0.0
        };
        let mut free: BTreeSet<usize> = (0..m).collect();
        let mut cores = Vec::new();
        while let Some(seed) = free.pop_first() {
            let mut chain = BTreeSet::from([seed]);
            loop {
                let next = free.iter().copied().find(|&v| {
                    chain.iter().any(|&c| linked(c, v))
                        && self.fits(core_ids[v], &chain.iter().map(|&c| core_ids[c]).collect())
                });
                match next {
                    Some(v) => {
                        free.remove(&v);
                        chain.insert(v);
                    }
                    None => break,
                }
            }
            if chain.len() >= 2 {
                cores.push(
                    chain
                        .into_iter()
                        .map(|c| core_ids[c])
                        .collect::<BTreeSet<_>>(),
                );
            }
        }

        // body claims
        let in_core: BTreeSet<RpId> = cores.iter().flatten().copied().collect();
        let mut claims: BTreeMap<RpId, Vec<usize>> = BTreeMap::new();
        for rp in 0..n {
            if in_core.contains(&rp) {
                continue;
            }
            for (ci, core) in cores.iter().enumerate() {
                let close = core.iter().any(|&c| sp[rp][c] >= cfg.body_thr);
                if close && self.fits(rp, core) {
                    claims.entry(rp).or_default().push(ci);
                }
            }
        }

        // conflict resolution against uncontested members
        let mut uncontested = cores.clone();
        for (&rp, cs) in &claims {
            if cs.len() == 1 {
                uncontested[cs[0]].insert(rp);
            }
        }
        let score = |rp: RpId, members: &BTreeSet<RpId>| -> f64 {
            let mine = self.rps[rp].lemma_set();
            let mut overlap = 0usize;
            let mut sim = 0.0;
            for &x in members {
                overlap += self.rps[x].lemma_set().intersection(&mine).count();
            }
            for &x in members {
                sim += sp[rp][x];
            }
            (overlap as f64 + sim) / members.len() as f64
        };
        let mut winners: Vec<BTreeSet<RpId>> = vec![BTreeSet::new(); cores.len()];
        for (&rp, cs) in &claims {
            let mut best = cs[0];
            for &c in cs {
                let (s, sb) = (score(rp, &uncontested[c]), score(rp, &uncontested[best]));
                if s > sb || (s == sb && c < best) {
                    best = c;
                }
            }
            winners[best].insert(rp);
        }
        let mut bodies = Vec::new();
        for (ci, core) in cores.iter().enumerate() {
            let mut c = Cluster::staged(ci, core.clone());
            for &rp in &winners[ci] {
                if self.fits(rp, &c.members()) {
                    c.body_members.insert(rp);
                }
            }
            bodies.push(c);
        }

        // borders
        let mut staged = bodies.clone();
        let taken: BTreeSet<RpId> = bodies.iter().flat_map(|c| c.members()).collect();
        for rp in 0..n {
            if taken.contains(&rp) {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for ci in 0..staged.len() {
                let base: Vec<RpId> = bodies[ci]
                    .core_members
                    .iter()
                    .chain(&bodies[ci].body_members)
                    .copied()
                    .collect();
                let links: Vec<f64> = base
                    .iter()
                    .map(|&x| sp[rp][x])
                    .filter(|&s| s > 0.0)
                    .collect();
                if links.len() < cfg.border_min_links || !self.fits(rp, &staged[ci].members()) {
                    continue;
                }
                let s = links.iter().sum::<f64>() / links.len() as f64;
                if best.map_or(true, |(_, bs)| s > bs) {
                    best = Some((ci, s));
                }
            }
            if let Some((ci, _)) = best {
                staged[ci].border_members.insert(rp);
            }
        }

        // non-core clusters
        let taken: BTreeSet<RpId> = staged.iter().flat_map(|c| c.members()).collect();
        let free: Vec<RpId> = (0..n).filter(|r| !taken.contains(r)).collect();
        let nbrs = |r: RpId| -> Vec<RpId> {
            free.iter()
                .copied()
                .filter(|&u| u != r && sp[r][u] >= cfg.noncore_thr)
                .collect()
        };
        let mut order = free.clone();
        order.sort_by(|a, b| nbrs(*b).len().cmp(&nbrs(*a).len()).then(a.cmp(b)));
        let mut used = BTreeSet::new();
        let mut noncore = Vec::new();
        for seed in order {
            if used.contains(&seed) {
                continue;
            }
            let mut members = BTreeSet::from([seed]);
            for u in nbrs(seed) {
                if !used.contains(&u) && self.fits(u, &members) {
                    members.insert(u);
                }
            }
            if members.len() >= 2 {
                used.extend(members.iter().copied());
                noncore.push(Cluster::noncore(staged.len() + noncore.len(), members));
            }
        }

        let all: Vec<Cluster> = staged.iter().chain(&noncore).cloned().collect();
        let merged = self.merge(&all);
        Reference {
            sp,
            core_ids,
            rm,
            cores,
            claims,
            bodies,
            staged,
            noncore,
            merged,
        }
    }

    pub fn merge(&self, clusters: &[Cluster]) -> Vec<Cluster> {
        let k = clusters.len();
        // bags of lowercased lemmas, with the first original form per lemma
        let mut bags: Vec<BTreeMap<String, usize>> = Vec::new();
        let mut forms: Vec<BTreeMap<String, String>> = Vec::new();
        for c in clusters {
            let mut bag = BTreeMap::new();
            let mut form = BTreeMap::new();
            for id in c.members() {
                for comp in &self.rps[id].components {
                    let l = comp.lemma.to_lowercase();
                    *bag.entry(l.clone()).or_insert(0) += 1;
                    form.entry(l).or_insert(comp.lemma.clone());
                }
            }
            bags.push(bag);
            forms.push(form);
        }
        let lookup = |i: usize, lemma: &str| -> Option<Vec<f64>> {
            let key = |s: &str| s.split_whitespace().collect::<Vec<_>>().join("_");
            self.store
                .get(&key(lemma))
                .or_else(|| self.store.get(&key(&forms[i][lemma])))
                .map(|v| v.to_vec())
        };
        let vectors: Vec<Option<Vec<f64>>> = (0..k)
            .map(|i| {
                let total: usize = bags[i].values().sum();
                let mut v = vec![0.0; self.store.dim()];
                let mut count = 0;
                for (lemma, &c) in &bags[i] {
                    let Some(lv) = lookup(i, lemma) else { continue };
                    let df = bags.iter().filter(|b| b.contains_key(lemma)).count();
                    let idf = ((1.0 + k as f64) / (1.0 + df as f64)).ln() + 1.0;
                    let w = c as f64 / total as f64 * idf;
                    for d in 0..v.len() {
                        v[d] += w * lv[d];
                    }
                    count += 1;
                }
                if count == 0 {
                    return None;
                }
                Some(v.into_iter().map(|x| x / count as f64).collect())
            })
            .collect();
        let nes: Vec<BTreeSet<String>> = (0..k)
            .map(|i| {
                let mut s: BTreeSet<String> =
                    bags[i].keys().filter_map(|l| self.grid.fold(l)).collect();
                for id in clusters[i].members() {
                    if let Some(ne) = self.ne(id) {
                        if self.grid.in_chain(ne) {
                            s.insert(ne.to_string());
                        }
                    }
                }
                s
            })
            .collect();
        let compatible = |a: usize, b: usize| {
            nes[a]
                .iter()
                .all(|x| nes[b].iter().all(|y| self.grid.weight(x, y) != 0.0))
        };
        let linked = |a: usize, b: usize| {
            if a == b {
                return false;
            }
            let (Some(va), Some(vb)) = (&vectors[a], &vectors[b]) else {
                return false;
            };
            cos(va, vb).is_some_and(|c| c.clamp(-1.0, 1.0) >= self.cfg.merge_thr)
                && compatible(a, b)
        };

        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&i| clusters[i].cluster_id);
        let mut free: BTreeSet<usize> = (0..k).collect();
        let mut out = Vec::new();
        for &seed in &order {
            if !free.remove(&seed) {
                continue;
            }
            let mut group = vec![seed];
            loop {
                let next = order.iter().copied().find(|&v| {
                    free.contains(&v)
                        && group.iter().any(|&g| linked(g, v))
                        && group.iter().all(|&g| compatible(g, v))
                });
                match next {
                    Some(v) => {
                        free.remove(&v);
                        group.push(v);
                    }
                    None => break,
                }
            }
            if group.len() == 1 {
                out.push(clusters[seed].clone());
                continue;
            }
            group.sort_by_key(|&g| clusters[g].cluster_id);
            let mut c = Cluster::staged(clusters[group[0]].cluster_id, BTreeSet::new());
            c.kind = if group
                .iter()
                .any(|&g| clusters[g].kind == ClusterKind::Staged)
            {
                ClusterKind::Staged
            } else {
                ClusterKind::Noncore
            };
            for &g in &group {
                c.core_members.extend(&clusters[g].core_members);
                c.body_members.extend(&clusters[g].body_members);
                c.border_members.extend(&clusters[g].border_members);
                c.merged_from.push(clusters[g].cluster_id);
            }
            out.push(c);
        }
        out.sort_by_key(|c| c.cluster_id);
        out
    }
}

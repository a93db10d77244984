//! Weighted phrase vectors and the head, phrase and core-phrase similarity
//! matrices.
//!
//! A phrase vector depends on the partner phrase: the NE tokens of both
//! phrases are scaled by the grid weight of the pair. Since a grid weight is
//! either 1 or `wt`, each phrase has at most two distinct vectors, and both
//! are precomputed once.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, SimilarityError};
use crate::ingest::{rp_vector_tokens, EmbeddingStore, ResolvedToken};
use crate::model::{PipelineConfig, RepresentativePhrase, RpId};
use crate::negrid::NeGrid;

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Writes `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Submatrix over the given indices, in order.
    pub fn restrict(&self, idx: &[usize]) -> SymMatrix {
        let mut out = SymMatrix::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.data[a * idx.len() + b] = self.get(i, j);
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// Cosine similarity clamped to [-1, 1].
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, SimilarityError> {
    if u.len() != v.len() {
        return Err(SimilarityError::LengthMismatch(u.len(), v.len()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Mean of weight-scaled token vectors.
fn weighted_mean(tokens: &[ResolvedToken<'_>], weights: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (tok, w) in tokens.iter().zip(weights) {
        for (o, x) in out.iter_mut().zip(tok.vector) {
            *o += w * x;
        }
    }
    let n = tokens.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    out
}

/// Mean of the phrase's resolved token vectors, each scaled by its weight.
///
/// `weights` holds one value per resolved token, in phrase order.
pub fn weighted_phrase_vector(
    rp: &RepresentativePhrase,
    weights: &[f64],
    store: &EmbeddingStore,
) -> Result<Vec<f64>, SimilarityError> {
    let tokens = rp_vector_tokens(rp, store);
    if tokens.is_empty() {
        return Err(SimilarityError::Unembeddable(rp.rp_text.clone()));
    }
    if tokens.len() != weights.len() {
        return Err(SimilarityError::LengthMismatch(tokens.len(), weights.len()));
    }
    Ok(weighted_mean(&tokens, weights, store.dim()))
}

/// Per-token weights giving `ne_weight` to tokens overlapping the phrase's
/// NE span and 1 elsewhere.
pub fn ne_token_weights(
    rp: &RepresentativePhrase,
    tokens: &[ResolvedToken<'_>],
    ne_weight: f64,
) -> Vec<f64> {
    tokens
        .iter()
        .map(|t| match rp.ne_span {
            Some((s, e)) if t.span.0 < e && s < t.span.1 => ne_weight,
            _ => 1.0,
        })
        .collect()
}

/// Unweighted mean vector of a phrase, `None` when nothing resolves.
pub fn mean_vector(rp: &RepresentativePhrase, store: &EmbeddingStore) -> Option<Vec<f64>> {
    let tokens = rp_vector_tokens(rp, store);
    if tokens.is_empty() {
        return None;
    }
    Some(weighted_mean(
        &tokens,
        &vec![1.0; tokens.len()],
        store.dim(),
    ))
}

struct PhraseVectors {
    plain: Vec<f64>,
    plain_norm: f64,
    // NE tokens scaled by wt; None when the phrase has no resolved NE token
    weighted: Option<(Vec<f64>, f64)>,
}

impl PhraseVectors {
    fn build(rp: &RepresentativePhrase, store: &EmbeddingStore, wt: f64) -> Option<Self> {
        let tokens = rp_vector_tokens(rp, store);
        if tokens.is_empty() {
            return None;
        }
        let plain = weighted_mean(&tokens, &vec![1.0; tokens.len()], store.dim());
        let plain_norm = norm(&plain);
        if plain_norm == 0.0 {
            return None;
        }
        let weights = ne_token_weights(rp, &tokens, wt);
        let weighted = weights.iter().any(|&w| w != 1.0).then(|| {
            let v = weighted_mean(&tokens, &weights, store.dim());
            let n = norm(&v);
            (v, n)
        });
        Some(Self {
            plain,
            plain_norm,
            weighted,
        })
    }

    fn with_weight(&self, w: f64) -> (&[f64], f64) {
        match &self.weighted {
            Some((v, n)) if w != 1.0 && *n > 0.0 => (v, *n),
            _ => (&self.plain, self.plain_norm),
        }
    }
}

/// Phrase-similarity matrix over all RPs and the list of unembeddable RPs.
///
/// Rows are computed in parallel on the current rayon pool; each entry is
/// evaluated once, so results do not depend on the worker count.
pub fn phrase_similarity(
    rps: &[RepresentativePhrase],
    store: &EmbeddingStore,
    grid: &NeGrid,
    cfg: &PipelineConfig,
) -> (SymMatrix, Vec<RpId>) {
    let wt = grid.wt();
    let vectors: Vec<Option<PhraseVectors>> = rps
        .par_iter()
        .map(|rp| PhraseVectors::build(rp, store, wt))
        .collect();
    let excluded: Vec<RpId> = vectors
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_none())
        .map(|(i, _)| rps[i].rp_id)
        .collect();

    let n = rps.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let Some(vi) = &vectors[i] else {
                return Vec::new();
            };
            (i + 1..n)
                .map(|j| {
                    let Some(vj) = &vectors[j] else {
                        return 0.0;
                    };
                    let pw = grid.pair_weight(&rps[i], &rps[j]);
                    if !pw.allowed {
                        return 0.0;
                    }
                    let (a, na) = vi.with_weight(pw.w_k);
                    let (b, nb) = vj.with_weight(pw.w_l);
                    let sim = (dot(a, b) / (na * nb)).clamp(0.0, 1.0);
                    if sim < cfg.thr_sim_rp {
                        0.0
                    } else {
                        sim
                    }
                })
                .collect()
        })
        .collect();

    let mut sp = SymMatrix::zeros(n);
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            sp.set(i, i + 1 + k, v);
        }
    }
    (sp, excluded)
}

/// The three similarity matrices of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityBundle {
    /// Head similarity over distinct heads present in the store.
    pub sh: SymMatrix,
    pub head_index: BTreeMap<String, usize>,
    /// Phrase similarity over all RPs, indexed by rp_id.
    pub sp: SymMatrix,
    /// Core rp_ids in ascending order; SPC rows follow this order.
    pub core_ids: Vec<RpId>,
    pub spc: SymMatrix,
    /// RPs with no resolvable token; their SP rows are zero.
    pub excluded: Vec<RpId>,
    /// RPs whose head has no vector; they score 0 in every SH lookup.
    pub head_excluded: Vec<RpId>,
}

impl SimilarityBundle {
    /// SH value for the heads of two RPs.
    pub fn sh_between(&self, a: &RepresentativePhrase, b: &RepresentativePhrase) -> f64 {
        match (self.head_index.get(&a.head), self.head_index.get(&b.head)) {
            (Some(&i), Some(&j)) => self.sh.get(i, j),
            _ => 0.0,
        }
    }

    pub fn sp(&self, a: RpId, b: RpId) -> f64 {
        self.sp.get(a, b)
    }

    pub fn head_labels(&self) -> Vec<&str> {
        let mut labels = vec![""; self.head_index.len()];
        for (h, &i) in &self.head_index {
            labels[i] = h;
        }
        labels
    }
}

pub fn head_similarity(
    rps: &[RepresentativePhrase],
    store: &EmbeddingStore,
) -> (SymMatrix, BTreeMap<String, usize>) {
    let heads: std::collections::BTreeSet<&str> = rps
        .iter()
        .map(|r| r.head.as_str())
        .filter(|h| store.get(h).is_some_and(|v| norm(v) > 0.0))
        .collect();
    let heads: Vec<&str> = heads.into_iter().collect();
    let mut sh = SymMatrix::zeros(heads.len());
    for i in 0..heads.len() {
        sh.set(i, i, 0.5);
        for j in i + 1..heads.len() {
            // both vectors are nonzero, lengths equal the store dim
            let c =
                cosine(store.get(heads[i]).unwrap(), store.get(heads[j]).unwrap()).unwrap_or(0.0);
            sh.set(i, j, c.max(0.0));
        }
    }
    let index = heads
        .iter()
        .enumerate()
        .map(|(i, h)| (h.to_string(), i))
        .collect();
    (sh, index)
}

/// Builds SH, SP and SPC. Fails only when no RP is embeddable.
pub fn build_bundle(
    rps: &[RepresentativePhrase],
    store: &EmbeddingStore,
    grid: &NeGrid,
    cfg: &PipelineConfig,
) -> Result<SimilarityBundle, Error> {
    let (sh, head_index) = head_similarity(rps, store);
    let (sp, excluded) = phrase_similarity(rps, store, grid, cfg);
    if excluded.len() == rps.len() {
        return Err(Error::NothingEmbeddable);
    }
    let core_ids: Vec<RpId> = rps.iter().filter(|r| r.is_core).map(|r| r.rp_id).collect();
    let spc = sp.restrict(&core_ids);
    let head_excluded = rps
        .iter()
        .filter(|r| !head_index.contains_key(&r.head))
        .map(|r| r.rp_id)
        .collect();
    Ok(SimilarityBundle {
        sh,
        head_index,
        sp,
        core_ids,
        spc,
        excluded,
        head_excluded,
    })
}

/// Tab-separated matrix with a label header row and label column.
pub fn matrix_tsv(m: &SymMatrix, labels: &[&str]) -> String {
    let mut out = String::new();
    for l in labels {
        out.push('\t');
        out.push_str(l);
    }
    out.push('\n');
    for (i, l) in labels.iter().enumerate() {
        out.push_str(l);
        for j in 0..m.size() {
            let _ = write!(out, "\t{:.6}", m.get(i, j));
        }
        out.push('\n');
    }
    out
}

/// SH, SP and SPC rendered as TSV, keyed by file name.
pub fn matrix_dumps(
    bundle: &SimilarityBundle,
    rps: &[RepresentativePhrase],
) -> [(&'static str, String); 3] {
    let rp_labels: Vec<&str> = rps.iter().map(|r| r.rp_text.as_str()).collect();
    let core_labels: Vec<&str> = bundle
        .core_ids
        .iter()
        .map(|&i| rps[i].rp_text.as_str())
        .collect();
    [
        ("SH.tsv", matrix_tsv(&bundle.sh, &bundle.head_labels())),
        ("SP.tsv", matrix_tsv(&bundle.sp, &rp_labels)),
        ("SPC.tsv", matrix_tsv(&bundle.spc, &core_labels)),
    ]
}

/// Writes `SH.tsv`, `SP.tsv` and `SPC.tsv` into `dir`.
pub fn dump_matrices(
    bundle: &SimilarityBundle,
    rps: &[RepresentativePhrase],
    dir: &Path,
) -> io::Result<Vec<std::path::PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, body) in matrix_dumps(bundle, rps) {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

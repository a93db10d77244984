//! Input files and representative-phrase derivation.
//!
//! Three inputs feed the engine: `mentions.jsonl`, `embeddings.tsv` and
//! `ne_relations.jsonl`. Loaders validate every record and report the
//! 1-based line of the first problem.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::IngestError;
use crate::model::{Component, ComponentRole, Mention, RepresentativePhrase, MAX_MENTION_TOKENS};
use crate::negrid::normalize_surface;

/// Word or phrase vectors keyed by token. Multi-word keys join with `_`.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            table: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Inserts a vector, returning the previous one for that token.
    ///
    /// # Panics
    /// If `vector.len() != self.dim()`.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Option<Vec<f64>> {
        assert_eq!(vector.len(), self.dim, "embedding length must equal dim");
        self.table.insert(token.into(), vector)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.table.get(token).map(Vec::as_slice)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.table.contains_key(token)
    }

    /// Stored tokens in byte order.
    pub fn tokens(&self) -> Vec<&str> {
        let mut keys: Vec<&str> = self.table.keys().map(String::as_str).collect();
        keys.sort_unstable();
        keys
    }
}

/// Result of loading an embeddings file.
#[derive(Debug, Clone)]
pub struct LoadedEmbeddings {
    pub store: EmbeddingStore,
    /// Tokens that appeared on more than one row; the last row won.
    pub duplicates: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainType {
    /// country + nationality
    Cn,
    /// organization + persons
    Op,
}

impl ChainType {
    pub const ALL: [ChainType; 2] = [ChainType::Cn, ChainType::Op];
}

/// A `SimilarTo` link between two NE surfaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeRelation {
    pub a: String,
    pub b: String,
    pub chain_type: ChainType,
}

/// One embedding-store entry matched inside a phrase.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedToken<'a> {
    pub key: String,
    /// Half-open token span in `rp_text`.
    pub span: (usize, usize),
    pub vector: &'a [f64],
}

fn open(path: &Path) -> Result<BufReader<File>, IngestError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn read_lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, Result<String, IngestError>)> {
    reader.lines().enumerate().map(|(i, line)| {
        let n = i + 1;
        (
            n,
            line.map_err(|e| IngestError::Parse {
                line: n,
                message: e.to_string(),
            }),
        )
    })
}

pub fn load_mentions(path: &Path) -> Result<Vec<Mention>, IngestError> {
    parse_mentions(open(path)?)
}

/// Parses mentions, failing on the first invalid line.
pub fn parse_mentions<R: BufRead>(reader: R) -> Result<Vec<Mention>, IngestError> {
    let (mentions, mut errors) = check_mentions(reader);
    if errors.is_empty() {
        Ok(mentions)
    } else {
        Err(errors.swap_remove(0))
    }
}

/// Parses every line, collecting valid mentions and all line errors.
pub fn check_mentions<R: BufRead>(reader: R) -> (Vec<Mention>, Vec<IngestError>) {
    let mut mentions = Vec::new();
    let mut errors = Vec::new();
    for (line, text) in read_lines(reader) {
        let result = text.and_then(|text| {
            if text.trim().is_empty() {
                Ok(None)
            } else {
                parse_mention_line(line, &text).map(Some)
            }
        });
        match result {
            Ok(Some(m)) => mentions.push(m),
            Ok(None) => {}
            Err(e) => errors.push(e),
        }
    }
    (mentions, errors)
}

fn schema(line: usize, field: &'static str, message: impl Into<String>) -> IngestError {
    IngestError::Schema {
        line,
        field,
        message: message.into(),
    }
}

fn parse_mention_line(line: usize, text: &str) -> Result<Mention, IngestError> {
    let value: Value = serde_json::from_str(text).map_err(|e| IngestError::Parse {
        line,
        message: e.to_string(),
    })?;
    let obj = value
        .as_object()
        .ok_or_else(|| schema(line, "record", "expected a JSON object"))?;

    const STRING_FIELDS: [&str; 5] = ["mention_id", "doc_id", "text", "rp_text", "head"];
    for field in STRING_FIELDS {
        match obj.get(field).and_then(Value::as_str) {
            Some(s) if !s.trim().is_empty() => {}
            Some(_) => return Err(schema(line, field, "must not be empty")),
            None => return Err(schema(line, field, "missing or not a string")),
        }
    }
    match obj.get("entity_type").and_then(Value::as_str) {
        Some("person-nes" | "person-nns" | "person-nn" | "group") => {}
        Some(other) => {
            return Err(schema(
                line,
                "entity_type",
                format!("unknown entity type {other:?}"),
            ))
        }
        None => return Err(schema(line, "entity_type", "missing or not a string")),
    }

    let mention: Mention =
        serde_json::from_value(value).map_err(|e| schema(line, "record", e.to_string()))?;

    let n_tokens = mention.text.split_whitespace().count();
    if n_tokens > MAX_MENTION_TOKENS {
        return Err(schema(
            line,
            "text",
            format!("{n_tokens} tokens exceed the {MAX_MENTION_TOKENS}-word bound"),
        ));
    }
    let heads: Vec<&Component> = mention
        .components
        .iter()
        .filter(|c| c.role == ComponentRole::Head)
        .collect();
    match heads.as_slice() {
        [h] if h.lemma == mention.head => {}
        [h] => {
            return Err(schema(
                line,
                "components",
                format!(
                    "head component {:?} differs from head {:?}",
                    h.lemma, mention.head
                ),
            ))
        }
        _ => {
            return Err(schema(
                line,
                "components",
                format!("expected exactly one head component, found {}", heads.len()),
            ))
        }
    }
    Ok(mention)
}

pub fn load_embeddings(path: &Path, dim: usize) -> Result<LoadedEmbeddings, IngestError> {
    parse_embeddings(open(path)?, dim)
}

/// Parses `token\tv1\t...\tvdim` rows.
pub fn parse_embeddings<R: BufRead>(
    reader: R,
    dim: usize,
) -> Result<LoadedEmbeddings, IngestError> {
    let mut store = EmbeddingStore::new(dim);
    let mut duplicates = Vec::new();
    for (line, text) in read_lines(reader) {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let mut fields = text.split('\t');
        let token = fields.next().unwrap_or_default();
        if token.is_empty() {
            return Err(IngestError::Parse {
                line,
                message: "empty token".into(),
            });
        }
        let values = fields
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| IngestError::Parse {
                    line,
                    message: format!("bad float {f:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() != dim {
            return Err(IngestError::Dimension {
                line,
                expected: dim,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(IngestError::Parse {
                line,
                message: "non-finite value".into(),
            });
        }
        if store.insert(token, values).is_some() {
            log::warn!("line {line}: duplicate embedding for {token:?}, keeping the last row");
            duplicates.push(token.to_string());
        }
    }
    Ok(LoadedEmbeddings { store, duplicates })
}

pub fn load_relations(path: &Path) -> Result<Vec<NeRelation>, IngestError> {
    parse_relations(open(path)?)
}

pub fn parse_relations<R: BufRead>(reader: R) -> Result<Vec<NeRelation>, IngestError> {
    let mut relations = Vec::new();
    for (line, text) in read_lines(reader) {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&text).map_err(|e| IngestError::Parse {
            line,
            message: e.to_string(),
        })?;
        let rel: NeRelation =
            serde_json::from_value(value).map_err(|e| schema(line, "record", e.to_string()))?;
        if normalize_surface(&rel.a) == normalize_surface(&rel.b) {
            return Err(schema(line, "b", "relation endpoints must differ"));
        }
        relations.push(rel);
    }
    Ok(relations)
}

/// Position of the head token in a phrase: the last token equal to the head
/// lemma (case-insensitive), else the last token.
pub(crate) fn head_position(tokens: &[&str], head: &str) -> usize {
    let head = head.to_lowercase();
    tokens
        .iter()
        .rposition(|t| t.to_lowercase() == head)
        .unwrap_or(tokens.len().saturating_sub(1))
}

/// Every occurrence of `needle` as a contiguous token run in `tokens`.
fn find_spans(tokens: &[&str], needle: &[&str]) -> Vec<(usize, usize)> {
    if needle.is_empty() || needle.len() > tokens.len() {
        return Vec::new();
    }
    (0..=tokens.len() - needle.len())
        .filter(|&s| tokens[s..s + needle.len()] == *needle)
        .map(|s| (s, s + needle.len()))
        .collect()
}

/// Picks the NE whose last token is closest to the head; ties go to the
/// longest surface, then the lexicographically smaller one.
fn primary_ne<'a>(
    rp_text: &str,
    head: &str,
    surfaces: impl IntoIterator<Item = &'a str>,
) -> Option<(String, (usize, usize))> {
    let tokens: Vec<&str> = rp_text.split_whitespace().collect();
    let head_pos = head_position(&tokens, head);
    // ranked by head distance, then longer surface, then surface text
    type Rank = (usize, std::cmp::Reverse<usize>, String, (usize, usize));
    let mut best: Option<Rank> = None;
    for surface in surfaces {
        let surface = normalize_surface(surface);
        let needle: Vec<&str> = surface.split_whitespace().collect();
        for span in find_spans(&tokens, &needle) {
            let dist = (span.1 - 1).abs_diff(head_pos);
            let key = (
                dist,
                std::cmp::Reverse(surface.len()),
                surface.clone(),
                span,
            );
            if best.as_ref().map_or(true, |b| key < *b) {
                best = Some(key);
            }
        }
    }
    best.map(|(_, _, surface, span)| (surface, span))
}

/// Collapses mentions into representative phrases, numbered by sorted
/// `rp_text`.
pub fn derive_rps(mentions: &[Mention]) -> Result<Vec<RepresentativePhrase>, IngestError> {
    let mut groups: BTreeMap<&str, Vec<&Mention>> = BTreeMap::new();
    for m in mentions {
        groups.entry(m.rp_text.as_str()).or_default().push(m);
    }
    let mut rps = Vec::with_capacity(groups.len());
    for (rp_id, (rp_text, members)) in groups.into_iter().enumerate() {
        // members are non-empty by construction
        let head = &members[0].head;
        if let Some(other) = members.iter().find(|m| m.head != *head) {
            let (first, second) = if *head <= other.head {
                (head.clone(), other.head.clone())
            } else {
                (other.head.clone(), head.clone())
            };
            return Err(IngestError::Conflict {
                rp_text: rp_text.to_string(),
                first,
                second,
            });
        }
        let components: BTreeSet<Component> = members
            .iter()
            .flat_map(|m| m.components.iter().cloned())
            .collect();
        let surfaces: BTreeSet<&str> = members
            .iter()
            .flat_map(|m| m.ne_components.iter().map(|ne| ne.surface.as_str()))
            .collect();
        let ne = primary_ne(rp_text, head, surfaces);
        rps.push(RepresentativePhrase {
            rp_id,
            rp_text: rp_text.to_string(),
            head: head.clone(),
            components: components.into_iter().collect(),
            ne_span: ne.as_ref().map(|(_, span)| *span),
            ne: ne.map(|(surface, _)| surface),
            member_mention_ids: members.iter().map(|m| m.mention_id.clone()).collect(),
            is_core: members.iter().any(|m| m.entity_type.is_core()),
        });
    }
    Ok(rps)
}

/// Resolves phrase tokens against the store, greedily taking the longest
/// underscore-joined key at each position and skipping unknown tokens.
pub fn rp_vector_tokens<'s>(
    rp: &RepresentativePhrase,
    store: &'s EmbeddingStore,
) -> Vec<ResolvedToken<'s>> {
    resolve_tokens(&rp.rp_text, store)
}

pub(crate) fn resolve_tokens<'s>(text: &str, store: &'s EmbeddingStore) -> Vec<ResolvedToken<'s>> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start < tokens.len() {
        let hit = (start + 1..=tokens.len()).rev().find_map(|end| {
            let key = tokens[start..end].join("_");
            store.get(&key).map(|v| (key, end, v))
        });
        match hit {
            Some((key, end, vector)) => {
                out.push(ResolvedToken {
                    key,
                    span: (start, end),
                    vector,
                });
                start = end;
            }
            None => start += 1,
        }
    }
    out
}

//! Concept listings: one line per cluster with stage-tagged mentions, plus
//! the unclustered (NOT) mentions.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{Cluster, ClusterKind, Mention, RepresentativePhrase, RpId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Text => "txt",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" | "txt" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format {other:?} (expected text or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRef {
    pub mention_id: String,
    pub doc_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RpEntry {
    pub rp_id: RpId,
    pub rp_text: String,
    pub mentions: Vec<MentionRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptEntry {
    pub cluster_id: usize,
    pub label: String,
    pub kind: ClusterKind,
    pub merged_from: Vec<usize>,
    pub core: Vec<RpEntry>,
    pub body: Vec<RpEntry>,
    pub border: Vec<RpEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptReport {
    pub clusters: Vec<ConceptEntry>,
    pub not: Vec<MentionRef>,
}

/// Orders mentions by the first appearance of their document in the input,
/// then by input position.
struct Appearance<'a> {
    position: HashMap<&'a str, (usize, usize)>,
    by_id: HashMap<&'a str, &'a Mention>,
}

impl<'a> Appearance<'a> {
    fn new(mentions: &'a [Mention]) -> Self {
        let mut doc_rank: HashMap<&str, usize> = HashMap::new();
        let mut position = HashMap::new();
        let mut by_id = HashMap::new();
        for (i, m) in mentions.iter().enumerate() {
            let next = doc_rank.len();
            let rank = *doc_rank.entry(m.doc_id.as_str()).or_insert(next);
            position.entry(m.mention_id.as_str()).or_insert((rank, i));
            by_id.entry(m.mention_id.as_str()).or_insert(m);
        }
        Self { position, by_id }
    }

    fn key(&self, mention_id: &str) -> (usize, usize) {
        self.position
            .get(mention_id)
            .copied()
            .unwrap_or((usize::MAX, usize::MAX))
    }

    fn mention_ref(&self, mention_id: &str) -> MentionRef {
        match self.by_id.get(mention_id) {
            Some(m) => MentionRef {
                mention_id: m.mention_id.clone(),
                doc_id: m.doc_id.clone(),
                text: m.text.clone(),
            },
            None => MentionRef {
                mention_id: mention_id.to_string(),
                doc_id: String::new(),
                text: String::new(),
            },
        }
    }

    fn rp_entries(&self, ids: &BTreeSet<RpId>, rps: &[RepresentativePhrase]) -> Vec<RpEntry> {
        let mut entries: Vec<((usize, usize), RpEntry)> = ids
            .iter()
            .map(|&id| {
                let rp = &rps[id];
                let mut ms: Vec<&String> = rp.member_mention_ids.iter().collect();
                ms.sort_by_key(|m| self.key(m));
                let first = ms.first().map_or((usize::MAX, usize::MAX), |m| self.key(m));
                let entry = RpEntry {
                    rp_id: id,
                    rp_text: rp.rp_text.clone(),
                    mentions: ms.into_iter().map(|m| self.mention_ref(m)).collect(),
                };
                (first, entry)
            })
            .collect();
        entries.sort_by_key(|(k, e)| (*k, e.rp_id));
        entries.into_iter().map(|(_, e)| e).collect()
    }
}

/// Most frequent core RP by mention count, ties to the lowest rp_id; clusters
/// without core members fall back to all members.
pub fn cluster_label(cluster: &Cluster, rps: &[RepresentativePhrase]) -> String {
    let pool = if cluster.core_members.is_empty() {
        cluster.members()
    } else {
        cluster.core_members.clone()
    };
    pool.iter()
        .max_by_key(|&&id| (rps[id].mention_count(), std::cmp::Reverse(id)))
        .map(|&id| rps[id].rp_text.clone())
        .unwrap_or_default()
}

impl ConceptReport {
    pub fn build(clusters: &[Cluster], rps: &[RepresentativePhrase], mentions: &[Mention]) -> Self {
        let order = Appearance::new(mentions);
        let mut sorted: Vec<&Cluster> = clusters.iter().collect();
        sorted.sort_by_key(|c| c.cluster_id);
        let entries = sorted
            .iter()
            .map(|c| ConceptEntry {
                cluster_id: c.cluster_id,
                label: cluster_label(c, rps),
                kind: c.kind,
                merged_from: c.merged_from.clone(),
                core: order.rp_entries(&c.core_members, rps),
                body: order.rp_entries(&c.body_members, rps),
                border: order.rp_entries(&c.border_members, rps),
            })
            .collect();
        let clustered: BTreeSet<RpId> = clusters.iter().flat_map(Cluster::members).collect();
        let mut not: Vec<&str> = rps
            .iter()
            .filter(|r| !clustered.contains(&r.rp_id))
            .flat_map(|r| r.member_mention_ids.iter().map(String::as_str))
            .collect();
        not.sort_by_key(|m| order.key(m));
        Self {
            clusters: entries,
            not: not.into_iter().map(|m| order.mention_ref(m)).collect(),
        }
    }

    /// Every mention id listed in the report, with multiplicity.
    pub fn mention_ids(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .clusters
            .iter()
            .flat_map(|c| c.core.iter().chain(&c.body).chain(&c.border))
            .flat_map(|e| e.mentions.iter().map(|m| m.mention_id.as_str()))
            .collect();
        out.extend(self.not.iter().map(|m| m.mention_id.as_str()));
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            ReportFormat::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.clusters {
            let _ = write!(out, "[{}] {} —", c.cluster_id, c.label);
            for (keyword, section) in [("CORE", &c.core), ("BODY", &c.body), ("BORDER", &c.border)]
            {
                if section.is_empty() {
                    continue;
                }
                let _ = write!(out, " {keyword}: {}", unique_texts(section).join(", "));
            }
            out.push('\n');
        }
        let mut seen = BTreeSet::new();
        let not: Vec<&str> = self
            .not
            .iter()
            .map(|m| m.text.as_str())
            .filter(|t| seen.insert(*t))
            .collect();
        let _ = writeln!(out, "NOT — {}", not.join(", "));
        out
    }
}

/// Distinct mention texts of a section, in listing order.
fn unique_texts(section: &[RpEntry]) -> Vec<&str> {
    let mut seen = BTreeSet::new();
    section
        .iter()
        .flat_map(|e| e.mentions.iter().map(|m| m.text.as_str()))
        .filter(|t| seen.insert(*t))
        .collect()
}

/// Builds and renders the concept report.
pub fn render_report(
    clusters: &[Cluster],
    rps: &[RepresentativePhrase],
    mentions: &[Mention],
    format: ReportFormat,
) -> String {
    ConceptReport::build(clusters, rps, mentions).render(format)
}

//! Domain types shared by every pipeline stage.
//!
//! A [`Mention`] is one extracted noun phrase; mentions sharing a
//! representative phrase collapse into one [`RepresentativePhrase`], which is
//! the unit every similarity matrix and cluster is defined over.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Dense index of a representative phrase, assigned by sorted `rp_text`.
pub type RpId = usize;

/// Upper bound on mention length in whitespace-separated tokens.
pub const MAX_MENTION_TOKENS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityType {
    #[serde(rename = "person-nes")]
    PersonNes,
    #[serde(rename = "person-nns")]
    PersonNns,
    #[serde(rename = "person-nn")]
    PersonNn,
    #[serde(rename = "group")]
    Group,
}

impl EntityType {
    /// Plural persons, NE or not: the mentions that seed cluster cores.
    pub fn is_core(self) -> bool {
        matches!(self, EntityType::PersonNes | EntityType::PersonNns)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::PersonNes => "person-nes",
            EntityType::PersonNns => "person-nns",
            EntityType::PersonNn => "person-nn",
            EntityType::Group => "group",
        }
    }
}

/// Dependency role of a phrase component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentRole {
    Head,
    Compound,
    Amod,
    Nmod,
    Nummod,
    Appos,
}

impl ComponentRole {
    /// Roles that make up a representative phrase. Appositions only enter at
    /// the merge stage.
    pub fn in_phrase(self) -> bool {
        !matches!(self, ComponentRole::Appos)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Component {
    pub lemma: String,
    pub role: ComponentRole,
}

impl Component {
    pub fn new(lemma: impl Into<String>, role: ComponentRole) -> Self {
        Self {
            lemma: lemma.into(),
            role,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NeComponent {
    pub surface: String,
    pub label: String,
}

/// One noun-phrase occurrence referring to a group of persons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mention {
    pub mention_id: String,
    pub doc_id: String,
    pub text: String,
    pub entity_type: EntityType,
    pub rp_text: String,
    pub head: String,
    pub components: Vec<Component>,
    #[serde(default)]
    pub ne_components: Vec<NeComponent>,
}

/// Deduplicated clustering unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativePhrase {
    pub rp_id: RpId,
    pub rp_text: String,
    pub head: String,
    /// Union of member components, sorted and deduplicated by `(lemma, role)`.
    pub components: Vec<Component>,
    /// The NE surface nearest the head, normalized.
    pub ne: Option<String>,
    /// Token span of `ne` inside `rp_text`, half-open.
    pub ne_span: Option<(usize, usize)>,
    pub member_mention_ids: BTreeSet<String>,
    pub is_core: bool,
}

impl RepresentativePhrase {
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.rp_text.split_whitespace()
    }

    /// Lowercased lemmas of the phrase-level components.
    pub fn lemma_set(&self) -> BTreeSet<String> {
        self.components
            .iter()
            .filter(|c| c.role.in_phrase())
            .map(|c| c.lemma.to_lowercase())
            .collect()
    }

    pub fn mention_count(&self) -> usize {
        self.member_mention_ids.len()
    }
}

/// Every threshold and constant the pipeline reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Grid weight for two NEs of one chain.
    pub wt: f64,
    /// Minimum phrase cosine kept in SP.
    pub thr_sim_rp: f64,
    pub body_thr: f64,
    pub border_min_links: usize,
    pub noncore_thr: f64,
    pub merge_thr: f64,
    pub or_thr_base: f64,
    pub or_thr_cap: f64,
    pub or_thr_log_base: f64,
    pub hc_distance_thr: f64,
    pub embedding_dim: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            wt: 1.7,
            thr_sim_rp: 0.4,
            body_thr: 0.5,
            border_min_links: 2,
            noncore_thr: 0.5,
            merge_thr: 0.6,
            or_thr_base: 0.5,
            or_thr_cap: 0.7,
            or_thr_log_base: 5000.0,
            hc_distance_thr: 0.7,
            embedding_dim: 300,
        }
    }
}

fn in_range(field: &'static str, value: f64, min: f64, max: f64) -> Result<(), ConfigError> {
    if (min..=max).contains(&value) {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange {
            field,
            value,
            min,
            max,
        })
    }
}

fn ordered(
    lower: &'static str,
    lower_value: f64,
    upper: &'static str,
    upper_value: f64,
) -> Result<(), ConfigError> {
    if lower_value <= upper_value {
        Ok(())
    } else {
        Err(ConfigError::Ordering {
            lower,
            lower_value,
            upper,
            upper_value,
        })
    }
}

impl PipelineConfig {
    /// Returns the config unchanged if every bound holds, else the first
    /// violated one.
    pub fn validate(self) -> Result<Self, ConfigError> {
        if !self.wt.is_finite() || self.wt <= 0.0 {
            return Err(ConfigError::NotPositive {
                field: "wt",
                value: self.wt,
            });
        }
        in_range("thr_sim_rp", self.thr_sim_rp, 0.0, 1.0)?;
        in_range("body_thr", self.body_thr, 0.0, 1.0)?;
        ordered("thr_sim_rp", self.thr_sim_rp, "body_thr", self.body_thr)?;
        if self.border_min_links == 0 {
            return Err(ConfigError::NotPositive {
                field: "border_min_links",
                value: 0.0,
            });
        }
        in_range("noncore_thr", self.noncore_thr, 0.0, 1.0)?;
        in_range("merge_thr", self.merge_thr, 0.0, 1.0)?;
        in_range("or_thr_base", self.or_thr_base, 0.0, 1.0)?;
        in_range("or_thr_cap", self.or_thr_cap, 0.0, 1.0)?;
        ordered(
            "or_thr_base",
            self.or_thr_base,
            "or_thr_cap",
            self.or_thr_cap,
        )?;
        // log base must exceed 1 for the threshold to grow with corpus size
        if !self.or_thr_log_base.is_finite() || self.or_thr_log_base <= 1.0 {
            return Err(ConfigError::OutOfRange {
                field: "or_thr_log_base",
                value: self.or_thr_log_base,
                min: 1.0,
                max: f64::MAX,
            });
        }
        in_range("hc_distance_thr", self.hc_distance_thr, 0.0, 2.0)?;
        if self.embedding_dim == 0 {
            return Err(ConfigError::NotPositive {
                field: "embedding_dim",
                value: 0.0,
            });
        }
        Ok(self)
    }

    /// Parses a flat JSON object; missing keys take defaults, unknown keys fail.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterKind {
    Staged,
    Noncore,
}

/// A cluster with its members tagged by the stage that admitted them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub cluster_id: usize,
    pub core_members: BTreeSet<RpId>,
    pub body_members: BTreeSet<RpId>,
    pub border_members: BTreeSet<RpId>,
    pub kind: ClusterKind,
    /// Predecessor ids when this cluster is the result of a merge, else empty.
    pub merged_from: Vec<usize>,
}

impl Cluster {
    pub fn staged(cluster_id: usize, core: BTreeSet<RpId>) -> Self {
        Self {
            cluster_id,
            core_members: core,
            body_members: BTreeSet::new(),
            border_members: BTreeSet::new(),
            kind: ClusterKind::Staged,
            merged_from: Vec::new(),
        }
    }

    pub fn noncore(cluster_id: usize, members: BTreeSet<RpId>) -> Self {
        Self {
            cluster_id,
            core_members: BTreeSet::new(),
            body_members: members,
            border_members: BTreeSet::new(),
            kind: ClusterKind::Noncore,
            merged_from: Vec::new(),
        }
    }

    pub fn members(&self) -> BTreeSet<RpId> {
        self.core_members
            .iter()
            .chain(&self.body_members)
            .chain(&self.border_members)
            .copied()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.core_members.len() + self.body_members.len() + self.border_members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, rp: RpId) -> bool {
        self.core_members.contains(&rp)
            || self.body_members.contains(&rp)
            || self.border_members.contains(&rp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_accepted() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.clone().validate(), Ok(cfg));
    }

    #[test]
    fn zero_wt_is_rejected() {
        let cfg = PipelineConfig {
            wt: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::NotPositive { field: "wt", .. })
        ));
    }

    #[test]
    fn phrase_threshold_above_body_threshold_is_rejected() {
        let cfg = PipelineConfig {
            thr_sim_rp: 0.6,
            body_thr: 0.5,
            ..Default::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::Ordering {
                lower: "thr_sim_rp",
                upper: "body_thr",
                ..
            })
        ));
    }

    #[test]
    fn or_threshold_bounds_must_be_ordered() {
        let cfg = PipelineConfig {
            or_thr_base: 0.8,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        assert!(PipelineConfig::from_json(r#"{"wt": 1.7, "alpha": 2}"#).is_err());
        let cfg = PipelineConfig::from_json(r#"{"embedding_dim": 8}"#).unwrap();
        assert_eq!(cfg.embedding_dim, 8);
        assert_eq!(cfg.wt, 1.7);
    }

    #[test]
    fn entity_type_wire_names() {
        let t: EntityType = serde_json::from_str("\"person-nns\"").unwrap();
        assert_eq!(t, EntityType::PersonNns);
        assert!(serde_json::from_str::<EntityType>("\"location\"").is_err());
        assert!(t.is_core());
        assert!(!EntityType::PersonNn.is_core());
        assert!(!EntityType::Group.is_core());
    }
}

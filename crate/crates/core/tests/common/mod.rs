#![allow(dead_code)]

pub mod fixture;
pub mod oracle;

use std::collections::BTreeSet;

use actor_concepts::{Cluster, RpId};

/// Cluster contents without lineage noise, for set comparisons.
pub fn shape(c: &Cluster) -> (usize, BTreeSet<RpId>, BTreeSet<RpId>, BTreeSet<RpId>) {
    (
        c.cluster_id,
        c.core_members.clone(),
        c.body_members.clone(),
        c.border_members.clone(),
    )
}

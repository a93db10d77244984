//! Chain collection over a graph whose nodes may forbid each other.
//!
//! Starting from the smallest unassigned node, a chain repeatedly absorbs the
//! smallest-index node that is adjacent to some chain member and compatible
//! with all of them. A chain is complete when no such node remains. Without
//! incompatibilities this yields exactly the connected components.

use std::collections::BTreeSet;

/// Grows chains over nodes `0..adjacency.len()`. `compatible(chain, node)`
/// decides whether `node` may join `chain`; it must be monotone (a node
/// rejected by a chain stays rejected as the chain grows).
///
/// Every node ends up in exactly one returned chain; chains are ordered by
/// their seed and each is sorted.
pub(crate) fn grow_chains<F>(adjacency: &[Vec<usize>], mut compatible: F) -> Vec<Vec<usize>>
where
    F: FnMut(&[usize], usize) -> bool,
{
    let n = adjacency.len();
    let mut assigned = vec![false; n];
    let mut chains = Vec::new();
    for seed in 0..n {
        if assigned[seed] {
            continue;
        }
        assigned[seed] = true;
        let mut chain = vec![seed];
        let mut frontier: BTreeSet<usize> = adjacency[seed]
            .iter()
            .copied()
            .filter(|&v| !assigned[v])
            .collect();
        while let Some(next) = frontier.pop_first() {
            if assigned[next] || !compatible(&chain, next) {
                continue;
            }
            assigned[next] = true;
            chain.push(next);
            frontier.extend(adjacency[next].iter().copied().filter(|&v| !assigned[v]));
        }
        chain.sort_unstable();
        chains.push(chain);
    }
    chains
}

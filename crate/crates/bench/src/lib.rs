//! Synthetic corpora for benchmarking. Phrases of two or three words drawn
//! from a vocabulary of noisy topic vectors; no named entities.

use std::collections::BTreeSet;

use actor_concepts::{Component, ComponentRole, EmbeddingStore, EntityType, Mention};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Corpus {
    pub mentions: Vec<Mention>,
    pub store: EmbeddingStore,
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
    v.into_iter().map(|x| x / norm).collect()
}

/// `n` distinct phrases over `dim`-dimensional vectors, half of them core.
pub fn corpus(n: usize, dim: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics: Vec<Vec<f64>> = (0..8).map(|_| unit(&mut rng, dim)).collect();
    let vocab = ((n as f64).sqrt() as usize * 2).max(16);
    let mut store = EmbeddingStore::new(dim);
    for w in 0..vocab {
        let noise = unit(&mut rng, dim);
        let t = &topics[w % topics.len()];
        store.insert(
            format!("w{w}"),
            t.iter().zip(&noise).map(|(a, b)| a + 0.3 * b).collect(),
        );
    }

    let mut seen = BTreeSet::new();
    let mut mentions = Vec::with_capacity(n);
    while mentions.len() < n {
        let len = rng.gen_range(2..=3);
        let words: Vec<String> = (0..len)
            .map(|_| format!("w{}", rng.gen_range(0..vocab)))
            .collect();
        let rp_text = words.join(" ");
        if !seen.insert(rp_text.clone()) {
            continue;
        }
        let head = words[len - 1].clone();
        let mut components = vec![Component::new(head.clone(), ComponentRole::Head)];
        components.extend(
            words[..len - 1]
                .iter()
                .map(|w| Component::new(w.clone(), ComponentRole::Amod)),
        );
        let i = mentions.len();
        mentions.push(Mention {
            mention_id: format!("m{i}"),
            doc_id: format!("d{}", i % 7),
            text: rp_text.clone(),
            entity_type: if i % 2 == 0 {
                EntityType::PersonNns
            } else {
                EntityType::Group
            },
            rp_text,
            head,
            components,
            ne_components: Vec::new(),
        });
    }
    Corpus { mentions, store }
}

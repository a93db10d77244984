//! Seeded random corpora: 8-50 RPs over 8-dim topic vectors, with 2-4 NE
//! chains whose surfaces are deliberately close in vector space so that only
//! the grid keeps them apart.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use actor_concepts::{
    ChainType, Component, ComponentRole, EmbeddingStore, EntityType, Mention, NeComponent,
    NeRelation,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DIM: usize = 8;
const HEADS: usize = 6;
const MODIFIERS: usize = 8;
const TOPICS: usize = 3;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub mentions: Vec<Mention>,
    pub store: EmbeddingStore,
    pub relations: Vec<NeRelation>,
}

pub struct FixturePaths {
    pub mentions: PathBuf,
    pub embeddings: PathBuf,
    pub relations: PathBuf,
}

fn noisy(rng: &mut ChaCha8Rng, base: &[f64], scale: f64) -> Vec<f64> {
    base.iter()
        .map(|b| b + rng.gen_range(-scale..scale))
        .collect()
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn add(a: &[f64], b: &[f64], wb: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + wb * y).collect()
}

pub fn random_fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = EmbeddingStore::new(DIM);

    let topics: Vec<Vec<f64>> = (0..TOPICS).map(|_| random_unit(&mut rng, DIM)).collect();
    let nationality = random_unit(&mut rng, DIM);

    // chains: the first two are cn, the rest random; op chains sometimes
    // reuse a cn surface to exercise cross-type membership
    let n_chains = rng.gen_range(2..=4);
    let mut surfaces: Vec<String> = Vec::new();
    let mut relations = Vec::new();
    for c in 0..n_chains {
        let ty = if c < 2 || rng.gen_bool(0.5) {
            ChainType::Cn
        } else {
            ChainType::Op
        };
        let stem = match ty {
            ChainType::Cn => format!("Land{c}"),
            ChainType::Op => format!("Org{c}"),
        };
        let size = rng.gen_range(2..=3);
        let mut members: Vec<String> = ["", "ian", "ers"][..size]
            .iter()
            .map(|suffix| format!("{stem}{suffix}"))
            .collect();
        if ty == ChainType::Op && rng.gen_bool(0.3) {
            members.push("Land0ian".to_string());
        }
        let own = add(&nationality, &random_unit(&mut rng, DIM), 0.7);
        for m in &members {
            if !store.contains(m) {
                let v = noisy(&mut rng, &own, 0.25);
                store.insert(m.clone(), v);
            }
        }
        for w in members.windows(2) {
            relations.push(NeRelation {
                a: w[0].clone(),
                b: w[1].clone(),
                chain_type: ty,
            });
        }
        if members.len() > 2 && rng.gen_bool(0.3) {
            relations.push(NeRelation {
                a: format!("the {}", members[members.len() - 1]),
                b: members[0].clone(),
                chain_type: ty,
            });
        }
        surfaces.extend(members);
    }
    surfaces.sort();
    surfaces.dedup();
    let free_ne = "Freeland".to_string();
    store.insert(free_ne.clone(), noisy(&mut rng, &nationality, 0.4));

    let heads: Vec<String> = (0..HEADS).map(|h| format!("h{h}")).collect();
    for (i, h) in heads.iter().enumerate() {
        let v = noisy(&mut rng, &topics[i % TOPICS], 0.35);
        store.insert(h.clone(), v);
    }
    let modifiers: Vec<String> = (0..MODIFIERS).map(|m| format!("m{m}")).collect();
    for m in &modifiers {
        let t = rng.gen_range(0..TOPICS);
        let v = noisy(&mut rng, &topics[t], 0.6);
        store.insert(m.clone(), v);
    }
    // a multi-word key that greedy lookup prefers over its parts
    let joint = noisy(&mut rng, &topics[0], 0.3);
    store.insert("m0_m1", joint);

    let roles = [
        ComponentRole::Amod,
        ComponentRole::Compound,
        ComponentRole::Nmod,
        ComponentRole::Nummod,
    ];
    let target = rng.gen_range(8..=50);
    let mut seen = BTreeSet::new();
    let mut mentions = Vec::new();
    let mut attempts = 0;
    while seen.len() < target && attempts < 10_000 {
        attempts += 1;
        let ne = match rng.gen_range(0..100) {
            0..=44 => Some(surfaces[rng.gen_range(0..surfaces.len())].clone()),
            45..=49 => Some(free_ne.clone()),
            _ => None,
        };
        let n_mods = rng.gen_range(0..=2);
        let mut mods: Vec<&String> = modifiers.choose_multiple(&mut rng, n_mods).collect();
        mods.sort();
        let head = if rng.gen_bool(0.08) {
            "hx".to_string()
        } else {
            heads[rng.gen_range(0..HEADS)].clone()
        };
        let mut tokens: Vec<&str> = Vec::new();
        if let Some(ne) = &ne {
            tokens.push(ne);
        }
        tokens.extend(mods.iter().map(|m| m.as_str()));
        tokens.push(&head);
        let rp_text = tokens.join(" ");
        if !seen.insert(rp_text.clone()) {
            continue;
        }

        let mut components = vec![Component::new(head.clone(), ComponentRole::Head)];
        for m in &mods {
            components.push(Component::new(m.as_str(), *roles.choose(&mut rng).unwrap()));
        }
        if let Some(ne) = &ne {
            components.push(Component::new(ne.clone(), ComponentRole::Compound));
        }
        if rng.gen_bool(0.15) {
            let m = modifiers.choose(&mut rng).unwrap();
            components.push(Component::new(m.clone(), ComponentRole::Appos));
        }
        let ne_components: Vec<NeComponent> = ne
            .iter()
            .map(|s| NeComponent {
                surface: s.clone(),
                label: "NORP".into(),
            })
            .collect();
        let core = rng.gen_bool(0.6);
        for k in 0..rng.gen_range(1..=3) {
            let entity_type = match (core, k) {
                (true, 0) => {
                    if ne.is_some() {
                        EntityType::PersonNes
                    } else {
                        EntityType::PersonNns
                    }
                }
                _ => *[EntityType::PersonNn, EntityType::Group]
                    .choose(&mut rng)
                    .unwrap(),
            };
            let text = if rng.gen_bool(0.3) {
                format!("the {rp_text}")
            } else {
                rp_text.clone()
            };
            mentions.push(Mention {
                mention_id: String::new(),
                doc_id: format!("d{}", rng.gen_range(0..4)),
                text,
                entity_type,
                rp_text: rp_text.clone(),
                head: head.clone(),
                components: components.clone(),
                ne_components: ne_components.clone(),
            });
        }
    }
    mentions.shuffle(&mut rng);
    for (i, m) in mentions.iter_mut().enumerate() {
        m.mention_id = format!("m{i:03}");
    }
    Fixture {
        mentions,
        store,
        relations,
    }
}

/// Large synthetic corpus for scaling checks: `n` distinct RPs of two or
/// three tokens over a random `dim`-dimensional vocabulary.
pub fn scaling_fixture(n: usize, dim: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = EmbeddingStore::new(dim);
    let vocab = ((n as f64).sqrt() as usize * 2).max(16);
    let topics: Vec<Vec<f64>> = (0..8).map(|_| random_unit(&mut rng, dim)).collect();
    for w in 0..vocab {
        let t = &topics[w % topics.len()];
        let v = noisy(&mut rng, t, 0.08);
        store.insert(format!("w{w}"), v);
    }
    let mut seen = BTreeSet::new();
    let mut mentions = Vec::with_capacity(n);
    while seen.len() < n {
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
        mentions.push(Mention {
            mention_id: format!("m{}", mentions.len()),
            doc_id: format!("d{}", mentions.len() % 7),
            text: rp_text.clone(),
            entity_type: if rng.gen_bool(0.5) {
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
    Fixture {
        mentions,
        store,
        relations: Vec::new(),
    }
}

impl Fixture {
    pub fn embeddings_tsv(&self) -> String {
        let mut out = String::new();
        for k in self.store.tokens() {
            out.push_str(k);
            for x in self.store.get(k).unwrap() {
                let _ = write!(out, "\t{x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, dir: &Path) -> FixturePaths {
        fs::create_dir_all(dir).unwrap();
        let paths = FixturePaths {
            mentions: dir.join("mentions.jsonl"),
            embeddings: dir.join("embeddings.tsv"),
            relations: dir.join("ne_relations.jsonl"),
        };
        let mentions: String = self
            .mentions
            .iter()
            .map(|m| serde_json::to_string(m).unwrap() + "\n")
            .collect();
        let relations: String = self
            .relations
            .iter()
            .map(|r| serde_json::to_string(r).unwrap() + "\n")
            .collect();
        fs::write(&paths.mentions, mentions).unwrap();
        fs::write(&paths.embeddings, self.embeddings_tsv()).unwrap();
        fs::write(&paths.relations, relations).unwrap();
        paths
    }
}

/// Repository-level fixture directory.
pub fn fixture_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// Loads a committed fixture through the public ingest functions.
pub fn load_fixture(name: &str) -> (Fixture, actor_concepts::PipelineConfig) {
    use actor_concepts::{ingest, PipelineConfig};
    let dir = fixture_dir(name);
    let cfg = PipelineConfig::from_json(&fs::read_to_string(dir.join("config.json")).unwrap())
        .unwrap()
        .validate()
        .unwrap();
    let fixture = Fixture {
        mentions: ingest::load_mentions(&dir.join("mentions.jsonl")).unwrap(),
        store: ingest::load_embeddings(&dir.join("embeddings.tsv"), cfg.embedding_dim)
            .unwrap()
            .store,
        relations: ingest::load_relations(&dir.join("ne_relations.jsonl")).unwrap(),
    };
    (fixture, cfg)
}

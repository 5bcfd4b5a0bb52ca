//! Seeded random hypergraphs, instances and linearizations.
//!
//! Edge sizes are uniform in `2..=min(4, n)` and members are uniform among
//! subsets of that size, so a seed fixes every draw.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linearization::Linearization;
use crate::model::{Hypergraph, MultilinearInstance, VarSet};
use crate::rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub min_vars: u32,
    pub max_vars: u32,
    /// At least one edge is drawn; duplicates collapse, so fewer may remain.
    pub max_edges: usize,
}

impl SamplerConfig {
    pub const fn new(min_vars: u32, max_vars: u32, max_edges: usize) -> Self {
        SamplerConfig { min_vars, max_vars, max_edges }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_hypergraph<R: Rng>(rng: &mut R, cfg: SamplerConfig) -> Hypergraph {
    let n = rng.gen_range(cfg.min_vars.max(2)..=cfg.max_vars.max(2));
    let count = rng.gen_range(1..=cfg.max_edges.max(1));
    let ground: Vec<u32> = (1..=n).collect();
    let edges: Vec<Vec<u32>> = (0..count)
        .map(|_| {
            let size = rng.gen_range(2..=n.min(4)) as usize;
            ground.choose_multiple(rng, size).copied().collect()
        })
        .collect();
    Hypergraph::new(n, &edges).expect("sampled edges are valid")
}

/// Objective coefficients uniform in `-3..=3` on every edge and singleton; no constraints.
pub fn random_instance<R: Rng>(rng: &mut R, cfg: SamplerConfig) -> MultilinearInstance {
    let g = random_hypergraph(rng, cfg);
    let objective = g
        .keys()
        .into_iter()
        .map(|k| (rational::int(rng.gen_range(-3..=3)), k.members().to_vec()))
        .collect();
    MultilinearInstance::from_monomials(g.num_vars(), objective, vec![]).expect("sampled instance is valid")
}

/// Random cover of `node` by two or three strict subsets; with some
/// probability one element is shared between two parts.
fn random_cover<R: Rng>(rng: &mut R, node: &VarSet) -> Vec<VarSet> {
    let members = node.members();
    let parts = if members.len() >= 3 && rng.gen_bool(0.3) { 3 } else { 2 };
    let mut shuffled = members.to_vec();
    shuffled.shuffle(rng);
    let mut blocks: Vec<Vec<u32>> = vec![Vec::new(); parts];
    for (i, v) in shuffled.iter().enumerate() {
        let b = if i < parts { i } else { rng.gen_range(0..parts) };
        blocks[b].push(*v);
    }
    if rng.gen_bool(0.3) {
        let v = *members.choose(rng).expect("non-empty");
        let b = rng.gen_range(0..parts);
        if !blocks[b].contains(&v) && blocks[b].len() + 1 < members.len() {
            blocks[b].push(v);
        }
    }
    blocks.into_iter().map(|b| VarSet::new(b).expect("non-empty block")).collect()
}

/// A random recursive linearization of `g`: each edge and each created
/// node is covered by two or three strict subsets, reusing nodes by set.
pub fn random_linearization<R: Rng>(rng: &mut R, g: &Hypergraph) -> Linearization {
    let mut succ: BTreeMap<VarSet, BTreeSet<VarSet>> = BTreeMap::new();
    let mut queue: VecDeque<VarSet> = g.edges().iter().cloned().collect();
    while let Some(node) = queue.pop_front() {
        if node.len() < 2 || succ.contains_key(&node) {
            continue;
        }
        let parts: BTreeSet<VarSet> = random_cover(rng, &node).into_iter().collect();
        queue.extend(parts.iter().cloned());
        succ.insert(node, parts);
    }
    let nodes: Vec<VarSet> = succ.keys().cloned().collect();
    let arcs = succ.into_iter().flat_map(|(n, out)| out.into_iter().map(move |o| (n.clone(), o)));
    Linearization::new(g.num_vars(), nodes, arcs).expect("random covers are valid")
}

//! Seeded generators shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treehom_core::text::parse_structure;
use treehom_core::{ConstraintStructure, NodeId, StructureBuilder};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` nodes; every ordered pair (self-loops included) gets an `lt` edge
/// with probability `p_lt` and an `inc` edge with probability `p_inc`.
pub fn random_structure(rng: &mut impl Rng, n: usize, p_lt: f64, p_inc: f64) -> ConstraintStructure {
    let mut b = StructureBuilder::new();
    let ids: Vec<NodeId> = (0..n).map(|i| b.add_node(&format!("v{i}")).unwrap()).collect();
    for &x in &ids {
        for &y in &ids {
            // loops are rarer than other edges
            let scale = if x == y { 0.1 } else { 1.0 };
            if rng.gen_bool(p_lt * scale) {
                b.add_lt(x, y);
            }
            if rng.gen_bool(p_inc * scale) {
                b.add_inc(x, y);
            }
        }
    }
    b.build()
}

/// Edge densities the random sweeps cycle through, as `(p_lt, p_inc)`.
pub const DENSITIES: [(f64, f64); 6] = [(0.05, 0.0), (0.1, 0.05), (0.15, 0.1), (0.25, 0.1), (0.35, 0.2), (0.5, 0.3)];

/// The `i`-th structure of a seeded sweep with up to `max_n` nodes.
pub fn sweep_instance(seed: u64, i: usize, max_n: usize) -> ConstraintStructure {
    let mut r = rng(seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
    let n = r.gen_range(1..=max_n);
    let (p_lt, p_inc) = DENSITIES[i % DENSITIES.len()];
    random_structure(&mut r, n, p_lt, p_inc)
}

/// Random semi-linear order on at most `max_n` nodes: a random forest on
/// up to `max_n + 4` nodes, restricted to a random subset, with the full
/// incomparability relation as `inc`.
pub fn random_semilinear(rng: &mut impl Rng, max_n: usize) -> ConstraintStructure {
    let total = rng.gen_range(1..=max_n + 4);
    let parent: Vec<Option<usize>> = (0..total)
        .map(|i| if i == 0 || rng.gen_bool(0.15) { None } else { Some(rng.gen_range(0..i)) })
        .collect();
    let ancestor = |mut a: usize, b: usize| {
        // strict ancestor test along parent links
        while let Some(p) = parent[a] {
            if p == b {
                return true;
            }
            a = p;
        }
        false
    };
    let mut keep: Vec<usize> = (0..total).collect();
    keep.shuffle(rng);
    keep.truncate(rng.gen_range(1..=max_n.min(total)));
    keep.sort_unstable();
    let mut b = StructureBuilder::new();
    let ids: Vec<NodeId> = keep.iter().map(|i| b.add_node(&format!("t{i}")).unwrap()).collect();
    for (x, &i) in keep.iter().enumerate() {
        for (y, &j) in keep.iter().enumerate() {
            if i == j {
                continue;
            }
            if ancestor(j, i) {
                b.add_lt(ids[x], ids[y]);
            } else if !ancestor(i, j) {
                b.add_inc(ids[x], ids[y]);
            }
        }
    }
    b.build()
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus(name: &str) -> ConstraintStructure {
    let path = corpus_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_structure(&text).unwrap()
}

/// All corpus files, sorted by name.
pub fn corpus_files() -> Vec<(String, ConstraintStructure)> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".cg"))
        .collect();
    names.sort();
    names.into_iter().map(|n| (n.clone(), corpus(&n))).collect()
}

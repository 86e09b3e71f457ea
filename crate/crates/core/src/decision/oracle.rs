//! Brute-force searches that share no code with the fixpoint. They exist to
//! cross-check the decision procedures on small inputs.

use crate::error::{check_limit, Result};
use crate::structure::{ConstraintStructure, EdgeKind, NodeId, StructureBuilder};

pub const EXTENSION_ORACLE_LIMIT: usize = 5;
pub const TREE_ORACLE_NODE_LIMIT: usize = 5;
pub const TREE_ORACLE_HEIGHT_LIMIT: usize = 3;
pub const TREE_ORACLE_BRANCHING_LIMIT: usize = 6;

/// A strict partial order on the nodes of a structure, given as a relation
/// matrix `less[x][y]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibleOrder {
    less: Vec<Vec<bool>>,
}

impl CompatibleOrder {
    pub fn less(&self, x: NodeId, y: NodeId) -> bool {
        self.less[x.0][y.0]
    }

    pub fn pairs(&self) -> Vec<(NodeId, NodeId)> {
        let n = self.less.len();
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if self.less[x][y] {
                    out.push((NodeId(x), NodeId(y)));
                }
            }
        }
        out
    }

    /// The order as a structure on the same labels, with `inc` set to the
    /// full incomparability relation.
    pub fn to_structure(&self, base: &ConstraintStructure) -> ConstraintStructure {
        let n = self.less.len();
        let mut b = StructureBuilder::new();
        for id in base.nodes() {
            b.add_node(base.label(id)).expect("labels come from a valid structure");
        }
        for x in 0..n {
            for y in 0..n {
                if self.less[x][y] {
                    b.add_edge(EdgeKind::Lt, NodeId(x), NodeId(y));
                } else if x != y && !self.less[y][x] {
                    b.add_edge(EdgeKind::Inc, NodeId(x), NodeId(y));
                }
            }
        }
        b.build()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum PairChoice {
    Below,
    Above,
    Apart,
}

/// Searches for a semi-linear order `<|` on the nodes with `lt ⊆ <|` and
/// `inc ⊆` incomparability of `<|`. Exhaustive over the three-way choice for
/// every unordered pair, pruning on transitivity.
pub fn extension_oracle(s: &ConstraintStructure) -> Result<Option<CompatibleOrder>> {
    check_limit("node count", s.len(), EXTENSION_ORACLE_LIMIT)?;
    let n = s.len();
    for v in s.nodes() {
        if s.has_lt(v, v) || s.has_inc(v, v) {
            return Ok(None);
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut allowed = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let (a, b) = (NodeId(i), NodeId(j));
        let fwd = s.has_lt(a, b);
        let bwd = s.has_lt(b, a);
        let inc = s.has_inc(a, b) || s.has_inc(b, a);
        let options: Vec<PairChoice> = [PairChoice::Below, PairChoice::Above, PairChoice::Apart]
            .into_iter()
            .filter(|c| match c {
                PairChoice::Below => !bwd && !inc,
                PairChoice::Above => !fwd && !inc,
                PairChoice::Apart => !fwd && !bwd,
            })
            .collect();
        if options.is_empty() {
            return Ok(None);
        }
        allowed.push(options);
    }
    let mut less = vec![vec![false; n]; n];
    let mut decided = vec![vec![false; n]; n];
    if search(0, &pairs, &allowed, &mut less, &mut decided) {
        Ok(Some(CompatibleOrder { less }))
    } else {
        Ok(None)
    }
}

fn search(
    k: usize,
    pairs: &[(usize, usize)],
    allowed: &[Vec<PairChoice>],
    less: &mut Vec<Vec<bool>>,
    decided: &mut Vec<Vec<bool>>,
) -> bool {
    if k == pairs.len() {
        return is_semilinear(less);
    }
    let (i, j) = pairs[k];
    for &choice in &allowed[k] {
        less[i][j] = choice == PairChoice::Below;
        less[j][i] = choice == PairChoice::Above;
        decided[i][j] = true;
        decided[j][i] = true;
        if transitive_so_far(less, decided, i, j) && search(k + 1, pairs, allowed, less, decided) {
            return true;
        }
        decided[i][j] = false;
        decided[j][i] = false;
        less[i][j] = false;
        less[j][i] = false;
    }
    false
}

/// Checks every triple through the pair `{i, j}` whose three pairs are all
/// decided.
fn transitive_so_far(less: &[Vec<bool>], decided: &[Vec<bool>], i: usize, j: usize) -> bool {
    let n = less.len();
    for c in 0..n {
        if c == i || c == j || !decided[i][c] || !decided[j][c] {
            continue;
        }
        let trio = [i, j, c];
        for &x in &trio {
            for &y in &trio {
                for &z in &trio {
                    if x != y && y != z && x != z && less[x][y] && less[y][z] && !less[x][z] {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn is_semilinear(less: &[Vec<bool>]) -> bool {
    let n = less.len();
    for p in 0..n {
        let below: Vec<usize> = (0..n).filter(|&x| less[x][p]).collect();
        for (a, &x) in below.iter().enumerate() {
            for &y in &below[a + 1..] {
                if !less[x][y] && !less[y][x] {
                    return false;
                }
            }
        }
    }
    true
}

/// Searches for a homomorphism into the complete `b`-branching tree of
/// height `h` (levels `0..=h`).
///
/// Completeness for trees of height `h`: take any homomorphism into any
/// tree of height at most `h` and close its image downwards. Each node of
/// that closure has at most `|nodes(s)|` children that lead to an image
/// node, so with `b >= |nodes(s)|` the closure embeds into the complete
/// tree level by level.
///
/// The search fixes the order in which children are first used (child `k`
/// of a tree node is only tried once children `0..k` are in use), which is
/// sound because permuting the children of a node is a tree automorphism.
pub fn brute_force_tree_hom_oracle(s: &ConstraintStructure, h: usize, b: usize) -> Result<bool> {
    check_limit("node count", s.len(), TREE_ORACLE_NODE_LIMIT)?;
    check_limit("height", h, TREE_ORACLE_HEIGHT_LIMIT)?;
    check_limit("branching", b, TREE_ORACLE_BRANCHING_LIMIT)?;
    let mut images: Vec<Vec<u8>> = Vec::with_capacity(s.len());
    let mut opened: std::collections::HashMap<Vec<u8>, usize> = Default::default();
    Ok(place(s, h, b, &mut images, &mut opened))
}

fn is_strict_prefix(a: &[u8], b: &[u8]) -> bool {
    a.len() < b.len() && b[..a.len()] == *a
}

fn consistent(s: &ConstraintStructure, images: &[Vec<u8>], v: usize) -> bool {
    let pv = &images[v];
    for u in 0..=v {
        let pu = &images[u];
        let (a, b) = (NodeId(u), NodeId(v));
        if s.has_lt(a, b) && !is_strict_prefix(pu, pv) {
            return false;
        }
        if s.has_lt(b, a) && !is_strict_prefix(pv, pu) {
            return false;
        }
        let apart = !is_strict_prefix(pu, pv) && !is_strict_prefix(pv, pu) && pu != pv;
        if (s.has_inc(a, b) || s.has_inc(b, a)) && !apart {
            return false;
        }
    }
    true
}

fn place(
    s: &ConstraintStructure,
    h: usize,
    b: usize,
    images: &mut Vec<Vec<u8>>,
    opened: &mut std::collections::HashMap<Vec<u8>, usize>,
) -> bool {
    let v = images.len();
    if v == s.len() {
        return true;
    }
    let mut path = Vec::new();
    descend(s, h, b, images, opened, &mut path)
}

/// Tries `path` and every extension of it as the image of the next node.
fn descend(
    s: &ConstraintStructure,
    h: usize,
    b: usize,
    images: &mut Vec<Vec<u8>>,
    opened: &mut std::collections::HashMap<Vec<u8>, usize>,
    path: &mut Vec<u8>,
) -> bool {
    images.push(path.clone());
    let v = images.len() - 1;
    if consistent(s, images, v) && place(s, h, b, images, opened) {
        return true;
    }
    images.pop();
    if path.len() == h {
        return false;
    }
    let used = opened.get(path.as_slice()).copied().unwrap_or(0);
    for d in 0..b.min(used + 1) {
        let fresh = d == used;
        if fresh {
            opened.insert(path.clone(), used + 1);
        }
        path.push(d as u8);
        let found = descend(s, h, b, images, opened, path);
        path.pop();
        if fresh {
            opened.insert(path.clone(), used);
        }
        if found {
            return true;
        }
    }
    false
}

//! Explicit witness trees built from the fixpoint trace.
//!
//! Every component visited by the fixpoint becomes a tree node whose parent
//! is the component of the previous stage containing it. This is the
//! prefix order on roads: the road of a node placed at stage `s` is the
//! sequence of components containing it at stages `0..=s`, and every
//! prefix of a road is itself the road of a central point of that
//! component. A fresh root sits below all stage-0 components.

use serde::Serialize;

use super::fixpoint::{fixpoint_levels, stalled_component};
use crate::error::{Error, Result};
use crate::structure::{ConstraintStructure, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TreeNodeId(pub usize);

/// A finite rooted tree given by parent pointers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessTree {
    parent: Vec<Option<TreeNodeId>>,
    root: TreeNodeId,
}

impl WitnessTree {
    /// Builds a tree from parent pointers; exactly one node may lack a
    /// parent and the pointers must be acyclic.
    pub fn from_parents(parent: Vec<Option<TreeNodeId>>) -> Option<Self> {
        let roots: Vec<usize> = (0..parent.len()).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return None;
        }
        for start in 0..parent.len() {
            let mut cur = start;
            for _ in 0..=parent.len() {
                match parent[cur] {
                    Some(p) if p.0 < parent.len() => cur = p.0,
                    Some(_) => return None,
                    None => break,
                }
            }
            if parent[cur].is_some() {
                return None;
            }
        }
        Some(WitnessTree {
            parent,
            root: TreeNodeId(roots[0]),
        })
    }

    pub fn root(&self) -> TreeNodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, t: TreeNodeId) -> Option<TreeNodeId> {
        self.parent[t.0]
    }

    pub fn depth(&self, t: TreeNodeId) -> usize {
        let mut d = 0;
        let mut cur = t;
        while let Some(p) = self.parent[cur.0] {
            d += 1;
            cur = p;
        }
        d
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        (0..self.len()).map(|i| self.depth(TreeNodeId(i))).max().unwrap_or(0)
    }

    /// Strict ancestor test.
    pub fn is_ancestor(&self, a: TreeNodeId, b: TreeNodeId) -> bool {
        let mut cur = b;
        while let Some(p) = self.parent[cur.0] {
            if p == a {
                return true;
            }
            cur = p;
        }
        false
    }

    pub fn comparable(&self, a: TreeNodeId, b: TreeNodeId) -> bool {
        a == b || self.is_ancestor(a, b) || self.is_ancestor(b, a)
    }
}

/// Total map from structure nodes to tree nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeMapping {
    pub map: Vec<TreeNodeId>,
}

impl NodeMapping {
    pub fn image(&self, n: NodeId) -> TreeNodeId {
        self.map[n.0]
    }
}

/// Builds the road tree and the node map `c -> road(c)`.
pub fn build_witness(s: &ConstraintStructure) -> Result<(WitnessTree, NodeMapping)> {
    let fp = fixpoint_levels(s)?;
    if !fp.exhausted {
        let component = stalled_component(s, &fp).expect("non-exhausted fixpoint has a residual");
        return Err(Error::NoHomomorphism { component });
    }
    let root = TreeNodeId(0);
    let mut parent = vec![None];
    let mut map = vec![root; s.len()];
    // tree node of the component containing each node at the previous stage
    let mut holder: Vec<TreeNodeId> = vec![root; s.len()];
    for (stage, steps) in fp.trace.iter().enumerate() {
        let mut next_holder = holder.clone();
        for step in steps {
            let first = step.component.first().expect("components are non-empty");
            let up = if stage == 0 { root } else { holder[first] };
            let id = TreeNodeId(parent.len());
            parent.push(Some(up));
            for v in step.component.iter() {
                next_holder[v] = id;
            }
            for c in step.central.iter() {
                map[c] = id;
            }
        }
        holder = next_holder;
    }
    let tree = WitnessTree::from_parents(parent).expect("construction yields a rooted tree");
    Ok((tree, NodeMapping { map }))
}

/// Checks that `m` sends every `lt` edge to a strict ancestor pair and every
/// `inc` edge to a pair of distinct incomparable tree nodes.
pub fn verify_homomorphism(s: &ConstraintStructure, t: &WitnessTree, m: &NodeMapping) -> bool {
    if m.map.len() != s.len() || m.map.iter().any(|x| x.0 >= t.len()) {
        return false;
    }
    let lt_ok = s.lt_edges().all(|(x, y)| t.is_ancestor(m.image(x), m.image(y)));
    let inc_ok = s.inc_edges().all(|(x, y)| !t.comparable(m.image(x), m.image(y)));
    lt_ok && inc_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tripleu::{gen_tripleu, TripleUSpec};

    #[test]
    fn single_node_gets_root_and_child() {
        let s = ConstraintStructure::from_labels(&["v"], &[], &[]).unwrap();
        let (t, m) = build_witness(&s).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.parent(m.image(NodeId(0))), Some(t.root()));
        assert!(verify_homomorphism(&s, &t, &m));
    }

    #[test]
    fn plain_tripleu_shares_the_stage_zero_node() {
        let s = gen_tripleu(TripleUSpec { n: 0, m: 0 }).structure;
        let (t, m) = build_witness(&s).unwrap();
        let img = |l: &str| m.image(s.node(l).unwrap());
        assert_eq!(img("a1"), img("a2"));
        assert_ne!(img("l"), img("r"));
        assert_eq!(t.height(), 3);
        assert!(verify_homomorphism(&s, &t, &m));
    }

    #[test]
    fn two_isolated_nodes_are_siblings() {
        let s = ConstraintStructure::from_labels(&["x", "y"], &[], &[]).unwrap();
        let (t, m) = build_witness(&s).unwrap();
        assert_eq!(t.len(), 3);
        assert_ne!(m.image(NodeId(0)), m.image(NodeId(1)));
        assert_eq!(t.parent(m.image(NodeId(0))), Some(t.root()));
        assert_eq!(t.parent(m.image(NodeId(1))), Some(t.root()));
    }

    #[test]
    fn cycle_reports_its_stalled_component() {
        let s = ConstraintStructure::from_labels(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a")], &[]).unwrap();
        assert_eq!(build_witness(&s), Err(Error::NoHomomorphism { component: s.all_nodes() }));
    }

    #[test]
    fn verify_rejects_collapsed_inc_pair() {
        let s = gen_tripleu(TripleUSpec { n: 0, m: 0 }).structure;
        let (t, mut m) = build_witness(&s).unwrap();
        let l = s.node("l").unwrap().0;
        let r = s.node("r").unwrap().0;
        m.map[r] = m.map[l];
        assert!(!verify_homomorphism(&s, &t, &m));
    }

    #[test]
    fn verify_accepts_chain_into_path() {
        let s = ConstraintStructure::from_labels(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")], &[]).unwrap();
        let t = WitnessTree::from_parents(vec![None, Some(TreeNodeId(0)), Some(TreeNodeId(1))]).unwrap();
        let m = NodeMapping {
            map: vec![TreeNodeId(0), TreeNodeId(1), TreeNodeId(2)],
        };
        assert!(verify_homomorphism(&s, &t, &m));
        let backwards = NodeMapping {
            map: vec![TreeNodeId(2), TreeNodeId(1), TreeNodeId(0)],
        };
        assert!(!verify_homomorphism(&s, &t, &backwards));
    }

    #[test]
    fn from_parents_rejects_cycles_and_forests() {
        assert!(WitnessTree::from_parents(vec![None, None]).is_none());
        assert!(WitnessTree::from_parents(vec![None, Some(TreeNodeId(2)), Some(TreeNodeId(1))]).is_none());
    }
}

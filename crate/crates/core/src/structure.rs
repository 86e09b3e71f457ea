//! Finite {<, inc}-constraint graphs and the primitive notions built on
//! them: connectivity, central points, restriction and semi-linearity.
//!
//! A structure is an arbitrary graph with two kinds of directed edges.
//! Nothing is assumed about the relations: self-loops, cycles and
//! one-directional `inc` edges are all representable.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_limit, Error, Result};
use crate::subset::NodeSubset;

/// Dense index of a node inside its structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Lt,
    Inc,
}

/// Immutable finite structure over the signature {<, inc}.
#[derive(Clone, Serialize, Deserialize)]
#[serde(into = "StructureRepr", try_from = "StructureRepr")]
pub struct ConstraintStructure {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    lt: BTreeSet<(usize, usize)>,
    inc: BTreeSet<(usize, usize)>,
    lt_out: Vec<NodeSubset>,
    lt_in: Vec<NodeSubset>,
    lt_adj: Vec<NodeSubset>,
    inc_adj: Vec<NodeSubset>,
}

/// Incremental constructor for [`ConstraintStructure`].
#[derive(Debug, Default, Clone)]
pub struct StructureBuilder {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    lt: BTreeSet<(usize, usize)>,
    inc: BTreeSet<(usize, usize)>,
}

fn valid_label(label: &str) -> bool {
    !label.is_empty() && !label.chars().any(char::is_whitespace)
}

impl StructureBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, label: &str) -> Result<NodeId> {
        if !valid_label(label) {
            return Err(Error::InvalidLabel(label.to_string()));
        }
        if self.index.contains_key(label) {
            return Err(Error::DuplicateNode(label.to_string()));
        }
        let id = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        Ok(NodeId(id))
    }

    pub fn node(&self, label: &str) -> Result<NodeId> {
        self.index
            .get(label)
            .map(|&i| NodeId(i))
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn check(&self, id: NodeId) -> usize {
        assert!(id.0 < self.labels.len(), "node {id} not in builder");
        id.0
    }

    pub fn add_lt(&mut self, a: NodeId, b: NodeId) -> &mut Self {
        let (a, b) = (self.check(a), self.check(b));
        self.lt.insert((a, b));
        self
    }

    pub fn add_inc(&mut self, a: NodeId, b: NodeId) -> &mut Self {
        let (a, b) = (self.check(a), self.check(b));
        self.inc.insert((a, b));
        self
    }

    pub fn add_edge(&mut self, kind: EdgeKind, a: NodeId, b: NodeId) -> &mut Self {
        match kind {
            EdgeKind::Lt => self.add_lt(a, b),
            EdgeKind::Inc => self.add_inc(a, b),
        }
    }

    /// Adds an edge between two labelled nodes.
    pub fn edge_by_label(&mut self, kind: EdgeKind, a: &str, b: &str) -> Result<&mut Self> {
        let (a, b) = (self.node(a)?, self.node(b)?);
        Ok(self.add_edge(kind, a, b))
    }

    pub fn build(self) -> ConstraintStructure {
        let n = self.labels.len();
        let mut lt_out = vec![NodeSubset::empty(n); n];
        let mut lt_in = vec![NodeSubset::empty(n); n];
        let mut inc_adj = vec![NodeSubset::empty(n); n];
        for &(a, b) in &self.lt {
            lt_out[a].insert(b);
            lt_in[b].insert(a);
        }
        for &(a, b) in &self.inc {
            inc_adj[a].insert(b);
            inc_adj[b].insert(a);
        }
        let lt_adj = lt_out.iter().zip(&lt_in).map(|(o, i)| o.union(i)).collect();
        ConstraintStructure {
            labels: self.labels,
            index: self.index,
            lt: self.lt,
            inc: self.inc,
            lt_out,
            lt_in,
            lt_adj,
            inc_adj,
        }
    }
}

impl ConstraintStructure {
    pub fn builder() -> StructureBuilder {
        StructureBuilder::new()
    }

    /// Convenience constructor from labels and labelled edge lists.
    pub fn from_labels(nodes: &[&str], lt: &[(&str, &str)], inc: &[(&str, &str)]) -> Result<Self> {
        let mut b = StructureBuilder::new();
        for n in nodes {
            b.add_node(n)?;
        }
        for (x, y) in lt {
            b.edge_by_label(EdgeKind::Lt, x, y)?;
        }
        for (x, y) in inc {
            b.edge_by_label(EdgeKind::Inc, x, y)?;
        }
        Ok(b.build())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.len()).map(NodeId)
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node(&self, label: &str) -> Result<NodeId> {
        self.index
            .get(label)
            .map(|&i| NodeId(i))
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn lt_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.lt.iter().map(|&(a, b)| (NodeId(a), NodeId(b)))
    }

    pub fn inc_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.inc.iter().map(|&(a, b)| (NodeId(a), NodeId(b)))
    }

    pub fn lt_count(&self) -> usize {
        self.lt.len()
    }

    pub fn inc_count(&self) -> usize {
        self.inc.len()
    }

    pub fn has_lt(&self, a: NodeId, b: NodeId) -> bool {
        self.lt_out[a.0].contains(b.0)
    }

    pub fn has_inc(&self, a: NodeId, b: NodeId) -> bool {
        self.inc.contains(&(a.0, b.0))
    }

    pub fn has_edge(&self, kind: EdgeKind, a: NodeId, b: NodeId) -> bool {
        match kind {
            EdgeKind::Lt => self.has_lt(a, b),
            EdgeKind::Inc => self.has_inc(a, b),
        }
    }

    /// Nodes `y` with an edge `a < y`.
    pub fn lt_successors(&self, a: NodeId) -> &NodeSubset {
        &self.lt_out[a.0]
    }

    /// Nodes `x` with an edge `x < a`.
    pub fn lt_predecessors(&self, a: NodeId) -> &NodeSubset {
        &self.lt_in[a.0]
    }

    /// Nodes joined to `a` by an `inc` edge in either direction.
    pub fn inc_neighbours(&self, a: NodeId) -> &NodeSubset {
        &self.inc_adj[a.0]
    }

    pub fn empty_subset(&self) -> NodeSubset {
        NodeSubset::empty(self.len())
    }

    pub fn all_nodes(&self) -> NodeSubset {
        NodeSubset::full(self.len())
    }

    pub fn subset_of(&self, labels: &[&str]) -> Result<NodeSubset> {
        let mut s = self.empty_subset();
        for l in labels {
            s.insert(self.node(l)?.0);
        }
        Ok(s)
    }

    pub fn subset_labels(&self, s: &NodeSubset) -> Vec<&str> {
        s.iter().map(|i| self.labels[i].as_str()).collect()
    }

    fn check_subset(&self, b: &NodeSubset) {
        assert_eq!(b.universe(), self.len(), "subset belongs to a different structure");
    }

    /// Partition of `b` into maximal subsets connected by `lt` edges (either
    /// direction) inside `b`, ordered by smallest member.
    pub fn connected_components(&self, b: &NodeSubset) -> Vec<NodeSubset> {
        self.check_subset(b);
        let mut rest = b.clone();
        let mut out = Vec::new();
        while let Some(start) = rest.first() {
            let mut comp = NodeSubset::singleton(self.len(), start);
            let mut frontier = vec![start];
            rest.remove(start);
            while let Some(v) = frontier.pop() {
                for w in self.lt_adj[v].intersection(&rest).iter() {
                    rest.remove(w);
                    comp.insert(w);
                    frontier.push(w);
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self, b: &NodeSubset) -> bool {
        self.connected_components(b).len() <= 1
    }

    /// Members `c` of `b` such that no `a` in `b` has `a inc c`, `c inc a`
    /// or `a < c`. The quantification includes `a = c`, so self-loops
    /// disqualify a node.
    pub fn central_points(&self, b: &NodeSubset) -> NodeSubset {
        self.check_subset(b);
        let mut out = self.empty_subset();
        for c in b.iter() {
            if !self.inc_adj[c].intersects(b) && !self.lt_in[c].intersects(b) {
                out.insert(c);
            }
        }
        out
    }

    /// The induced substructure on `b`. Node order and labels are kept.
    pub fn restriction(&self, b: &NodeSubset) -> ConstraintStructure {
        self.check_subset(b);
        let mut builder = StructureBuilder::new();
        let mut map = vec![usize::MAX; self.len()];
        for i in b.iter() {
            map[i] = builder.add_node(&self.labels[i]).expect("labels are unique").0;
        }
        for &(x, y) in &self.lt {
            if b.contains(x) && b.contains(y) {
                builder.add_lt(NodeId(map[x]), NodeId(map[y]));
            }
        }
        for &(x, y) in &self.inc {
            if b.contains(x) && b.contains(y) {
                builder.add_inc(NodeId(map[x]), NodeId(map[y]));
            }
        }
        builder.build()
    }

    /// True iff `lt` is a strict partial order whose down-sets are chains,
    /// and `inc` is exactly its (symmetric) incomparability relation.
    pub fn is_semilinear_order(&self) -> bool {
        self.semilinearity_violation().is_none()
    }

    /// First reason the structure fails to be a semi-linear order.
    pub fn semilinearity_violation(&self) -> Option<String> {
        let n = self.len();
        for a in 0..n {
            if self.lt_out[a].contains(a) {
                return Some(format!("`{}` < `{}` (reflexive)", self.labels[a], self.labels[a]));
            }
        }
        for &(a, b) in &self.lt {
            for c in self.lt_out[b].iter() {
                if !self.lt_out[a].contains(c) {
                    return Some(format!(
                        "not transitive: `{}` < `{}` < `{}`",
                        self.labels[a], self.labels[b], self.labels[c]
                    ));
                }
            }
        }
        for p in 0..n {
            let below: Vec<usize> = self.lt_in[p].iter().collect();
            for (i, &x) in below.iter().enumerate() {
                for &y in &below[i + 1..] {
                    if !self.lt_out[x].contains(y) && !self.lt_out[y].contains(x) {
                        return Some(format!(
                            "`{}` and `{}` are incomparable but both below `{}`",
                            self.labels[x], self.labels[y], self.labels[p]
                        ));
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let incomparable = a != b && !self.lt_out[a].contains(b) && !self.lt_out[b].contains(a);
                if incomparable != self.inc.contains(&(a, b)) {
                    return Some(format!(
                        "inc edge ({}, {}) is {} but the nodes are {}",
                        self.labels[a],
                        self.labels[b],
                        if incomparable { "missing" } else { "present" },
                        if incomparable { "incomparable" } else { "comparable or equal" }
                    ));
                }
            }
        }
        None
    }
}

/// Largest structure the exhaustive subset oracle accepts.
pub const SUBSET_ORACLE_LIMIT: usize = 20;

/// Exhaustive check that every non-empty `lt`-connected subset has a
/// central point. Enumerates all `2^n - 1` subsets.
pub fn subset_criterion_oracle(s: &ConstraintStructure) -> Result<bool> {
    check_limit("node count", s.len(), SUBSET_ORACLE_LIMIT)?;
    let n = s.len();
    let adj: Vec<u64> = s.lt_adj.iter().map(NodeSubset::to_mask).collect();
    let bad_in: Vec<u64> = (0..n)
        .map(|c| s.lt_in[c].to_mask() | s.inc_adj[c].to_mask())
        .collect();
    let connected = |b: u64| {
        let start = b & b.wrapping_neg();
        let mut seen = start;
        let mut frontier = start;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = adj[v] & b & !seen;
            seen |= new;
            frontier |= new;
        }
        seen == b
    };
    for b in 1u64..(1u64 << n) {
        if !connected(b) {
            continue;
        }
        let mut rest = b;
        let mut has_central = false;
        while rest != 0 {
            let c = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if bad_in[c] & b == 0 {
                has_central = true;
                break;
            }
        }
        if !has_central {
            return Ok(false);
        }
    }
    Ok(true)
}

impl PartialEq for ConstraintStructure {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.lt == other.lt && self.inc == other.inc
    }
}

impl Eq for ConstraintStructure {}

impl fmt::Debug for ConstraintStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs = |set: &BTreeSet<(usize, usize)>| {
            set.iter()
                .map(|&(a, b)| format!("{}<>{}", self.labels[a], self.labels[b]))
                .collect::<Vec<_>>()
        };
        f.debug_struct("ConstraintStructure")
            .field("nodes", &self.labels)
            .field("lt", &pairs(&self.lt))
            .field("inc", &pairs(&self.inc))
            .finish()
    }
}

/// Label-based serde form: `{"nodes": [...], "lt": [[a,b],...], "inc": [...]}`.
#[derive(Serialize, Deserialize)]
struct StructureRepr {
    nodes: Vec<String>,
    lt: Vec<(String, String)>,
    inc: Vec<(String, String)>,
}

impl From<ConstraintStructure> for StructureRepr {
    fn from(s: ConstraintStructure) -> Self {
        let name = |i: usize| s.labels[i].clone();
        StructureRepr {
            lt: s.lt.iter().map(|&(a, b)| (name(a), name(b))).collect(),
            inc: s.inc.iter().map(|&(a, b)| (name(a), name(b))).collect(),
            nodes: s.labels.clone(),
        }
    }
}

impl TryFrom<StructureRepr> for ConstraintStructure {
    type Error = Error;

    fn try_from(r: StructureRepr) -> Result<Self> {
        let mut b = StructureBuilder::new();
        for n in &r.nodes {
            b.add_node(n)?;
        }
        for (x, y) in &r.lt {
            b.edge_by_label(EdgeKind::Lt, x, y)?;
        }
        for (x, y) in &r.inc {
            b.edge_by_label(EdgeKind::Inc, x, y)?;
        }
        Ok(b.build())
    }
}

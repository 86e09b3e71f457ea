use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::{ConstraintStructure, NodeId, StructureBuilder};

/// A finite semi-linear order completed so that every pair with a common
/// lower bound has a greatest one. Original nodes keep their indices;
/// synthetic nodes come after them.
#[derive(Debug, Clone, Serialize)]
pub struct InfimaClosedOrder {
    pub base: ConstraintStructure,
    pub order: ConstraintStructure,
    /// Synthetic nodes in insertion order (infima, then possibly a bottom).
    pub added: Vec<NodeId>,
    pub bottom: Option<NodeId>,
    /// Base node to closed-order node.
    pub injection: Vec<NodeId>,
}

impl InfimaClosedOrder {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn less(&self, a: NodeId, b: NodeId) -> bool {
        self.order.has_lt(a, b)
    }

    pub fn leq(&self, a: NodeId, b: NodeId) -> bool {
        a == b || self.order.has_lt(a, b)
    }

    /// Greatest common lower bound of a non-empty set, if one exists.
    pub fn inf_of(&self, set: &[NodeId]) -> Option<NodeId> {
        let lower: Vec<NodeId> = self
            .order
            .nodes()
            .filter(|&x| set.iter().all(|&p| self.leq(x, p)))
            .collect();
        lower.iter().copied().find(|&m| lower.iter().all(|&x| self.leq(x, m)))
    }

    pub fn inf(&self, a: NodeId, b: NodeId) -> Option<NodeId> {
        self.inf_of(&[a, b])
    }
}

fn fresh_label(stem: &str, taken: &mut HashSet<String>) -> String {
    let mut label = stem.to_string();
    let mut i = 0;
    while taken.contains(&label) {
        i += 1;
        label = format!("{stem}{i}");
    }
    taken.insert(label.clone());
    label
}

/// Pairwise infimum completion, repeated until nothing changes. A pair
/// without any common lower bound triggers one synthetic bottom below
/// everything.
///
/// In a finite semi-linear order the common lower bounds of a pair form a
/// finite chain, so only the bottom is ever added in practice; the general
/// insertion is kept so the result is checked rather than assumed.
pub fn close_under_infima(s: &ConstraintStructure) -> Result<InfimaClosedOrder> {
    if let Some(why) = s.semilinearity_violation() {
        return Err(Error::NotSemilinear(why));
    }
    let mut labels: Vec<String> = s.labels().to_vec();
    let mut taken: HashSet<String> = labels.iter().cloned().collect();
    let mut less: Vec<Vec<bool>> = (0..s.len())
        .map(|a| (0..s.len()).map(|b| s.has_lt(NodeId(a), NodeId(b))).collect())
        .collect();
    let mut added = Vec::new();
    let mut bottom = None;

    let leq = |less: &Vec<Vec<bool>>, a: usize, b: usize| a == b || less[a][b];
    'restart: loop {
        let n = labels.len();
        for a in 0..n {
            for b in a + 1..n {
                let lower: Vec<usize> = (0..n).filter(|&x| leq(&less, x, a) && leq(&less, x, b)).collect();
                if lower.is_empty() {
                    if bottom.is_some() {
                        return Err(Error::NotSemilinear("bottom does not lie below every node".into()));
                    }
                    labels.push(fresh_label("_bot", &mut taken));
                    for row in &mut less {
                        row.push(false);
                    }
                    less.push((0..=n).map(|y| y < n).collect());
                    bottom = Some(NodeId(n));
                    added.push(NodeId(n));
                    continue 'restart;
                }
                let has_max = lower.iter().any(|&m| lower.iter().all(|&x| leq(&less, x, m)));
                if !has_max {
                    labels.push(fresh_label("_inf", &mut taken));
                    let up: Vec<bool> = (0..n).map(|y| leq(&less, a, y) || leq(&less, b, y)).collect();
                    for (x, row) in less.iter_mut().enumerate() {
                        row.push(lower.contains(&x));
                    }
                    let mut z_row = up;
                    z_row.push(false);
                    less.push(z_row);
                    added.push(NodeId(n));
                    continue 'restart;
                }
            }
        }
        break;
    }

    let n = labels.len();
    let mut builder = StructureBuilder::new();
    for l in &labels {
        builder.add_node(l).expect("labels are fresh");
    }
    for a in 0..n {
        for b in 0..n {
            if less[a][b] {
                builder.add_lt(NodeId(a), NodeId(b));
            } else if a != b && !less[b][a] {
                builder.add_inc(NodeId(a), NodeId(b));
            }
        }
    }
    let closed = InfimaClosedOrder {
        base: s.clone(),
        order: builder.build(),
        added,
        bottom,
        injection: s.nodes().collect(),
    };
    if let Some(why) = closed.order.semilinearity_violation() {
        return Err(Error::NotSemilinear(format!("closure broke semi-linearity: {why}")));
    }
    Ok(closed)
}

/// Enumerates all nodes so that every prefix is closed under pairwise
/// infima. Nodes are taken in ascending index; before each new node `a`
/// the missing infima `inf(b, a)` with already listed `b` are emitted,
/// lowest first.
pub fn infima_closed_enumeration(c: &InfimaClosedOrder) -> Vec<NodeId> {
    let n = c.len();
    let mut placed = vec![false; n];
    let mut out: Vec<NodeId> = Vec::with_capacity(n);
    for a in c.order.nodes() {
        if placed[a.0] {
            continue;
        }
        let mut missing: Vec<NodeId> = out
            .iter()
            .filter_map(|&b| c.inf(b, a))
            .filter(|&x| x != a && !placed[x.0])
            .collect();
        missing.sort_by_key(|&x| (c.order.lt_predecessors(x).len(), x));
        missing.dedup();
        for x in missing.into_iter().chain(std::iter::once(a)) {
            placed[x.0] = true;
            out.push(x);
        }
    }
    out
}

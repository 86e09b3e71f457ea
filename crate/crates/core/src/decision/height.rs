use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::ConstraintStructure;
use crate::subset::NodeSubset;

/// Pairwise disjoint level sets `A_0 .. A_h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSets {
    pub levels: Vec<NodeSubset>,
}

impl LevelSets {
    pub fn covered(&self) -> NodeSubset {
        let mut all = NodeSubset::empty(self.levels.first().map_or(0, NodeSubset::universe));
        for l in &self.levels {
            all.union_with(l);
        }
        all
    }
}

/// `A_0` holds the nodes with no `inc` edge at all and no incoming `lt`
/// edge at all (a global condition, not per component). `A_{i+1}` holds the
/// central points of the connected components of what `A_0 .. A_i` leave.
pub fn compute_level_sets(s: &ConstraintStructure, h: usize) -> Result<LevelSets> {
    if s.is_empty() {
        return Err(Error::EmptyStructure);
    }
    let mut levels = Vec::with_capacity(h + 1);
    let mut rest = s.all_nodes();
    let a0 = s.central_points(&rest);
    rest.difference_with(&a0);
    levels.push(a0);
    for _ in 0..h {
        let mut next = s.empty_subset();
        for comp in s.connected_components(&rest) {
            next.union_with(&s.central_points(&comp));
        }
        rest.difference_with(&next);
        levels.push(next);
    }
    Ok(LevelSets { levels })
}

/// True iff the level sets `A_0 .. A_h` cover every node, i.e. the
/// structure maps into a tree of height `h`.
pub fn decide_tree_height(s: &ConstraintStructure, h: usize) -> Result<bool> {
    let levels = compute_level_sets(s, h)?;
    Ok(levels.covered() == s.all_nodes())
}

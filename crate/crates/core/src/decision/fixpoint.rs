use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::{ConstraintStructure, NodeId};
use crate::subset::NodeSubset;

/// One connected component of a stage's residual and the central points
/// removed from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentStep {
    pub component: NodeSubset,
    pub central: NodeSubset,
}

/// Outcome of iterated central-point removal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixpointResult {
    stage: Vec<Option<usize>>,
    pub exhausted: bool,
    /// Nodes never assigned a stage.
    pub residual: NodeSubset,
    /// `trace[s]` lists every component of the stage-`s` residual.
    pub trace: Vec<Vec<ComponentStep>>,
}

impl FixpointResult {
    pub fn stage_of(&self, node: NodeId) -> Option<usize> {
        self.stage[node.0]
    }

    pub fn stages(&self) -> &[Option<usize>] {
        &self.stage
    }

    /// Highest stage reached, `None` if no node was placed.
    pub fn max_stage(&self) -> Option<usize> {
        self.trace.len().checked_sub(1)
    }

    pub fn nodes_at(&self, stage: usize) -> NodeSubset {
        let mut out = NodeSubset::empty(self.stage.len());
        for (i, s) in self.stage.iter().enumerate() {
            if *s == Some(stage) {
                out.insert(i);
            }
        }
        out
    }
}

/// Removes the central points of every connected component of the
/// residual, stage by stage, until nothing is left or a stage removes
/// nothing.
pub fn fixpoint_levels(s: &ConstraintStructure) -> Result<FixpointResult> {
    if s.is_empty() {
        return Err(Error::EmptyStructure);
    }
    let mut stage = vec![None; s.len()];
    let mut residual = s.all_nodes();
    let mut trace = Vec::new();
    while !residual.is_empty() {
        let steps: Vec<ComponentStep> = s
            .connected_components(&residual)
            .into_iter()
            .map(|component| {
                let central = s.central_points(&component);
                ComponentStep { component, central }
            })
            .collect();
        if steps.iter().all(|st| st.central.is_empty()) {
            break;
        }
        let current = trace.len();
        for st in &steps {
            for c in st.central.iter() {
                stage[c] = Some(current);
                residual.remove(c);
            }
        }
        trace.push(steps);
    }
    Ok(FixpointResult {
        stage,
        exhausted: residual.is_empty(),
        residual,
        trace,
    })
}

/// A connected subset of the residual without a central point, if the
/// fixpoint stalled.
pub fn stalled_component(s: &ConstraintStructure, fp: &FixpointResult) -> Option<NodeSubset> {
    if fp.exhausted {
        return None;
    }
    s.connected_components(&fp.residual).into_iter().next()
}

/// Semi-linear order target. On finite inputs the subset criterion and
/// fixpoint exhaustion coincide, so this is `fixpoint_levels(s).exhausted`.
pub fn decide_semilinear(s: &ConstraintStructure) -> Result<bool> {
    Ok(fixpoint_levels(s)?.exhausted)
}

/// Ordinal-tree target. For finite inputs this is the same criterion as
/// [`decide_semilinear`]; the forest produced by the fixpoint gets a root.
pub fn decide_ordinal_tree(s: &ConstraintStructure) -> Result<bool> {
    decide_semilinear(s)
}

/// Ordinary trees (finite chains below every node). For finite inputs the
/// number of stages is finite, so this coincides with
/// [`decide_ordinal_tree`].
pub fn decide_tree(s: &ConstraintStructure) -> Result<bool> {
    decide_ordinal_tree(s)
}

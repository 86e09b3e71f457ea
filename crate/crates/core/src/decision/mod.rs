//! Deciding homomorphisms into semi-linear orders, ordinal trees and trees
//! of bounded height, with witness construction and brute-force oracles.

mod fixpoint;
mod height;
mod oracle;
mod witness;

pub use fixpoint::{
    decide_ordinal_tree, decide_semilinear, decide_tree, fixpoint_levels, stalled_component, ComponentStep,
    FixpointResult,
};
pub use height::{compute_level_sets, decide_tree_height, LevelSets};
pub use oracle::{
    brute_force_tree_hom_oracle, extension_oracle, CompatibleOrder, EXTENSION_ORACLE_LIMIT,
    TREE_ORACLE_BRANCHING_LIMIT, TREE_ORACLE_HEIGHT_LIMIT, TREE_ORACLE_NODE_LIMIT,
};
pub use witness::{build_witness, verify_homomorphism, NodeMapping, TreeNodeId, WitnessTree};

//! Decision procedures for homomorphisms from finite {<, inc}-constraint
//! graphs into semi-linear orders, ordinal trees and trees of bounded
//! height; embeddings of finite semi-linear orders into the universal
//! order of words over (natural, rational) pairs; generators for the
//! triple-u families; and an engine for the WMSO+B Ehrenfeucht-Fraisse
//! game on finite structures.

pub mod decision;
pub mod error;
pub mod game;
pub mod structure;
pub mod subset;
pub mod text;
pub mod tripleu;
pub mod universal;

pub use error::{Error, Result};
pub use structure::{subset_criterion_oracle, ConstraintStructure, EdgeKind, NodeId, StructureBuilder};
pub use subset::NodeSubset;

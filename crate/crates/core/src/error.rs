use thiserror::Error;

use crate::subset::NodeSubset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate node label `{0}`")]
    DuplicateNode(String),
    #[error("unknown node label `{0}`")]
    UnknownLabel(String),
    #[error("invalid node label `{0}`: labels must be non-empty and contain no whitespace")]
    InvalidLabel(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("size limit exceeded: {what} is {actual}, limit is {limit}")]
    SizeLimitExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },
    #[error("the structure has no nodes")]
    EmptyStructure,
    /// The fixpoint stalled; the payload is a connected subset without a central point.
    #[error("no homomorphism exists: connected subset {component:?} has no central point")]
    NoHomomorphism { component: NodeSubset },
    #[error("input is not a semi-linear order: {0}")]
    NotSemilinear(String),
    #[error("operation needs a non-empty word")]
    EmptyWord,
    #[error("invalid family configuration: {0}")]
    InvalidConfig(String),
    #[error("the fixpoint does not exhaust the structure")]
    NotExhausted,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_limit(what: &'static str, actual: usize, limit: usize) -> Result<()> {
    if actual > limit {
        Err(Error::SizeLimitExceeded { what, actual, limit })
    } else {
        Ok(())
    }
}

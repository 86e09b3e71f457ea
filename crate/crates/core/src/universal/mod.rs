//! The universal countable semi-linear order of words over (natural,
//! dyadic rational) pairs, and embeddings of finite semi-linear orders
//! into it.

mod dyadic;
mod embed;
mod infima;
mod word;

pub use dyadic::Dyadic;
pub use embed::{embed_universal, verify_universal_embedding, write_embedding, EmbeddingResult};
pub use infima::{close_under_infima, infima_closed_enumeration, InfimaClosedOrder};
pub use word::{uword_add, uword_compare, UWord, WordOrdering};

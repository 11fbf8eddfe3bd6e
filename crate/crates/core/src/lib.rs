//! Tensor rank of tripartite W and GHZ powers.
//!
//! Exact constructions and certificates live in [`tensor`], [`certificate`] and
//! [`bounds`]; numerical CP search in [`search`]; GHZ↔W conversion predicates
//! in [`slocc`].

pub mod bounds;
pub mod certificate;
pub mod decomposition;
pub mod error;
pub mod json;
pub mod matrix;
pub mod scalar;
pub mod search;
pub mod slocc;
pub mod tensor;

pub use decomposition::{Decomposition, ProductPair, ProductState, Term};
pub use error::{Error, Result};
pub use scalar::{Exact, Scalar, ScalarMode};
pub use tensor::{
    ghz_state, schmidt_rank, tensor_power, w_state, Bipartition, DigitEncoding, ExactTensor,
    FloatTensor, Party, SizeCap, Tensor,
};

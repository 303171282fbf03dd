//! Dense tensors and a define-by-run reverse-mode differentiation graph.
//!
//! Complex values are differentiated in the real-view convention: the
//! gradient stored for a complex entry `z` is `dL/dRe(z) + i dL/dIm(z)` of the
//! real scalar loss `L`.

mod graph;
mod tensor;

pub use graph::{Gradients, Graph, NodeId};
pub use tensor::{Dtype, Tensor};

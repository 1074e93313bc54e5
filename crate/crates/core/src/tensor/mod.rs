//! Dense tensors, index conventions and tensor-train decompositions.

mod dense;
pub(crate) mod format;
mod shape;
mod tt;

pub use dense::DenseTensor;
pub use format::{parse_tensor_file, write_tensor_file, TensorFile};
pub use shape::{completion_dimension, manifold_dimension, RankVector, Shape};
pub use tt::{tt_rank, tt_svd, Core, TTDecomposition};

pub(crate) use tt::{chain_partials, check_canonical_sizes, left_chain};

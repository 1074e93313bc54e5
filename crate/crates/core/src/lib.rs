//! Finite and unique completability of partially observed tensors with a
//! fixed tensor-train rank.
//!
//! Modules, from the ground up:
//!
//! - [`tensor`]: shapes, dense tensors, TT decompositions and the canonical gauge.
//! - [`pattern`]: sampling patterns, their text format and the constraint tensor.
//! - [`checker`]: combinatorial finite and unique completability checks.
//! - [`oracle`]: Jacobian ranks and completion counts of the polynomial system.
//! - [`bounds`]: closed-form sample bounds, curves and random-pattern simulations.
//!
//! Multi-indices are 0-based in the API and 1-based in every text format.

pub mod bounds;
pub mod checker;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod pattern;
pub mod tensor;

pub use checker::{CompletabilityReport, SearchBudget, Verdict};
pub use error::{Error, Result};
pub use pattern::{ConstraintTensor, PivotRule, SamplingPattern};
pub use tensor::{DenseTensor, RankVector, Shape, TTDecomposition};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/tensors.md")]
mod book_tensors {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/patterns.md")]
mod book_patterns {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/checking.md")]
mod book_checking {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/oracle.md")]
mod book_oracle {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/bounds.md")]
mod book_bounds {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}

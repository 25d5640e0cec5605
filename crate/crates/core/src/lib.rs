//! Moment and tail bounds for Banach-space-valued Gaussian chaoses.
//!
//! The crate evaluates the partition-indexed norms that control the moments
//! of a decoupled chaos
//!
//! ```text
//!   S' = sum_i a_{i_1..i_d} g^1_{i_1} ... g^d_{i_d}
//! ```
//!
//! with coefficients in a finite-dimensional normed space, assembles them into
//! two-sided moment sums and tail exponents, and checks the resulting
//! sandwiches empirically by Monte-Carlo sampling.
//!
//! Module map:
//!
//! * [`tensor`]: coefficient tensors, slicing, contraction, symmetry.
//! * [`partitions`]: set partitions, partition pairs, covering sequences.
//! * [`space`]: the value space and its norm.
//! * [`norms`]: sphere-constrained norm estimators.
//! * [`bounds`]: structural moment sums and tail exponents.
//! * [`hermite`]: Hermite expansion and expected derivative tensors.
//! * [`monte_carlo`]: chaos samplers and empirical moments.
//! * [`io`]: JSON file formats.
//! * [`cli`]: the `chaos-bounds` command line front-end.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod hermite;
pub mod io;
pub mod monte_carlo;
pub mod norms;
pub mod partitions;
pub mod rng;
pub mod space;
pub mod tensor;

pub use bounds::{BoundReport, ConstantPolicy, Side, Term};
pub use error::{Error, Result};
pub use hermite::{HermiteExpansion, PolynomialSpec};
pub use monte_carlo::{MCConfig, MomentEstimate};
pub use norms::{NormEstimate, OptimizerConfig};
pub use partitions::{MSequence, Partition, PartitionPair};
pub use space::ValueSpace;
pub use tensor::{BlockAssignment, BlockRole, CoeffTensor};

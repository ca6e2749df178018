//! Randomized projection-cost-preserving coresets for subspace and
//! projective clustering.
//!
//! The pipeline: a +-1 Johnson-Lindenstrauss sketch of the input rows, a
//! two-pass low-rank basis approximating the top right singular vectors,
//! and a coreset (projected matrix plus a tail-energy constant) whose
//! clustering cost tracks the original for every union of k linear or
//! affine j-dimensional subspaces. An exact-SVD baseline, brute-force
//! geometric oracles, and a statistical verification harness ship
//! alongside the construction.

pub mod coreset;
pub mod error;
pub mod geometry;
pub mod matrix;
pub mod sketch;
pub mod stream;
pub mod util;
pub mod verify;

pub use error::{Error, Result};

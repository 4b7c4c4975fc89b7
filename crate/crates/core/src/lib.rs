//! Randomized isolation designs for total treatment effect estimation under
//! network interference.
//!
//! The pipeline: sample an isolated set whose closed in-neighborhoods are
//! pairwise disjoint (uniform or weighted random isolation), assign
//! treatment at the cluster level (complete randomization or matched
//! pairs), observe outcomes from a frozen finite-population model, and
//! estimate the total treatment effect with restricted estimators. Weights
//! for the isolation step are chosen network-adaptively by minimizing a
//! Monte Carlo MSE surrogate over a candidate family.
//!
//! The [`harness`] module composes these pieces into reproducible
//! simulation experiments with MSE / squared-bias / variance summaries.

pub mod assignment;
pub mod error;
pub mod estimators;
pub mod graph;
pub mod harness;
pub mod isolation;
pub mod outcomes;
pub mod seeds;
pub mod selection;

pub use error::{Error, Result};

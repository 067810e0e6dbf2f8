//! Ordinal peer grading with type-ordering aggregation rules.
//!
//! Each student grades a bundle of `k` exam papers by ranking them. A paper
//! collects `k` positions, and the sorted vector of those positions is its
//! *type*. A type-ordering rule ranks papers by the rank of their type in a
//! fixed total order over all types.
//!
//! The crate computes, in exact rational arithmetic, how well any type
//! ordering recovers the true ranking under a grader noise model
//! ([`theory`]), finds the ordering that maximises that performance
//! ([`optimizer`]), and checks predictions against simulated exams
//! ([`simulator`], [`metrics`]).

pub mod error;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod optimizer;
pub mod pipeline;
pub mod rational;
pub mod simulator;
pub mod theory;
pub mod types;

pub use error::{Error, Result};

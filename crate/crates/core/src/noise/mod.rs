//! Noise matrices and grader behaviour.
//!
//! A [`NoiseMatrix`] summarises a grader population by the probability of
//! each (position, true rank) placement. [`GraderModel`] describes how an
//! individual simulated grader ranks a bundle, and [`estimate_matrix`] turns
//! a model back into a matrix by sampling.

mod grader;
mod kendall;
mod matrix;

pub use grader::{
    estimate_matrix, mallows_grade, mallows_grade_counted, marginal_sample, Bubble,
    EmpiricalGraderTable, GraderModel, MarginalSampler, Student,
};
pub use kendall::InversionCounts;
pub use matrix::{default_tolerance, NoiseMatrix, BUILTIN_NAMES};

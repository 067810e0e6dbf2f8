//! Finding the best type ordering for a weight matrix.
//!
//! Maximising the predicted performance is a feedback-arc-set problem on
//! the complete digraph of types. Only *critical* pairs (unequal opposing
//! weights) matter, and an edge between two strongly connected components
//! of the critical digraph always points the same way, so each component
//! can be solved on its own and the results concatenated in topological
//! order.

mod digraph;
mod solve;
mod wide;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

pub use digraph::{build_critical_digraph, condense, ComponentPlan, CriticalDigraph, SizeHistogram};
pub use solve::{arrangement_value, solve_component, SolveMethod, DEFAULT_THRESHOLD};

use crate::error::Result;
use crate::noise::NoiseMatrix;
use crate::theory::{predicted_performance, weight_matrix, ObjectiveSpec, WeightMatrix};
use crate::types::{Provenance, TypeOrdering};

/// An optimised rule with its predicted performance and how it was found.
#[derive(Debug, Clone)]
pub struct OptimizedRule {
    pub ordering: TypeOrdering,
    pub predicted: BigRational,
    pub plan: ComponentPlan,
    /// Per component of `plan`.
    pub methods: Vec<SolveMethod>,
}

/// Summary of a component plan for reports.
#[derive(Debug, Clone, Serialize)]
pub struct PlanReport {
    pub histogram: SizeHistogram,
    pub sizes: Vec<usize>,
    pub fallback_components: usize,
}

impl OptimizedRule {
    pub fn report(&self) -> PlanReport {
        PlanReport {
            histogram: self.plan.histogram(),
            sizes: self.plan.components.iter().map(Vec::len).collect(),
            fallback_components: self
                .methods
                .iter()
                .filter(|m| **m == SolveMethod::BordaFallback)
                .count(),
        }
    }
}

/// Optimal ordering for precomputed weights.
pub fn optimize_weights(weights: &WeightMatrix, threshold: usize) -> Result<OptimizedRule> {
    let graph = build_critical_digraph(weights);
    let plan = condense(&graph);
    let solved: Vec<(Vec<usize>, SolveMethod)> = plan
        .components
        .par_iter()
        .map(|c| solve_component(c, weights, threshold))
        .collect();
    let mut ordered = Vec::with_capacity(weights.len());
    let mut exact = Vec::with_capacity(weights.len());
    let mut methods = Vec::with_capacity(solved.len());
    for (order, method) in solved {
        for v in order {
            ordered.push(weights.types()[v].clone());
            exact.push(method == SolveMethod::ExactDp);
        }
        methods.push(method);
    }
    let ordering = TypeOrdering::new(weights.k(), ordered, Provenance::Optimized, exact)?;
    let predicted = predicted_performance(&ordering, weights)?;
    Ok(OptimizedRule {
        ordering,
        predicted,
        plan,
        methods,
    })
}

/// Computes the weights for `(k, matrix, spec)` and optimises them.
pub fn optimize(k: usize, matrix: &NoiseMatrix, spec: &ObjectiveSpec, threshold: usize) -> Result<OptimizedRule> {
    optimize_weights(&weight_matrix(k, matrix, spec)?, threshold)
}

//! Exact theory of type-ordering rules.
//!
//! For a noise matrix the chance that a paper at normalised true position
//! `x` collects type sigma is a polynomial in `x`. Integrating products of
//! two such polynomials over an objective's region gives the pairwise
//! weights `W(sigma, sigma')`, and the expected performance of any type
//! ordering is a sum of weights. Everything here is exact rational
//! arithmetic.

mod cache;
mod objective;
mod polynomial;
mod weights;

pub use cache::{cache_path, cached_weight_matrix, load_weights, save_weights, CacheStatus};
pub use objective::{parse_objectives, ObjectiveSpec, BUILTIN_OBJECTIVES};
pub use polynomial::{
    is_constant_one, total_probability, type_polynomial, type_polynomial_enumerated, TypePolynomial,
};
pub use weights::{predicted_performance, raw_performance, weight, weight_matrix, WeightMatrix};

/// `integral_alpha^beta max(0, delta - gamma - x) dx`; see [`ObjectiveSpec::mass`].
pub fn objective_mass(spec: &ObjectiveSpec) -> crate::error::Result<num_rational::BigRational> {
    spec.checked_mass()
}

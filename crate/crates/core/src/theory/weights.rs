use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::objective::ObjectiveSpec;
use super::polynomial::{ScaledTypePolys, TypePolynomial};
use crate::error::{Error, Result};
use crate::noise::NoiseMatrix;
use crate::rational::{binomial_table, common_denominator, int};
use crate::types::{enumerate_types, RankType, TypeOrdering, TypeSpace};

/// `(b^(m+1) - a^(m+1)) / (m+1)` for `m = 0..count`.
fn power_integrals(a: &BigRational, b: &BigRational, count: usize) -> Vec<BigRational> {
    let mut pa = a.clone();
    let mut pb = b.clone();
    let mut out = Vec::with_capacity(count);
    for m in 0..count {
        out.push((&pb - &pa) / int(m as i64 + 1));
        pa *= a;
        pb *= b;
    }
    out
}

/// `W(sigma, sigma')`: probability mass of pairs `x < y` in the objective's
/// region where `x` has type sigma and `y` has type sigma'.
///
/// Computed in three phases: the inner integral over `y` as a polynomial in
/// `x` (coefficients `d_t`), then the outer integral of `c_s * d_t * x^(s+t)`.
pub fn weight(p: &TypePolynomial, q: &TypePolynomial, spec: &ObjectiveSpec) -> BigRational {
    let alpha = spec.alpha();
    let beta = spec.effective_beta();
    if beta <= *alpha {
        return BigRational::zero();
    }
    let gamma = spec.gamma();
    let delta = spec.delta();
    let c = p.coefficients();
    let c2 = q.coefficients();
    let binom = binomial_table(c2.len());

    // integral_{x+gamma}^{delta} y^s dy = (delta^(s+1) - (x+gamma)^(s+1)) / (s+1)
    let mut d = vec![BigRational::zero(); c2.len() + 1];
    let mut delta_pow = delta.clone();
    for (s, cs) in c2.iter().enumerate() {
        if !cs.is_zero() {
            let scaled = cs / int(s as i64 + 1);
            d[0] += &scaled * &delta_pow;
            let mut gamma_pow = BigRational::one();
            for i in (0..=s + 1).rev() {
                // coefficient of x^i in (x + gamma)^(s+1)
                d[i] -= &scaled * BigRational::from_integer(binom[s + 1][i].clone()) * &gamma_pow;
                gamma_pow *= gamma;
            }
        }
        delta_pow *= delta;
    }

    let powers = power_integrals(alpha, &beta, c.len() + d.len());
    let mut total = BigRational::zero();
    for (s, cs) in c.iter().enumerate() {
        if cs.is_zero() {
            continue;
        }
        for (t, dt) in d.iter().enumerate() {
            if !dt.is_zero() {
                total += cs * dt * &powers[s + t];
            }
        }
    }
    total
}

/// `G[s][u] = integral_alpha^beta x^s integral_{x+gamma}^delta y^u dy dx`,
/// so that `W = c(sigma)^T G c(sigma')`.
fn gram_matrix(spec: &ObjectiveSpec, len: usize) -> Vec<Vec<BigRational>> {
    let alpha = spec.alpha();
    let beta = spec.effective_beta();
    if beta <= *alpha {
        return vec![vec![BigRational::zero(); len]; len];
    }
    let binom = binomial_table(len + 1);
    let powers = power_integrals(alpha, &beta, 2 * len + 1);
    let delta_pows: Vec<BigRational> = (0..=len)
        .map(|e| num_traits::pow(spec.delta().clone(), e))
        .collect();
    let gamma_pows: Vec<BigRational> = (0..=len)
        .map(|e| num_traits::pow(spec.gamma().clone(), e))
        .collect();
    (0..len)
        .map(|s| {
            (0..len)
                .map(|u| {
                    let e = u + 1;
                    let mut v = &delta_pows[e] * &powers[s];
                    for i in 0..=e {
                        v -= BigRational::from_integer(binom[e][i].clone()) * &gamma_pows[e - i] * &powers[s + i];
                    }
                    v / int(e as i64)
                })
                .collect()
        })
        .collect()
}

/// All pairwise weights for one noise matrix and objective. Entries share a
/// single positive denominator, so comparisons reduce to integer
/// comparisons of numerators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMatrix {
    pub(crate) k: usize,
    pub(crate) types: Vec<RankType>,
    pub(crate) noise_label: String,
    pub(crate) noise_hash: String,
    pub(crate) objective: ObjectiveSpec,
    pub(crate) numer: Vec<BigInt>,
    pub(crate) denom: BigInt,
}

impl WeightMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Types in canonical (lexicographic) order; indices refer to this list.
    pub fn types(&self) -> &[RankType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn noise_label(&self) -> &str {
        &self.noise_label
    }

    pub fn noise_hash(&self) -> &str {
        &self.noise_hash
    }

    pub fn objective(&self) -> &ObjectiveSpec {
        &self.objective
    }

    pub fn numerator(&self, i: usize, j: usize) -> &BigInt {
        &self.numer[i * self.types.len() + j]
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.numer
    }

    /// The shared denominator of every entry.
    pub fn denominator(&self) -> &BigInt {
        &self.denom
    }

    pub fn get(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(self.numerator(i, j).clone(), self.denom.clone())
    }

    pub fn get_f64(&self, i: usize, j: usize) -> f64 {
        crate::rational::to_f64(&self.get(i, j))
    }

    /// Sign of `W(i, j) - W(j, i)`.
    pub fn compare(&self, i: usize, j: usize) -> Ordering {
        self.numerator(i, j).cmp(self.numerator(j, i))
    }

    pub fn total(&self) -> BigRational {
        let sum: BigInt = self.numer.iter().sum();
        BigRational::new(sum, self.denom.clone())
    }

    pub fn diagonal_total(&self) -> BigRational {
        let n = self.types.len();
        let sum: BigInt = (0..n).map(|i| self.numerator(i, i)).sum();
        BigRational::new(sum, self.denom.clone())
    }

    pub(crate) fn from_parts(
        types: Vec<RankType>,
        noise_label: String,
        noise_hash: String,
        objective: ObjectiveSpec,
        numer: Vec<BigInt>,
        denom: BigInt,
    ) -> Result<Self> {
        let k = types.first().map(RankType::k).unwrap_or(0);
        if numer.len() != types.len() * types.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} types",
                numer.len(),
                types.len()
            )));
        }
        if !denom.is_positive() || numer.iter().any(Signed::is_negative) {
            return Err(Error::Range("weights must be non-negative over a positive denominator".into()));
        }
        Ok(WeightMatrix {
            k,
            types,
            noise_label,
            noise_hash,
            objective,
            numer,
            denom,
        })
    }
}

/// Computes every weight `W(sigma, sigma')` for bundle size `k`.
///
/// The inner and outer integrals are folded into one Gram matrix of monomial
/// integrals, and everything is scaled to integers, so each entry is an
/// integer dot product. Rows are computed in parallel.
pub fn weight_matrix(k: usize, matrix: &NoiseMatrix, spec: &ObjectiveSpec) -> Result<WeightMatrix> {
    if matrix.k() != k {
        return Err(Error::Dimension(format!(
            "bundle size {k} with a {}x{} noise matrix",
            matrix.k(),
            matrix.k()
        )));
    }
    spec.checked_mass()?;
    let types = enumerate_types(k)?;
    let scaled = ScaledTypePolys::new(&types, matrix)?;
    let len = k * k - k + 1;
    let gram = gram_matrix(spec, len);
    let g = common_denominator(gram.iter().flatten());
    let g_rat = BigRational::from_integer(g.clone());
    let gram_int: Vec<Vec<BigInt>> = gram
        .iter()
        .map(|row| row.iter().map(|v| (v * &g_rat).to_integer()).collect())
        .collect();

    // e[t] = G_int * C(t)
    let projected: Vec<Vec<BigInt>> = scaled
        .polys
        .par_iter()
        .map(|c| {
            gram_int
                .iter()
                .map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let n = types.len();
    let rows: Vec<Vec<BigInt>> = scaled
        .polys
        .par_iter()
        .map(|c| {
            projected
                .iter()
                .map(|e| c.iter().zip(e).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let mut numer: Vec<BigInt> = rows.into_iter().flatten().collect();
    let mut denom = &scaled.scale * &scaled.scale * g;

    let common = numer
        .par_iter()
        .cloned()
        .reduce(BigInt::zero, |a, b| a.gcd(&b))
        .gcd(&denom);
    if !common.is_zero() && !common.is_one() {
        numer.par_iter_mut().for_each(|v| *v /= &common);
        denom /= &common;
    }
    debug_assert_eq!(numer.len(), n * n);
    WeightMatrix::from_parts(
        types,
        matrix.label().to_string(),
        matrix.content_hash(),
        spec.clone(),
        numer,
        denom,
    )
}

fn check_ordering(ordering: &TypeOrdering, weights: &WeightMatrix) -> Result<Vec<u32>> {
    if ordering.k() != weights.k {
        return Err(Error::Ordering(format!(
            "ordering is for k = {}, weights for k = {}",
            ordering.k(),
            weights.k
        )));
    }
    let space = TypeSpace::new(weights.k)?;
    if space.types() != weights.types() {
        return Err(Error::Ordering("weight matrix does not cover the canonical type set".into()));
    }
    ordering.type_levels(&space)
}

/// Unnormalised performance: `sum over sigma ranked above sigma' of W`,
/// plus half of every weight between tied types (including each type
/// with itself).
pub fn raw_performance(ordering: &TypeOrdering, weights: &WeightMatrix) -> Result<BigRational> {
    let pos = check_ordering(ordering, weights)?;
    let n = weights.len();
    let mut twice = BigInt::zero();
    for i in 0..n {
        for j in 0..n {
            match pos[i].cmp(&pos[j]) {
                Ordering::Less => twice += weights.numerator(i, j) * 2,
                Ordering::Equal => twice += weights.numerator(i, j),
                Ordering::Greater => {}
            }
        }
    }
    Ok(BigRational::new(twice, &weights.denom * 2))
}

/// Expected fraction of qualifying pairs whose order the rule recovers.
pub fn predicted_performance(ordering: &TypeOrdering, weights: &WeightMatrix) -> Result<BigRational> {
    Ok(raw_performance(ordering, weights)? / weights.objective.checked_mass()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, to_f64};
    use crate::theory::polynomial::type_polynomial;
    use crate::types::{borda_ordering, TieBreak};

    fn rt(v: &[u8]) -> RankType {
        RankType::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_weight_k2_identity() {
        let m = NoiseMatrix::identity(2).unwrap();
        let p = type_polynomial(&rt(&[1, 1]), &m).unwrap();
        // integral_0^1 (1-x)^2 (1-x)^3 / 3 dx
        assert_eq!(weight(&p, &p, &ObjectiveSpec::all2all()), rat(1, 18));
    }

    #[test]
    fn matrix_k2_identity() {
        let m = NoiseMatrix::identity(2).unwrap();
        let w = weight_matrix(2, &m, &ObjectiveSpec::all2all()).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w.get(0, 0), rat(1, 18));
        assert_eq!(w.total(), rat(1, 2));
    }

    #[test]
    fn both_routes_agree() {
        let m = NoiseMatrix::new(
            "dense3",
            vec![
                vec![rat(3, 5), rat(3, 10), rat(1, 10)],
                vec![rat(3, 10), rat(2, 5), rat(3, 10)],
                vec![rat(1, 10), rat(3, 10), rat(3, 5)],
            ],
        )
        .unwrap();
        let types = enumerate_types(3).unwrap();
        let polys: Vec<_> = types.iter().map(|t| type_polynomial(t, &m).unwrap()).collect();
        for spec in ObjectiveSpec::builtins() {
            let w = weight_matrix(3, &m, &spec).unwrap();
            for i in 0..types.len() {
                for j in 0..types.len() {
                    assert_eq!(w.get(i, j), weight(&polys[i], &polys[j], &spec), "{spec} {i} {j}");
                }
            }
            assert_eq!(w.total(), spec.mass());
        }
    }

    #[test]
    fn capped_beta_region() {
        let spec = ObjectiveSpec::custom("wide", rat(0, 1), rat(1, 1), rat(3, 10), rat(9, 10)).unwrap();
        let m = NoiseMatrix::identity(2).unwrap();
        let w = weight_matrix(2, &m, &spec).unwrap();
        assert_eq!(w.total(), spec.mass());
        let p: Vec<_> = enumerate_types(2)
            .unwrap()
            .iter()
            .map(|t| type_polynomial(t, &m).unwrap())
            .collect();
        assert_eq!(w.get(1, 2), weight(&p[1], &p[2], &spec));
    }

    #[test]
    fn pair_accounting_identity() {
        let m = NoiseMatrix::identity(4).unwrap();
        let w = weight_matrix(4, &m, &ObjectiveSpec::all2all()).unwrap();
        let b = borda_ordering(4, TieBreak::Lexicographic).unwrap();
        let c = predicted_performance(&b, &w).unwrap();
        let r = predicted_performance(&b.reversed(), &w).unwrap();
        // each off-diagonal pair is counted by exactly one of the two orders,
        // and both take half the diagonal
        assert_eq!(c + r, rat(1, 1));
        assert!(w.diagonal_total() > rat(0, 1));
    }

    #[test]
    fn perfect_grading_sign_law() {
        for k in 2..=4 {
            let m = NoiseMatrix::identity(k).unwrap();
            for spec in ObjectiveSpec::builtins() {
                let w = weight_matrix(k, &m, &spec).unwrap();
                let t = w.types().to_vec();
                for i in 0..t.len() {
                    for j in 0..t.len() {
                        assert_eq!(
                            w.compare(i, j),
                            t[i].borda_score().cmp(&t[j].borda_score()),
                            "k={k} {spec} {} {}",
                            t[i],
                            t[j]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn ties_average_both_directions() {
        let m = NoiseMatrix::builtin("mallows6").unwrap();
        let w = weight_matrix(6, &m, &ObjectiveSpec::all2all()).unwrap();
        let tied = predicted_performance(&borda_ordering(6, TieBreak::Tied).unwrap(), &w).unwrap();
        let lex = borda_ordering(6, TieBreak::Lexicographic).unwrap();
        let a = predicted_performance(&lex, &w).unwrap();
        let b = predicted_performance(&lex.clone().with_ties(lex.levels().iter().map(|_| 0).collect()).unwrap(), &w)
            .unwrap();
        // everything tied: exactly one half
        assert_eq!(b, rat(1, 2));
        assert_ne!(tied, a);

        let id = NoiseMatrix::identity(4).unwrap();
        let w = weight_matrix(4, &id, &ObjectiveSpec::all2all()).unwrap();
        assert_eq!(
            predicted_performance(&borda_ordering(4, TieBreak::Tied).unwrap(), &w).unwrap(),
            predicted_performance(&borda_ordering(4, TieBreak::Seeded(3)).unwrap(), &w).unwrap()
        );
    }

    #[test]
    fn ordering_must_match_k() {
        let m = NoiseMatrix::identity(3).unwrap();
        let w = weight_matrix(3, &m, &ObjectiveSpec::all2all()).unwrap();
        let b = borda_ordering(2, TieBreak::Lexicographic).unwrap();
        assert!(predicted_performance(&b, &w).is_err());
        let b = borda_ordering(3, TieBreak::Lexicographic).unwrap();
        let v = to_f64(&predicted_performance(&b, &w).unwrap());
        assert!(v > 0.5 && v < 1.0);
    }
}

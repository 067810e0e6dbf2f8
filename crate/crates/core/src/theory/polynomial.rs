use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::noise::NoiseMatrix;
use crate::rational::{binomial_table, common_denominator};
use crate::types::RankType;

/// `Pr[x gets type sigma]` as a polynomial in the normalised true position
/// `x` (0 = best), coefficients in ascending powers. Degree `k^2 - k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypePolynomial {
    sigma: RankType,
    coeffs: Vec<BigRational>,
}

impl TypePolynomial {
    pub fn sigma(&self) -> &RankType {
        &self.sigma
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Floating-point evaluation. The monomial coefficients alternate in sign
    /// and grow large, so expect cancellation error near `1e-9` at `k = 6`.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let c: Vec<f64> = self.coeffs.iter().map(crate::rational::to_f64).collect();
        c.iter().rev().fold(0.0, |acc, v| acc * x + v)
    }

    /// `integral_0^1 Pr[x gets sigma] dx`, the share of papers of type sigma.
    pub fn integral(&self) -> BigRational {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(s, c)| c / BigRational::from_integer(BigInt::from(s + 1)))
            .sum()
    }
}

pub(crate) fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn check_matrix(sigma: &RankType, matrix: &NoiseMatrix) -> Result<()> {
    if sigma.k() != matrix.k() {
        return Err(Error::Dimension(format!(
            "type {sigma} has {} entries but the noise matrix is {}x{}",
            sigma.k(),
            matrix.k(),
            matrix.k()
        )));
    }
    Ok(())
}

/// Integer coefficient vectors for every type, sharing one scale:
/// the true polynomial of a type is `polys[t] / scale`.
#[derive(Debug, Clone)]
pub(crate) struct ScaledTypePolys {
    pub scale: BigInt,
    pub polys: Vec<Vec<BigInt>>,
}

impl ScaledTypePolys {
    pub fn new(types: &[RankType], matrix: &NoiseMatrix) -> Result<Self> {
        let k = matrix.k();
        for t in types {
            check_matrix(t, matrix)?;
        }
        let q = common_denominator(matrix.rows().iter().flatten());
        let binom = binomial_table(k);
        // inner[a] = sum_j q * p[a][j] * C(k-1, j) x^j (1-x)^(k-1-j)
        let inner: Vec<Vec<BigInt>> = (0..k)
            .map(|a| {
                let mut acc = vec![BigInt::zero(); k];
                for j in 0..k {
                    let p = matrix.entry(a, j) * BigRational::from_integer(q.clone());
                    debug_assert!(p.is_integer());
                    let w = p.to_integer() * &binom[k - 1][j];
                    if w.is_zero() {
                        continue;
                    }
                    // x^j (1-x)^(k-1-j)
                    let m = k - 1 - j;
                    for (e, b) in binom[m].iter().enumerate() {
                        let term = &w * b;
                        if e % 2 == 0 {
                            acc[j + e] += term;
                        } else {
                            acc[j + e] -= term;
                        }
                    }
                }
                acc
            })
            .collect();
        let polys = types
            .iter()
            .map(|t| {
                let mut acc = vec![BigInt::from(t.multiplicity())];
                for &a in t.entries() {
                    acc = poly_mul(&acc, &inner[a as usize - 1]);
                }
                acc
            })
            .collect();
        Ok(ScaledTypePolys {
            scale: num_traits::pow(q, k),
            polys,
        })
    }
}

/// Type polynomial by multiplying the per-bundle factors.
pub fn type_polynomial(sigma: &RankType, matrix: &NoiseMatrix) -> Result<TypePolynomial> {
    let scaled = ScaledTypePolys::new(std::slice::from_ref(sigma), matrix)?;
    let den = BigRational::from_integer(scaled.scale);
    let coeffs = scaled.polys[0]
        .iter()
        .map(|c| BigRational::from_integer(c.clone()) / &den)
        .collect();
    Ok(TypePolynomial {
        sigma: sigma.clone(),
        coeffs,
    })
}

/// Type polynomial by expanding over every true-rank vector `l` in `[k]^k`
/// and binomially expanding `(1-x)^(k^2-|l|)`. Exponential in `k`; kept as an
/// independent check of [`type_polynomial`].
pub fn type_polynomial_enumerated(sigma: &RankType, matrix: &NoiseMatrix) -> Result<TypePolynomial> {
    check_matrix(sigma, matrix)?;
    let k = matrix.k();
    let kk = k * k;
    let binom = binomial_table(kk);
    let n_sigma = BigRational::from_integer(BigInt::from(sigma.multiplicity()));
    let mut coeffs = vec![BigRational::zero(); kk - k + 1];
    let mut ell = vec![1usize; k];
    loop {
        let mut prod = n_sigma.clone();
        for (i, &l) in ell.iter().enumerate() {
            let p = matrix.entry(sigma.entries()[i] as usize - 1, l - 1);
            if p.is_zero() {
                prod = BigRational::zero();
                break;
            }
            prod *= p * BigRational::from_integer(binom[k - 1][l - 1].clone());
        }
        if !prod.is_zero() {
            let s: usize = ell.iter().sum();
            for j in 0..=kk - s {
                let term = &prod * BigRational::from_integer(binom[kk - s][j].clone());
                if j.is_odd() {
                    coeffs[s - k + j] -= term;
                } else {
                    coeffs[s - k + j] += term;
                }
            }
        }
        // odometer over [k]^k
        let mut i = 0;
        while i < k && ell[i] == k {
            ell[i] = 1;
            i += 1;
        }
        if i == k {
            break;
        }
        ell[i] += 1;
    }
    Ok(TypePolynomial {
        sigma: sigma.clone(),
        coeffs,
    })
}

/// Sum of all type polynomials; identically 1 for a stochastic matrix.
pub fn total_probability(types: &[RankType], matrix: &NoiseMatrix) -> Result<Vec<BigRational>> {
    let scaled = ScaledTypePolys::new(types, matrix)?;
    let len = scaled.polys.iter().map(Vec::len).max().unwrap_or(1);
    let mut sum = vec![BigInt::zero(); len];
    for p in &scaled.polys {
        for (s, c) in p.iter().enumerate() {
            sum[s] += c;
        }
    }
    let den = BigRational::from_integer(scaled.scale);
    let mut out: Vec<BigRational> = sum.into_iter().map(|c| BigRational::from_integer(c) / &den).collect();
    while out.len() > 1 && out.last().is_some_and(Zero::is_zero) {
        out.pop();
    }
    Ok(out)
}

/// True when the coefficient vector is the constant polynomial 1.
pub fn is_constant_one(coeffs: &[BigRational]) -> bool {
    coeffs.first().is_some_and(One::is_one) && coeffs[1..].iter().all(Zero::is_zero)
}

use num_bigint::{BigInt, BigUint};
use serde::Serialize;

use super::wide::{Acc, Wide};
use crate::theory::WeightMatrix;

/// Default largest component solved exactly.
pub const DEFAULT_THRESHOLD: usize = 22;

/// How a component was ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    ExactDp,
    BordaFallback,
}

/// Orders the members of one component (type indices into `weights`).
///
/// Up to `threshold` members the arrangement maximising the sum of forward
/// weights `W(a, b)` over `a` placed before `b` is found by dynamic
/// programming over subsets. Larger components are ordered by Borda score,
/// then lexicographically.
pub fn solve_component(members: &[usize], weights: &WeightMatrix, threshold: usize) -> (Vec<usize>, SolveMethod) {
    if members.len() <= 1 {
        return (members.to_vec(), SolveMethod::ExactDp);
    }
    if members.len() > threshold {
        log::warn!(
            "component of {} types exceeds the exact-solve threshold {threshold}; ordering it by Borda score",
            members.len()
        );
        return (borda_order(members, weights), SolveMethod::BordaFallback);
    }
    (exact_order(members, weights), SolveMethod::ExactDp)
}

fn borda_order(members: &[usize], weights: &WeightMatrix) -> Vec<usize> {
    let mut out = members.to_vec();
    // type indices follow lexicographic order
    out.sort_by_key(|&v| (std::cmp::Reverse(weights.types()[v].borda_score()), v));
    out
}

/// Sum of forward weights of an arrangement.
pub fn arrangement_value(order: &[usize], weights: &WeightMatrix) -> BigInt {
    let mut total = BigInt::from(0);
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            total += weights.numerator(a, b);
        }
    }
    total
}

fn exact_order(members: &[usize], weights: &WeightMatrix) -> Vec<usize> {
    let m = members.len();
    let widest = members
        .iter()
        .flat_map(|&a| members.iter().map(move |&b| weights.numerator(a, b).bits()))
        .max()
        .unwrap_or(0);
    // room for summing up to m^2 entries
    let bits = widest + 2 * (usize::BITS - m.leading_zeros()) as u64 + 1;
    let limbs = bits.div_ceil(64) as usize;
    macro_rules! dispatch {
        ($($l:literal)*) => {
            match limbs {
                $(n if n <= $l => subset_dp::<Wide<$l>>(members, weights),)*
                _ => subset_dp::<BigUint>(members, weights),
            }
        };
    }
    dispatch!(1 2 3 4 5 6 7 8 10 12 16 24 32)
}

fn subset_dp<T: Acc>(members: &[usize], weights: &WeightMatrix) -> Vec<usize> {
    let m = members.len();
    let w: Vec<Vec<T>> = members
        .iter()
        .map(|&a| members.iter().map(|&b| T::from_big(weights.numerator(a, b))).collect())
        .collect();
    // gain(v, S) = sum over u in S of W(u, v), split into low and high halves
    // of the member set so each lookup is two table reads.
    let lo_bits = m / 2;
    let hi_bits = m - lo_bits;
    let table = |offset: usize, width: usize| -> Vec<Vec<T>> {
        (0..m)
            .map(|v| {
                let mut g = vec![T::zero(); 1 << width];
                for s in 1usize..1 << width {
                    let low = s.trailing_zeros() as usize;
                    g[s] = g[s & (s - 1)].plus(&w[offset + low][v]);
                }
                g
            })
            .collect()
    };
    let gain_lo = table(0, lo_bits);
    let gain_hi = table(lo_bits, hi_bits);
    let lo_mask = (1usize << lo_bits) - 1;
    let gain = |v: usize, s: usize| gain_lo[v][s & lo_mask].plus(&gain_hi[v][s >> lo_bits]);

    let full = (1usize << m) - 1;
    let mut dp: Vec<T> = Vec::with_capacity(full + 1);
    dp.push(T::zero());
    for s in 1..=full {
        let mut best: Option<T> = None;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let prev = s & !(1 << v);
            let cand = dp[prev].plus(&gain(v, prev));
            if best.as_ref().is_none_or(|b| cand > *b) {
                best = Some(cand);
            }
        }
        dp.push(best.expect("non-empty subset"));
    }

    // Walk back from the full set choosing the last element. Among optimal
    // choices the lowest Borda score goes last, then the lexicographically
    // largest type.
    let mut order = Vec::with_capacity(m);
    let mut s = full;
    while s != 0 {
        let mut chosen: Option<usize> = None;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let prev = s & !(1 << v);
            if dp[prev].plus(&gain(v, prev)) != dp[s] {
                continue;
            }
            let key = |x: usize| {
                (
                    std::cmp::Reverse(weights.types()[members[x]].borda_score()),
                    members[x],
                )
            };
            if chosen.is_none_or(|c| key(v) > key(c)) {
                chosen = Some(v);
            }
        }
        let v = chosen.expect("optimal predecessor exists");
        order.push(members[v]);
        s &= !(1 << v);
    }
    order.reverse();
    order
}

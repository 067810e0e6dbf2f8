//! Non-negative accumulators for the subset DP. Weight numerators are a few
//! hundred bits wide, so the DP runs on fixed arrays of limbs and only falls
//! back to heap integers for unusually large inputs.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;

pub(crate) trait Acc: Clone + Ord + Send + Sync {
    fn zero() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn from_big(value: &BigInt) -> Self;
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) struct Wide<const L: usize>([u64; L]);

impl<const L: usize> Ord for Wide<L> {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..L).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl<const L: usize> PartialOrd for Wide<L> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const L: usize> Acc for Wide<L> {
    fn zero() -> Self {
        Wide([0; L])
    }

    #[inline]
    fn plus(&self, other: &Self) -> Self {
        let mut out = [0u64; L];
        let mut carry = false;
        for (o, (a, b)) in out.iter_mut().zip(self.0.iter().zip(&other.0)) {
            let (s, c1) = a.overflowing_add(*b);
            let (s, c2) = s.overflowing_add(carry as u64);
            *o = s;
            carry = c1 || c2;
        }
        debug_assert!(!carry, "accumulator overflow");
        Wide(out)
    }

    fn from_big(value: &BigInt) -> Self {
        debug_assert!(value.sign() != Sign::Minus);
        let digits = value.magnitude().to_u64_digits();
        assert!(digits.len() <= L, "value wider than {L} limbs");
        let mut out = [0u64; L];
        out[..digits.len()].copy_from_slice(&digits);
        Wide(out)
    }
}

impl Acc for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }

    fn plus(&self, other: &Self) -> Self {
        self + other
    }

    fn from_big(value: &BigInt) -> Self {
        value.magnitude().clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn wide_matches_bigint(a in any::<u128>(), b in any::<u128>(), c in any::<u64>()) {
            let x = BigInt::from(a) * BigInt::from(c);
            let y = BigInt::from(b);
            let wx = Wide::<4>::from_big(&x);
            let wy = Wide::<4>::from_big(&y);
            prop_assert_eq!(wx.plus(&wy), Wide::<4>::from_big(&(&x + &y)));
            prop_assert_eq!(wx.cmp(&wy), x.cmp(&y));
        }
    }
}

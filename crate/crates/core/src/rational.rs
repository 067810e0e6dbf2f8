//! Exact rational helpers: decimal parsing, canonical string rendering, and
//! small combinatorial tables shared by the theory code.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses `"0.6337"`, `"12"`, `"-3.5"`, `"1e-3"` or `"num/den"` exactly.
pub fn parse_rational(input: &str) -> Result<BigRational> {
    let err = || Error::ParseRational {
        input: input.to_string(),
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all_digits.parse::<BigInt>().map_err(|_| err())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Renders a rational as a terminating decimal when its reduced denominator
/// has only the prime factors 2 and 5, and as `"num/den"` otherwise. The
/// output always parses back to the identical value.
pub fn format_rational(value: &BigRational) -> String {
    let den = value.denom().magnitude().clone();
    if den.is_one() {
        return value.numer().to_string();
    }
    let (twos, fives, rest) = split_2_5(&den);
    if !rest.is_one() {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let places = twos.max(fives);
    let scaled = value * BigRational::from_integer(num_traits::pow(BigInt::from(10u32), places));
    debug_assert!(scaled.is_integer());
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let sign = if value.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

/// Canonical `"num/den"` rendering used by cache files.
pub fn format_fraction(num: &BigInt, den: &BigUint) -> String {
    format!("{num}/{den}")
}

fn split_2_5(n: &BigUint) -> (usize, usize, BigUint) {
    let mut rest = n.clone();
    let two = BigUint::from(2u32);
    let five = BigUint::from(5u32);
    let mut twos = 0;
    while !rest.is_zero() && rest.is_multiple_of(&two) {
        rest /= &two;
        twos += 1;
    }
    let mut fives = 0;
    while !rest.is_zero() && rest.is_multiple_of(&five) {
        rest /= &five;
        fives += 1;
    }
    (twos, fives, rest)
}

/// Floating-point view of an exact rational, for reports and sampling only.
pub fn to_f64(value: &BigRational) -> f64 {
    if let Some(v) = value.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back to shifting both parts down to f64 range.
    let num = value.numer();
    let den = value.denom();
    let shift = num.bits().max(den.bits()).saturating_sub(1000);
    let n = (num >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (den >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Converts an `f64` into the exact rational it represents.
pub fn from_f64(value: f64) -> BigRational {
    BigRational::from_float(value).unwrap_or_else(BigRational::zero)
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Binomial coefficient table `c[n][r]` for `n <= max`.
pub fn binomial_table(max: usize) -> Vec<Vec<BigInt>> {
    let mut table: Vec<Vec<BigInt>> = Vec::with_capacity(max + 1);
    for n in 0..=max {
        let mut row = vec![BigInt::one(); n + 1];
        for r in 1..n {
            row[r] = &table[n - 1][r - 1] + &table[n - 1][r];
        }
        table.push(row);
    }
    table
}

pub fn binomial_u64(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn factorial_u64(n: u64) -> u64 {
    (1..=n).product()
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_printed_decimals_exactly() {
        assert_eq!(parse_rational("0.6337").unwrap(), rat(6337, 10000));
        assert_eq!(parse_rational("0.205").unwrap(), rat(41, 200));
        assert_eq!(parse_rational("1").unwrap(), int(1));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-2.50").unwrap(), rat(-5, 2));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational("3/9").unwrap(), rat(1, 3));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1.2.3", "1/0", "0x10", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formats_terminating_and_repeating() {
        assert_eq!(format_rational(&rat(6337, 10000)), "0.6337");
        assert_eq!(format_rational(&rat(-1, 8)), "-0.125");
        assert_eq!(format_rational(&rat(7, 1)), "7");
        assert_eq!(format_rational(&rat(1, 3)), "1/3");
        assert_eq!(format_rational(&rat(1, 15)), "1/15");
    }

    #[test]
    fn binomials() {
        let t = binomial_table(30);
        assert_eq!(t[5][2], BigInt::from(10));
        assert_eq!(t[30][15], BigInt::from(155_117_520u64));
        assert_eq!(binomial_u64(11, 6), 462);
        assert_eq!(factorial_u64(6), 720);
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(num in -1_000_000i64..1_000_000, den in 1i64..100_000) {
            let value = rat(num, den);
            prop_assert_eq!(parse_rational(&format_rational(&value)).unwrap(), value);
        }
    }
}

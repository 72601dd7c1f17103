//! Exact rational arithmetic helpers.
//!
//! Densities, thresholds and invariants are exact [`Rational`]s. Comparisons
//! against fractional powers of a rational `tau` are decided by raising both
//! sides to an integer power, so `x <= tau^(p/q) * s` becomes
//! `x^q <= tau^p * s^q` over big integers with no rounding.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Parses `"p/q"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: i64 = p
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in `{s}`")))?;
    let q: i64 = q
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in `{s}`")))?;
    if q == 0 {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(p, q))
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_ratio {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

fn to_big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Compares `count` with `tau^(num/den) * size` exactly.
///
/// `count`, `size` are non-negative and `tau` is in `(0, 1]`.
pub fn cmp_tau_power(count: usize, tau: &Rational, num: u32, den: u32, size: usize) -> Ordering {
    assert!(den > 0, "root index must be positive");
    debug_assert!(tau.is_positive());
    let lhs = BigRational::from_integer(BigInt::from(count)).pow(den as i32);
    let t = to_big(tau);
    let mut rhs = BigRational::one();
    for _ in 0..num {
        rhs *= &t;
    }
    rhs *= BigRational::from_integer(BigInt::from(size)).pow(den as i32);
    lhs.cmp(&rhs)
}

/// `count >= tau^(num/den) * size`.
pub fn at_least_tau_power(count: usize, tau: &Rational, num: u32, den: u32, size: usize) -> bool {
    cmp_tau_power(count, tau, num, den, size) != Ordering::Less
}

/// `count <= tau^(num/den) * size`.
pub fn at_most_tau_power(count: usize, tau: &Rational, num: u32, den: u32, size: usize) -> bool {
    cmp_tau_power(count, tau, num, den, size) != Ordering::Greater
}

/// Ceiling of a non-negative rational.
pub fn ceil_nonneg(r: &Rational) -> i64 {
    r.ceil().to_integer()
}

pub fn is_zero(r: &Rational) -> bool {
    r.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/6").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational(" 7 ").unwrap(), Rational::from_integer(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&Rational::new(10, 4)), "5/2");
        assert_eq!(format_rational(&Rational::from_integer(3)), "3/1");
    }

    #[test]
    fn tau_power_exact() {
        let tau = Rational::new(1, 1000);
        // tau^(1/3) = 1/10 exactly.
        assert_eq!(cmp_tau_power(10, &tau, 1, 3, 100), Ordering::Equal);
        assert!(at_least_tau_power(10, &tau, 1, 3, 100));
        assert!(at_most_tau_power(10, &tau, 1, 3, 100));
        assert!(!at_least_tau_power(9, &tau, 1, 3, 100));
        // tau^(2/3) = 1/100.
        assert_eq!(cmp_tau_power(1, &tau, 2, 3, 100), Ordering::Equal);
        // 1/100^(1/4) ~ 0.316
        let t = Rational::new(1, 100);
        assert!(at_most_tau_power(31, &t, 1, 4, 100));
        assert!(!at_most_tau_power(32, &t, 1, 4, 100));
    }
}

//! Exact rational helpers.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn q(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn qu(v: usize) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn floor_usize(r: &Rational) -> usize {
    r.floor().to_integer().to_usize().expect("non-negative floor")
}

pub fn ceil_usize(r: &Rational) -> usize {
    r.ceil().to_integer().to_usize().expect("non-negative ceil")
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn choose2(n: usize) -> u64 {
    (n as u64) * (n as u64).saturating_sub(1) / 2
}

/// Exact binomial coefficient.
pub fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `a >= c * sqrt(b)` for `b >= 0`, decided exactly.
pub fn ge_scaled_sqrt(a: &Rational, c: &Rational, b: &Rational) -> bool {
    let rhs_neg = c.is_negative();
    if !rhs_neg {
        if a.is_negative() {
            return false;
        }
        a * a >= c * c * b
    } else {
        if !a.is_negative() {
            return true;
        }
        a * a <= c * c * b
    }
}

/// Serialize a rational as `"p/q"` (or `"p"` when integral).
pub fn fmt(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        Some(BigRational::new(a, b))
    } else if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches('-'), fp);
        let num: BigInt = digits.parse().ok()?;
        let den = num_traits::pow(BigInt::from(10), fp.len());
        let r = BigRational::new(num, den);
        Some(if neg { -r } else { r })
    } else {
        Some(BigRational::from_integer(s.parse().ok()?))
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub mod serde_q {
    use super::*;
    use serde::Serializer;
    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt(r))
    }
}

pub mod serde_q_opt {
    use super::*;
    use serde::Serializer;
    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&fmt(r)),
            None => s.serialize_none(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("1/3"), Some(q(1, 3)));
        assert_eq!(parse("0.05"), Some(q(1, 20)));
        assert_eq!(parse("-0.5"), Some(q(-1, 2)));
        assert_eq!(parse("7"), Some(qi(7)));
        assert_eq!(parse("1/0"), None);
    }

    #[test]
    fn binom_small() {
        assert_eq!(binom(20, 10), BigUint::from(184756u32));
        assert_eq!(binom(5, 7), BigUint::zero());
    }

    #[test]
    fn sqrt_compare() {
        // 3 >= 1 * sqrt(9), 3 >= sqrt(10) false
        assert!(ge_scaled_sqrt(&qi(3), &qi(1), &qi(9)));
        assert!(!ge_scaled_sqrt(&qi(3), &qi(1), &qi(10)));
        assert!(ge_scaled_sqrt(&qi(-3), &qi(-1), &qi(9)));
        assert!(!ge_scaled_sqrt(&qi(-4), &qi(-1), &qi(9)));
    }
}

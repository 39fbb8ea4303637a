//! Extended rationals: exact rational numbers together with positive infinity.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// A cost value: a reduced rational number or `+∞`.
///
/// Ordering is total with every finite value below infinity. Addition
/// saturates at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtValue {
    Finite(BigRational),
    Infinite,
}

impl ExtValue {
    pub fn zero() -> Self {
        ExtValue::Finite(BigRational::zero())
    }

    pub fn int(n: i64) -> Self {
        ExtValue::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`, reduced. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        ExtValue::Finite(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        ExtValue::Finite(r)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtValue::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtValue::Infinite)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtValue::Finite(r) if r.is_zero())
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExtValue::Finite(r) => Some(r),
            ExtValue::Infinite => None,
        }
    }

    /// Numerator and (positive) denominator of a finite value.
    pub fn parts(&self) -> Option<(&BigInt, &BigInt)> {
        self.finite().map(|r| (r.numer(), r.denom()))
    }

    /// Multiply by a non-negative integer. `0 · ∞` is taken to be `∞`, since a
    /// repeated infeasible constraint stays infeasible however it is counted,
    /// except that zero repetitions contribute nothing.
    pub fn times(&self, count: usize) -> ExtValue {
        if count == 0 {
            return ExtValue::zero();
        }
        match self {
            ExtValue::Finite(r) => ExtValue::Finite(r * BigInt::from(count)),
            ExtValue::Infinite => ExtValue::Infinite,
        }
    }

    /// Subtraction of a finite amount. Infinity stays infinity.
    pub fn minus(&self, other: &BigRational) -> ExtValue {
        match self {
            ExtValue::Finite(r) => ExtValue::Finite(r - other),
            ExtValue::Infinite => ExtValue::Infinite,
        }
    }
}

impl Default for ExtValue {
    fn default() -> Self {
        ExtValue::zero()
    }
}

impl PartialOrd for ExtValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => a.cmp(b),
            (ExtValue::Finite(_), ExtValue::Infinite) => Ordering::Less,
            (ExtValue::Infinite, ExtValue::Finite(_)) => Ordering::Greater,
            (ExtValue::Infinite, ExtValue::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for ExtValue {
    type Output = ExtValue;
    fn add(self, rhs: ExtValue) -> ExtValue {
        match (self, rhs) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::Infinite,
        }
    }
}

impl<'a> Add<&'a ExtValue> for &'a ExtValue {
    type Output = ExtValue;
    fn add(self, rhs: &'a ExtValue) -> ExtValue {
        match (self, rhs) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::Infinite,
        }
    }
}

impl AddAssign<&ExtValue> for ExtValue {
    fn add_assign(&mut self, rhs: &ExtValue) {
        match (&mut *self, rhs) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => *a += b,
            _ => *self = ExtValue::Infinite,
        }
    }
}

impl AddAssign for ExtValue {
    fn add_assign(&mut self, rhs: ExtValue) {
        *self += &rhs;
    }
}

/// Scaling by a non-negative rational weight; `0 · ∞ = 0`.
impl Mul<&ExtValue> for &BigRational {
    type Output = ExtValue;
    fn mul(self, rhs: &ExtValue) -> ExtValue {
        match rhs {
            ExtValue::Finite(r) => ExtValue::Finite(self * r),
            ExtValue::Infinite if self.is_zero() => ExtValue::zero(),
            ExtValue::Infinite => ExtValue::Infinite,
        }
    }
}

impl Sum for ExtValue {
    fn sum<I: Iterator<Item = ExtValue>>(iter: I) -> Self {
        let mut acc = ExtValue::zero();
        for v in iter {
            acc += v;
            if acc.is_infinite() {
                break;
            }
        }
        acc
    }
}

impl<'a> Sum<&'a ExtValue> for ExtValue {
    fn sum<I: Iterator<Item = &'a ExtValue>>(iter: I) -> Self {
        let mut acc = ExtValue::zero();
        for v in iter {
            acc += v;
            if acc.is_infinite() {
                break;
            }
        }
        acc
    }
}

impl From<i64> for ExtValue {
    fn from(n: i64) -> Self {
        ExtValue::int(n)
    }
}

impl From<BigRational> for ExtValue {
    fn from(r: BigRational) -> Self {
        ExtValue::Finite(r)
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Infinite => f.write_str("inf"),
            ExtValue::Finite(r) if r.is_integer() => write!(f, "{}", r.numer()),
            ExtValue::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl FromStr for ExtValue {
    type Err = Error;

    /// Accepts `inf`, an integer, or `int/int` with a non-zero denominator.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidValue(s.to_string());
        if s == "inf" {
            return Ok(ExtValue::Infinite);
        }
        let parse_int = |t: &str| -> Result<BigInt, Error> {
            if t.is_empty() || t.starts_with('+') {
                return Err(bad());
            }
            t.parse::<BigInt>().map_err(|_| bad())
        };
        match s.split_once('/') {
            None => Ok(ExtValue::Finite(BigRational::from_integer(parse_int(s)?))),
            Some((n, d)) => {
                let n = parse_int(n)?;
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(ExtValue::Finite(BigRational::new(n, d)))
            }
        }
    }
}

/// Least common multiple of the denominators of the given finite values (1 when empty).
pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a ExtValue>) -> BigInt {
    values
        .into_iter()
        .filter_map(|v| v.finite())
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Largest integer `≤ r`.
pub fn floor(r: &BigRational) -> BigInt {
    let (q, _) = r.numer().div_mod_floor(r.denom());
    q
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn abs(r: &BigRational) -> BigRational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_tokens() {
        assert_eq!("3/2".parse::<ExtValue>().unwrap(), ExtValue::ratio(3, 2));
        assert_eq!("inf".parse::<ExtValue>().unwrap(), ExtValue::Infinite);
        assert_eq!("-4/6".parse::<ExtValue>().unwrap(), ExtValue::ratio(-2, 3));
        assert_eq!("0".parse::<ExtValue>().unwrap().to_string(), "0");
        assert!("1/0".parse::<ExtValue>().is_err());
        assert!("x".parse::<ExtValue>().is_err());
        assert!("+1".parse::<ExtValue>().is_err());
    }

    #[test]
    fn reduced_form() {
        let v = ExtValue::ratio(6, -4);
        let (n, d) = v.parts().unwrap();
        assert_eq!(n, &BigInt::from(-3));
        assert_eq!(d, &BigInt::from(2));
        assert_eq!(v.to_string(), "-3/2");
        assert_eq!(ExtValue::ratio(0, 7).to_string(), "0");
    }

    #[test]
    fn infinity_absorbs() {
        assert_eq!(ExtValue::int(3) + ExtValue::Infinite, ExtValue::Infinite);
        assert!(ExtValue::int(1_000_000) < ExtValue::Infinite);
        let s: ExtValue = vec![ExtValue::int(1), ExtValue::Infinite, ExtValue::int(2)]
            .into_iter()
            .sum();
        assert!(s.is_infinite());
    }

    #[test]
    fn floor_of_negative() {
        assert_eq!(floor(&rational(-1, 2)), BigInt::from(-1));
        assert_eq!(floor(&rational(5, 3)), BigInt::from(1));
    }

    proptest! {
        #[test]
        fn addition_is_exact_and_associative(
            a in (-50i64..50, 1i64..20), b in (-50i64..50, 1i64..20), c in (-50i64..50, 1i64..20)
        ) {
            let a = ExtValue::ratio(a.0, a.1);
            let b = ExtValue::ratio(b.0, b.1);
            let c = ExtValue::ratio(c.0, c.1);
            let left = (a.clone() + b.clone()) + c.clone();
            let right = a + (b + c);
            prop_assert_eq!(&left, &right);
            let (n, d) = left.parts().unwrap();
            prop_assert!(d > &BigInt::zero());
            prop_assert!(n.gcd(d).is_one());
        }

        #[test]
        fn display_parse_round_trip(n in -1000i64..1000, d in 1i64..50) {
            let v = ExtValue::ratio(n, d);
            prop_assert_eq!(v.to_string().parse::<ExtValue>().unwrap(), v);
        }
    }
}

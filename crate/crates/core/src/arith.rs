//! Exact scalar arithmetic: factorials, falling factorials and the
//! multinomial coefficient `(x choose n) = x(x-1)...(x-|n|+1) / (n_1!...n_m!)`,
//! which is zero as soon as some `n_i` is negative.
//!
//! Big integers and rationals come from `num-bigint` / `num-rational`; the
//! aliases below only fix the vocabulary used across the crate.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Natural = BigUint;
pub type Integer = BigInt;
/// Always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("length mismatch: {left} bases vs {right} exponents")]
    LengthMismatch { left: usize, right: usize },
    #[error("negative exponent {0} in power vector")]
    NegativeExponent(i64),
    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// An m-tuple of integers: `n`, `k`, `n - k` or an exponent vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexVector(Vec<i64>);

impl IndexVector {
    pub fn new(entries: Vec<i64>) -> Self {
        IndexVector(entries)
    }

    pub fn zeros(m: usize) -> Self {
        IndexVector(vec![0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    /// `|n| = n_1 + ... + n_m`.
    pub fn norm(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Whether every entry is nonnegative.
    pub fn is_natural(&self) -> bool {
        self.0.iter().all(|&v| v >= 0)
    }

    /// Componentwise difference. Panics on length mismatch.
    pub fn sub(&self, other: &IndexVector) -> IndexVector {
        assert_eq!(self.len(), other.len(), "index vector length mismatch");
        IndexVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// All vectors `k` with `0 <= k_i <= self_i`, in ascending lexicographic
    /// order. Empty when some entry is negative.
    pub fn box_below(&self) -> Vec<IndexVector> {
        if !self.is_natural() {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut cur = vec![0i64; self.len()];
        loop {
            out.push(IndexVector(cur.clone()));
            let mut i = self.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < self.0[i] {
                    cur[i] += 1;
                    for c in &mut cur[i + 1..] {
                        *c = 0;
                    }
                    break;
                }
            }
        }
    }
}

impl From<Vec<i64>> for IndexVector {
    fn from(v: Vec<i64>) -> Self {
        IndexVector(v)
    }
}

impl<const N: usize> From<[i64; N]> for IndexVector {
    fn from(v: [i64; N]) -> Self {
        IndexVector(v.to_vec())
    }
}

impl std::ops::Index<usize> for IndexVector {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl fmt::Display for IndexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

pub fn factorial(t: u64) -> Natural {
    (1..=t).fold(Natural::one(), |acc, j| acc * j)
}

/// `x(x-1)...(x-t+1)`; the empty product for `t = 0`.
pub fn falling_factorial(x: &Integer, t: u64) -> Integer {
    let mut acc = Integer::one();
    let mut factor = x.clone();
    for _ in 0..t {
        if factor.is_zero() {
            return Integer::zero();
        }
        acc *= &factor;
        factor -= 1;
    }
    acc
}

/// Falling factorial of a rational argument.
pub fn falling_factorial_rational(x: &Rational, t: u64) -> Rational {
    let mut acc = Rational::one();
    let mut factor = x.clone();
    for _ in 0..t {
        acc *= &factor;
        factor -= Rational::one();
    }
    acc
}

/// `n_1! n_2! ... n_m!` for a natural index vector.
pub fn factorial_product(n: &IndexVector) -> Natural {
    n.entries()
        .iter()
        .fold(Natural::one(), |acc, &v| acc * factorial(v as u64))
}

/// The multinomial coefficient `(x choose n)`.
///
/// Zero whenever some entry of `n` is negative. The division by `prod n_i!`
/// is exact for every integer `x`; a remainder means an arithmetic bug and
/// panics.
pub fn multinomial(x: &Integer, n: &IndexVector) -> Integer {
    if !n.is_natural() {
        return Integer::zero();
    }
    let numer = falling_factorial(x, n.norm() as u64);
    let denom = Integer::from(factorial_product(n));
    let (q, r) = numer.div_rem(&denom);
    assert!(
        r.is_zero(),
        "inexact multinomial division: ({x} choose {n}) left remainder {r}"
    );
    q
}

/// `(x choose n)` for a rational argument (no integrality assumed).
pub fn multinomial_rational(x: &Rational, n: &IndexVector) -> Rational {
    if !n.is_natural() {
        return Rational::zero();
    }
    let numer = falling_factorial_rational(x, n.norm() as u64);
    numer / Rational::from_integer(Integer::from(factorial_product(n)))
}

/// `b^a = b_1^{a_1} ... b_m^{a_m}`.
pub fn power_vec(b: &[Rational], a: &IndexVector) -> Result<Rational, ArithError> {
    if b.len() != a.len() {
        return Err(ArithError::LengthMismatch {
            left: b.len(),
            right: a.len(),
        });
    }
    let mut acc = Rational::one();
    for (base, &e) in b.iter().zip(a.entries()) {
        if e < 0 {
            return Err(ArithError::NegativeExponent(e));
        }
        acc *= num_traits::pow::pow(base.clone(), e as usize);
    }
    Ok(acc)
}

/// Parses `"p"` or `"p/q"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational, ArithError> {
    let s = s.trim();
    let bad = || ArithError::Parse(s.to_string());
    match s.split_once('/') {
        None => Integer::from_str(s)
            .map(Rational::from_integer)
            .map_err(|_| bad()),
        Some((p, q)) => {
            let p = Integer::from_str(p.trim()).map_err(|_| bad())?;
            let q = Integer::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(ArithError::ZeroDenominator(s.to_string()));
            }
            Ok(Rational::new(p, q))
        }
    }
}

pub fn parse_integer(s: &str) -> Result<Integer, ArithError> {
    Integer::from_str(s.trim()).map_err(|_| ArithError::Parse(s.to_string()))
}

/// `"p/q"`, with `/q` omitted when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational(n: i64) -> Rational {
    Rational::from_integer(Integer::from(n))
}

pub(crate) fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> Integer {
        Integer::from(v)
    }

    #[test]
    fn factorial_examples() {
        assert_eq!(factorial(0), Natural::from(1u32));
        assert_eq!(factorial(1), Natural::from(1u32));
        assert_eq!(factorial(5), Natural::from(120u32));
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(&int(3), 0), int(1));
        assert_eq!(falling_factorial(&int(5), 2), int(20));
        assert_eq!(falling_factorial(&int(2), 4), int(0));
        assert_eq!(falling_factorial(&int(-2), 3), int(-24));
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(&int(5), &[2, 1].into()), int(30));
        assert_eq!(multinomial(&int(7), &[-1, 2].into()), int(0));
        assert_eq!(multinomial(&int(-1), &[1].into()), int(-1));
        for x in -5..5 {
            assert_eq!(multinomial(&int(x), &IndexVector::default()), int(1));
        }
    }

    #[test]
    fn power_vec_examples() {
        let b = [rational(2), rational(3)];
        assert_eq!(power_vec(&b, &[0, 0].into()).unwrap(), rational(1));
        assert_eq!(power_vec(&b, &[1, 2].into()).unwrap(), rational(18));
        assert_eq!(power_vec(&[], &IndexVector::default()).unwrap(), rational(1));
        assert_eq!(
            power_vec(&b, &[1].into()),
            Err(ArithError::LengthMismatch { left: 2, right: 1 })
        );
        assert_eq!(power_vec(&b, &[1, -1].into()), Err(ArithError::NegativeExponent(-1)));
    }

    #[test]
    fn rational_text_roundtrip() {
        let r = parse_rational("6/-4").unwrap();
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(format_rational(&parse_rational("10/5").unwrap()), "2");
        assert_eq!(format_rational(&parse_rational("0/7").unwrap()), "0");
        assert!(matches!(parse_rational("1/0"), Err(ArithError::ZeroDenominator(_))));
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn box_below_is_lex_ascending() {
        let ks = IndexVector::from([1, 2]).box_below();
        let raw: Vec<Vec<i64>> = ks.iter().map(|k| k.entries().to_vec()).collect();
        assert_eq!(
            raw,
            vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]
        );
        assert_eq!(IndexVector::default().box_below(), vec![IndexVector::default()]);
        assert!(IndexVector::from([-1]).box_below().is_empty());
    }

    #[test]
    fn multinomial_times_factorials_is_falling_factorial() {
        // all n in N^m with |n| <= 8, m <= 3
        for m in 1..=3usize {
            for n in IndexVector::new(vec![8; m]).box_below() {
                if n.norm() > 8 {
                    continue;
                }
                for x in -20..=20 {
                    let lhs = multinomial(&int(x), &n) * Integer::from(factorial_product(&n));
                    assert_eq!(lhs, falling_factorial(&int(x), n.norm() as u64), "x={x} n={n}");
                }
            }
        }
    }

    #[test]
    fn multinomial_vanishes_off_the_naturals() {
        for a in -3..=3 {
            for b in -3..=3 {
                let n = IndexVector::from([a, b]);
                if a < 0 || b < 0 {
                    for x in -6..=6 {
                        assert_eq!(multinomial(&int(x), &n), int(0));
                    }
                }
            }
        }
    }
}

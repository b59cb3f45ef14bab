//! Sparse multivariate polynomials with exact rational coefficients over
//! `alpha, beta, x_1..x_m, y_1..y_m`.
//!
//! Terms are kept in a map keyed by [`Monomial`], whose `Ord` is the graded
//! lexicographic order induced by `Alpha < Beta < X(1) < ... < Y(m)` (the
//! variable listed first is the most significant). Zero coefficients are never
//! stored, so two polynomials are equal iff their term maps are equal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::{factorial_product, format_rational, IndexVector, Integer, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("no value assigned to variable {0}")]
    MissingVariable(VariableId),
    #[error("unknown variable name {0:?}")]
    UnknownVariable(String),
}

/// An indeterminate. The derived order is `Alpha < Beta < X(1) < ... < X(m) <
/// Y(1) < ... < Y(m)`; indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariableId {
    Alpha,
    Beta,
    X(u32),
    Y(u32),
}

impl VariableId {
    pub fn is_xy(self) -> bool {
        matches!(self, VariableId::X(_) | VariableId::Y(_))
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableId::Alpha => f.write_str("alpha"),
            VariableId::Beta => f.write_str("beta"),
            VariableId::X(i) => write!(f, "x{i}"),
            VariableId::Y(i) => write!(f, "y{i}"),
        }
    }
}

impl FromStr for VariableId {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PolyError::UnknownVariable(s.to_string());
        match s {
            "alpha" => Ok(VariableId::Alpha),
            "beta" => Ok(VariableId::Beta),
            _ => {
                let (kind, idx) = s.split_at(1.min(s.len()));
                let idx: u32 = idx.parse().map_err(|_| bad())?;
                if idx == 0 {
                    return Err(bad());
                }
                match kind {
                    "x" => Ok(VariableId::X(idx)),
                    "y" => Ok(VariableId::Y(idx)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

/// A power product: `(variable, exponent)` pairs sorted by variable, every
/// exponent positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(VariableId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VariableId) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Builds from arbitrary pairs, merging repeats and dropping zero
    /// exponents.
    pub fn from_pairs<I: IntoIterator<Item = (VariableId, u32)>>(pairs: I) -> Self {
        let mut map: BTreeMap<VariableId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_default() += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn factors(&self) -> &[(VariableId, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree_where(&self, pred: impl Fn(VariableId) -> bool) -> u32 {
        self.0.iter().filter(|&&(v, _)| pred(v)).map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: VariableId) -> u32 {
        self.0
            .iter()
            .find(|&&(w, _)| w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            // lex: the first variable (in VariableId order) whose exponents
            // differ decides; a variable missing on one side has exponent 0
            let (a, b) = (&self.0, &other.0);
            for (x, y) in a.iter().zip(b.iter()) {
                if x.0 != y.0 {
                    return if x.0 < y.0 {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    };
                }
                if x.1 != y.1 {
                    return x.1.cmp(&y.1);
                }
            }
            a.len().cmp(&b.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A polynomial in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::monomial(c, Monomial::one())
    }

    pub fn from_int(c: i64) -> Self {
        Polynomial::constant(Rational::from_integer(Integer::from(c)))
    }

    pub fn var(v: VariableId) -> Self {
        Polynomial::monomial(Rational::one(), Monomial::var(v))
    }

    pub fn monomial(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Maximum degree counting only variables that satisfy `pred`.
    pub fn degree_where(&self, pred: impl Fn(VariableId) -> bool + Copy) -> Option<u32> {
        self.terms.keys().map(|m| m.degree_where(pred)).max()
    }

    pub fn variables(&self) -> Vec<VariableId> {
        let mut vs: Vec<VariableId> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().map(|&(v, _)| v))
            .collect();
        vs.sort();
        vs.dedup();
        vs
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut result = Polynomial::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Exact value at a full assignment.
    pub fn evaluate(&self, assignment: &BTreeMap<VariableId, Rational>) -> Result<Rational, PolyError> {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut value = c.clone();
            for &(v, e) in &m.0 {
                let x = assignment.get(&v).ok_or(PolyError::MissingVariable(v))?;
                value *= num_traits::pow::pow(x.clone(), e as usize);
            }
            total += value;
        }
        Ok(total)
    }

    /// Evaluation at an integer point. `Ok(None)` if some coefficient is not
    /// an integer.
    pub fn evaluate_integer(&self, assignment: &BTreeMap<VariableId, Integer>) -> Result<Option<Integer>, PolyError> {
        let mut total = Integer::zero();
        for (m, c) in &self.terms {
            if !c.is_integer() {
                return Ok(None);
            }
            let mut value = c.to_integer();
            for &(v, e) in &m.0 {
                let x = assignment.get(&v).ok_or(PolyError::MissingVariable(v))?;
                value *= num_traits::pow::pow(x.clone(), e as usize);
            }
            total += value;
        }
        Ok(Some(total))
    }

    /// Partial evaluation: replaces the assigned variables by their values and
    /// keeps the rest symbolic.
    pub fn substitute(&self, assignment: &BTreeMap<VariableId, Rational>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for &(v, e) in &m.0 {
                match assignment.get(&v) {
                    Some(x) => coeff *= num_traits::pow::pow(x.clone(), e as usize),
                    None => rest.push((v, e)),
                }
            }
            out.add_term(Monomial(rest), coeff);
        }
        out
    }

    /// Applies a variable renaming (need not preserve order).
    pub fn rename(&self, f: impl Fn(VariableId) -> VariableId) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            out.add_term(Monomial::from_pairs(m.0.iter().map(|&(v, e)| (f(v), e))), c.clone());
        }
        out
    }

    /// Deterministic text form, e.g. `2*x1^2*y2 - 3/2*alpha*beta + 1`.
    pub fn canonical_string(&self) -> String {
        self.to_string()
    }
}

/// `(p choose n) = p(p-1)...(p-|n|+1) / (n_1!...n_m!)`, zero when some
/// `n_i < 0`.
pub fn multinomial_poly(p: &Polynomial, n: &IndexVector) -> Polynomial {
    if !n.is_natural() {
        return Polynomial::zero();
    }
    let mut acc = Polynomial::one();
    for j in 0..n.norm() {
        acc = &acc * &(p - &Polynomial::from_int(j));
    }
    let denom = Rational::from_integer(Integer::from(factorial_product(n)));
    acc.scale(&denom.recip())
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let negative = crate::arith::is_negative(c);
            let abs = if negative { -c.clone() } else { c.clone() };
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                f.write_str(&format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", format_rational(&abs))?;
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self += &rhs;
        self
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Polynomial {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl std::iter::Sum for Polynomial {
    fn sum<I: Iterator<Item = Polynomial>>(iter: I) -> Polynomial {
        iter.fold(Polynomial::zero(), |mut acc, p| {
            acc += &p;
            acc
        })
    }
}

//! Builders and verifiers for the three identities:
//!
//! * the binomial identity
//!   `sum_k C(n,k) C(n+k,k) (-1)^{n-k} (1+x)^k = sum_k C(n,k) C(n+k,k) x^k`,
//! * its two-parameter generalization
//!   `sum_k C(b-a+n, n-k) C(b+k, k) (-1)^{n-k} (x+y)^k y^{n-k}
//!      = sum_k C(a, n-k) C(b+k, k) x^k y^{n-k}`,
//! * and the multinomial form, where `n, k` range over `N^m`, the binomials
//!   become multinomial coefficients and powers are vector powers.
//!
//! Each side is first built as a [`SideExpr`], an unexpanded sum of products
//! of multinomial coefficients and powers. A side expression can be expanded
//! into a canonical [`Polynomial`] (symbolic checks) or evaluated directly at
//! a point (randomized checks) without expansion.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{
    falling_factorial, falling_factorial_rational, factorial, format_rational, multinomial, multinomial_rational,
    IndexVector, Integer, Rational,
};
use crate::exec::Exec;
use crate::multipoly::{multinomial_poly, PolyError, Polynomial, VariableId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentityError {
    #[error("m must be positive")]
    EmptyIndex,
    #[error("n must have nonnegative entries, got {0}")]
    NegativeIndex(IndexVector),
    #[error("x and y must both have length m = {m}, got {x} and {y}")]
    XyLength { m: usize, x: usize, y: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// How `alpha` or `beta` enters an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamMode {
    Symbolic,
    Concrete(Integer),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XyMode {
    Symbolic,
    Concrete { x: Vec<Rational>, y: Vec<Rational> },
}

/// Symbolic-or-concrete choices for `alpha`, `beta`, `x`, `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modes {
    pub alpha: ParamMode,
    pub beta: ParamMode,
    pub xy: XyMode,
}

impl Modes {
    pub fn symbolic() -> Self {
        Modes {
            alpha: ParamMode::Symbolic,
            beta: ParamMode::Symbolic,
            xy: XyMode::Symbolic,
        }
    }

    /// Concrete `alpha`, `beta`; symbolic `x`, `y`.
    pub fn concrete_ab(alpha: i64, beta: i64) -> Self {
        Modes {
            alpha: ParamMode::Concrete(alpha.into()),
            beta: ParamMode::Concrete(beta.into()),
            xy: XyMode::Symbolic,
        }
    }

    fn param(mode: &ParamMode, v: VariableId) -> Polynomial {
        match mode {
            ParamMode::Symbolic => Polynomial::var(v),
            ParamMode::Concrete(c) => Polynomial::constant(Rational::from_integer(c.clone())),
        }
    }

    pub fn alpha(&self) -> Polynomial {
        Self::param(&self.alpha, VariableId::Alpha)
    }

    pub fn beta(&self) -> Polynomial {
        Self::param(&self.beta, VariableId::Beta)
    }

    /// `x_i` with 1-based `i`.
    pub fn x(&self, i: usize) -> Polynomial {
        match &self.xy {
            XyMode::Symbolic => Polynomial::var(VariableId::X(i as u32)),
            XyMode::Concrete { x, .. } => Polynomial::constant(x[i - 1].clone()),
        }
    }

    pub fn y(&self, i: usize) -> Polynomial {
        match &self.xy {
            XyMode::Symbolic => Polynomial::var(VariableId::Y(i as u32)),
            XyMode::Concrete { y, .. } => Polynomial::constant(y[i - 1].clone()),
        }
    }

    /// Variables left symbolic, in canonical order.
    pub fn free_variables(&self, m: usize) -> Vec<VariableId> {
        let mut vs = Vec::new();
        if self.alpha == ParamMode::Symbolic {
            vs.push(VariableId::Alpha);
        }
        if self.beta == ParamMode::Symbolic {
            vs.push(VariableId::Beta);
        }
        if self.xy == XyMode::Symbolic {
            vs.extend((1..=m as u32).map(VariableId::X));
            vs.extend((1..=m as u32).map(VariableId::Y));
        }
        vs
    }
}

/// One instance of the multinomial identity: `n` together with the modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityInstance {
    n: IndexVector,
    modes: Modes,
}

impl IdentityInstance {
    pub fn new(n: IndexVector, modes: Modes) -> Result<Self, IdentityError> {
        if n.is_empty() {
            return Err(IdentityError::EmptyIndex);
        }
        if !n.is_natural() {
            return Err(IdentityError::NegativeIndex(n));
        }
        if let XyMode::Concrete { x, y } = &modes.xy {
            if x.len() != n.len() || y.len() != n.len() {
                return Err(IdentityError::XyLength {
                    m: n.len(),
                    x: x.len(),
                    y: y.len(),
                });
            }
        }
        Ok(IdentityInstance { n, modes })
    }

    pub fn symbolic(n: IndexVector) -> Result<Self, IdentityError> {
        Self::new(n, Modes::symbolic())
    }

    pub fn m(&self) -> usize {
        self.n.len()
    }

    pub fn n(&self) -> &IndexVector {
        &self.n
    }

    pub fn modes(&self) -> &Modes {
        &self.modes
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    /// `(arg choose n)` in the multinomial sense.
    Multinomial { arg: Polynomial, n: IndexVector },
    /// Scalar binomial `(arg choose j)`.
    Binomial { arg: Polynomial, j: i64 },
    Power { base: Polynomial, exp: u32 },
}

impl Factor {
    fn expand(&self) -> Polynomial {
        match self {
            Factor::Multinomial { arg, n } => multinomial_poly(arg, n),
            Factor::Binomial { arg, j } => binomial_poly(arg, *j),
            Factor::Power { base, exp } => base.pow(*exp),
        }
    }

    fn evaluate(&self, at: &BTreeMap<VariableId, Rational>) -> Result<Rational, PolyError> {
        Ok(match self {
            Factor::Multinomial { arg, n } => multinomial_rational(&arg.evaluate(at)?, n),
            Factor::Binomial { arg, j } => {
                if *j < 0 {
                    Rational::zero()
                } else {
                    falling_factorial_rational(&arg.evaluate(at)?, *j as u64)
                        / Rational::from_integer(factorial(*j as u64).into())
                }
            }
            Factor::Power { base, exp } => num_traits::pow::pow(base.evaluate(at)?, *exp as usize),
        })
    }

    fn evaluate_integer(&self, at: &BTreeMap<VariableId, Integer>) -> Result<Option<Integer>, PolyError> {
        let arg = match self {
            Factor::Multinomial { arg, .. } | Factor::Binomial { arg, .. } | Factor::Power { base: arg, .. } => arg,
        };
        let Some(v) = arg.evaluate_integer(at)? else {
            return Ok(None);
        };
        Ok(Some(match self {
            Factor::Multinomial { n, .. } => multinomial(&v, n),
            Factor::Binomial { j, .. } => {
                if *j < 0 {
                    Integer::zero()
                } else {
                    falling_factorial(&v, *j as u64) / Integer::from(factorial(*j as u64))
                }
            }
            Factor::Power { exp, .. } => num_traits::pow::pow(v, *exp as usize),
        }))
    }
}

/// `(p choose j) = p(p-1)...(p-j+1)/j!`, zero for negative `j`.
fn binomial_poly(p: &Polynomial, j: i64) -> Polynomial {
    if j < 0 {
        return Polynomial::zero();
    }
    let numer = (0..j).fold(Polynomial::one(), |acc, i| {
        &acc * &(p - &Polynomial::from_int(i))
    });
    numer.scale(&Rational::new(Integer::one(), factorial(j as u64).into()))
}

/// `coeff * prod(factors)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    pub coeff: Rational,
    pub factors: Vec<Factor>,
}

impl Summand {
    fn expand(&self) -> Polynomial {
        let mut acc = Polynomial::constant(self.coeff.clone());
        for f in &self.factors {
            if acc.is_zero() {
                break;
            }
            acc = &acc * &f.expand();
        }
        acc
    }

    fn evaluate(&self, at: &BTreeMap<VariableId, Rational>) -> Result<Rational, PolyError> {
        let mut acc = self.coeff.clone();
        for f in &self.factors {
            acc *= f.evaluate(at)?;
        }
        Ok(acc)
    }

    fn evaluate_integer(&self, at: &BTreeMap<VariableId, Integer>) -> Result<Option<Integer>, PolyError> {
        if !self.coeff.is_integer() {
            return Ok(None);
        }
        let mut acc = self.coeff.to_integer();
        for f in &self.factors {
            if acc.is_zero() {
                break;
            }
            match f.evaluate_integer(at)? {
                Some(v) => acc *= v,
                None => return Ok(None),
            }
        }
        Ok(Some(acc))
    }
}

/// One side of an identity, as an unexpanded sum of summands (lexicographic
/// `k` order).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SideExpr {
    pub summands: Vec<Summand>,
}

impl SideExpr {
    pub fn expand(&self, exec: Exec) -> Polynomial {
        exec.map(&self.summands, Summand::expand).into_iter().sum()
    }

    pub fn evaluate(&self, at: &BTreeMap<VariableId, Rational>) -> Result<Rational, PolyError> {
        let mut total = Rational::zero();
        for s in &self.summands {
            total += s.evaluate(at)?;
        }
        Ok(total)
    }

    /// Integer evaluation, skipping rational normalization. `Ok(None)` when a
    /// coefficient or an argument polynomial is not integral.
    pub fn evaluate_integer(&self, at: &BTreeMap<VariableId, Integer>) -> Result<Option<Integer>, PolyError> {
        let mut total = Integer::zero();
        for s in &self.summands {
            match s.evaluate_integer(at)? {
                Some(v) => total += v,
                None => return Ok(None),
            }
        }
        Ok(Some(total))
    }

    /// A copy with summand `index` removed; used for negative controls.
    pub fn without_summand(&self, index: usize) -> SideExpr {
        let mut out = self.clone();
        out.summands.remove(index);
        out
    }
}

fn sign(exponent: i64) -> Rational {
    if exponent.rem_euclid(2) == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// Left side of the multinomial identity:
/// `sum_k (-1)^{|n|-|k|} (b-a+|n| choose n-k) (b+|k| choose k) (x+y)^k y^{n-k}`.
pub fn lhs_eq3_expr(inst: &IdentityInstance) -> SideExpr {
    let md = &inst.modes;
    let n = &inst.n;
    let top = &(&md.beta() - &md.alpha()) + &Polynomial::from_int(n.norm());
    let summands = n
        .box_below()
        .into_iter()
        .map(|k| {
            let nk = n.sub(&k);
            let mut factors = vec![
                Factor::Multinomial {
                    arg: top.clone(),
                    n: nk.clone(),
                },
                Factor::Multinomial {
                    arg: &md.beta() + &Polynomial::from_int(k.norm()),
                    n: k.clone(),
                },
            ];
            for i in 1..=n.len() {
                factors.push(Factor::Power {
                    base: &md.x(i) + &md.y(i),
                    exp: k[i - 1] as u32,
                });
                factors.push(Factor::Power {
                    base: md.y(i),
                    exp: nk[i - 1] as u32,
                });
            }
            Summand {
                coeff: sign(nk.norm()),
                factors,
            }
        })
        .collect();
    SideExpr { summands }
}

/// Right side of the multinomial identity:
/// `sum_k (a choose n-k) (b+|k| choose k) x^k y^{n-k}`.
pub fn rhs_eq3_expr(inst: &IdentityInstance) -> SideExpr {
    let md = &inst.modes;
    let n = &inst.n;
    let summands = n
        .box_below()
        .into_iter()
        .map(|k| {
            let nk = n.sub(&k);
            let mut factors = vec![
                Factor::Multinomial {
                    arg: md.alpha(),
                    n: nk.clone(),
                },
                Factor::Multinomial {
                    arg: &md.beta() + &Polynomial::from_int(k.norm()),
                    n: k.clone(),
                },
            ];
            for i in 1..=n.len() {
                factors.push(Factor::Power {
                    base: md.x(i),
                    exp: k[i - 1] as u32,
                });
                factors.push(Factor::Power {
                    base: md.y(i),
                    exp: nk[i - 1] as u32,
                });
            }
            Summand {
                coeff: Rational::one(),
                factors,
            }
        })
        .collect();
    SideExpr { summands }
}

pub fn lhs_eq3(inst: &IdentityInstance) -> Polynomial {
    lhs_eq3_expr(inst).expand(Exec::default())
}

pub fn rhs_eq3(inst: &IdentityInstance) -> Polynomial {
    rhs_eq3_expr(inst).expand(Exec::default())
}

/// Left side of the two-parameter identity with scalar `n`, over `x = x1`,
/// `y = y1`.
pub fn lhs_eq2_expr(n: u32, modes: &Modes) -> SideExpr {
    let n = n as i64;
    let top = &(&modes.beta() - &modes.alpha()) + &Polynomial::from_int(n);
    SideExpr {
        summands: (0..=n)
            .map(|k| Summand {
                coeff: sign(n - k),
                factors: vec![
                    Factor::Binomial {
                        arg: top.clone(),
                        j: n - k,
                    },
                    Factor::Binomial {
                        arg: &modes.beta() + &Polynomial::from_int(k),
                        j: k,
                    },
                    Factor::Power {
                        base: &modes.x(1) + &modes.y(1),
                        exp: k as u32,
                    },
                    Factor::Power {
                        base: modes.y(1),
                        exp: (n - k) as u32,
                    },
                ],
            })
            .collect(),
    }
}

pub fn rhs_eq2_expr(n: u32, modes: &Modes) -> SideExpr {
    let n = n as i64;
    SideExpr {
        summands: (0..=n)
            .map(|k| Summand {
                coeff: Rational::one(),
                factors: vec![
                    Factor::Binomial {
                        arg: modes.alpha(),
                        j: n - k,
                    },
                    Factor::Binomial {
                        arg: &modes.beta() + &Polynomial::from_int(k),
                        j: k,
                    },
                    Factor::Power {
                        base: modes.x(1),
                        exp: k as u32,
                    },
                    Factor::Power {
                        base: modes.y(1),
                        exp: (n - k) as u32,
                    },
                ],
            })
            .collect(),
    }
}

pub fn lhs_eq2(n: u32, modes: &Modes) -> Polynomial {
    lhs_eq2_expr(n, modes).expand(Exec::Sequential)
}

pub fn rhs_eq2(n: u32, modes: &Modes) -> Polynomial {
    rhs_eq2_expr(n, modes).expand(Exec::Sequential)
}

fn binom(n: i64, k: i64) -> Rational {
    Rational::from_integer(multinomial(&n.into(), &[k].into()))
}

/// `sum_k C(n,k) C(n+k,k) (-1)^{n-k} (1+x)^k` in `x = x1`.
pub fn lhs_eq1(n: u32) -> Polynomial {
    let n = n as i64;
    let one_plus_x = &Polynomial::one() + &Polynomial::var(VariableId::X(1));
    (0..=n)
        .map(|k| one_plus_x.pow(k as u32).scale(&(binom(n, k) * binom(n + k, k) * sign(n - k))))
        .sum()
}

/// `sum_k C(n,k) C(n+k,k) x^k`.
pub fn rhs_eq1(n: u32) -> Polynomial {
    let n = n as i64;
    let x = Polynomial::var(VariableId::X(1));
    (0..=n)
        .map(|k| x.pow(k as u32).scale(&(binom(n, k) * binom(n + k, k))))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Symbolic,
    Randomized,
    Enumerative,
}

impl VerifyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            VerifyMode::Symbolic => "symbolic",
            VerifyMode::Randomized => "random",
            VerifyMode::Enumerative => "enumerate",
        }
    }
}

/// Outcome of an identity check.
///
/// In symbolic and enumerative mode `difference` is the exact polynomial
/// difference of the two compared sides. In randomized mode nothing is
/// expanded: `difference` is zero when no witness was found, otherwise the
/// constant `lhs - rhs` at the witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub equal: bool,
    pub mode: VerifyMode,
    pub difference: Polynomial,
    pub trials: Option<u64>,
    pub witness: Option<BTreeMap<VariableId, Rational>>,
}

impl VerifyReport {
    pub fn from_difference(mode: VerifyMode, difference: Polynomial) -> Self {
        VerifyReport {
            equal: difference.is_zero(),
            mode,
            difference,
            trials: None,
            witness: None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

struct Witness<'a>(&'a BTreeMap<VariableId, Rational>);

impl Serialize for Witness<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (v, r) in self.0 {
            map.serialize_entry(&v.to_string(), &format_rational(r))?;
        }
        map.end()
    }
}

impl Serialize for VerifyReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let len = 3 + self.trials.is_some() as usize + self.witness.is_some() as usize;
        let mut st = s.serialize_struct("VerifyReport", len)?;
        st.serialize_field("equal", &self.equal)?;
        st.serialize_field("mode", self.mode.as_str())?;
        st.serialize_field("difference", &self.difference.canonical_string())?;
        if let Some(t) = self.trials {
            st.serialize_field("trials", &t)?;
        }
        if let Some(w) = &self.witness {
            st.serialize_field("witness", &Witness(w))?;
        }
        st.end()
    }
}

pub fn verify_symbolic_sides(lhs: &SideExpr, rhs: &SideExpr, exec: Exec) -> VerifyReport {
    let diff = &lhs.expand(exec) - &rhs.expand(exec);
    VerifyReport::from_difference(VerifyMode::Symbolic, diff)
}

/// Expands both sides of the multinomial identity and compares canonical
/// forms.
pub fn verify_symbolic(inst: &IdentityInstance) -> VerifyReport {
    verify_symbolic_sides(&lhs_eq3_expr(inst), &rhs_eq3_expr(inst), Exec::default())
}

/// Settings for randomized identity testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSettings {
    pub trials: u64,
    pub seed: u64,
    /// Points are drawn uniformly from `[-range, range]`.
    pub range: u64,
}

impl Default for RandomSettings {
    fn default() -> Self {
        RandomSettings {
            trials: 1000,
            seed: 0,
            range: 1000,
        }
    }
}

/// Deterministic integer points, one map per trial, over `vars`.
pub fn random_points(vars: &[VariableId], settings: &RandomSettings) -> Vec<BTreeMap<VariableId, Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let r = settings.range.min(i64::MAX as u64) as i64;
    (0..settings.trials)
        .map(|_| {
            vars.iter()
                .map(|&v| (v, Rational::from_integer(rng.random_range(-r..=r).into())))
                .collect()
        })
        .collect()
}

pub fn verify_random_sides(
    lhs: &SideExpr,
    rhs: &SideExpr,
    vars: &[VariableId],
    settings: &RandomSettings,
    exec: Exec,
) -> Result<VerifyReport, IdentityError> {
    if settings.trials == 0 {
        return Err(IdentityError::NoTrials);
    }
    let points = random_points(vars, settings);
    let outcomes = exec.map(&points, |at| -> Result<Rational, PolyError> {
        let ints: Option<BTreeMap<VariableId, Integer>> =
            at.iter().map(|(&v, x)| x.is_integer().then(|| (v, x.to_integer()))).collect();
        if let Some(ints) = ints {
            if let (Some(l), Some(r)) = (lhs.evaluate_integer(&ints)?, rhs.evaluate_integer(&ints)?) {
                return Ok(Rational::from_integer(l - r));
            }
        }
        Ok(lhs.evaluate(at)? - rhs.evaluate(at)?)
    });
    for (at, diff) in points.iter().zip(outcomes) {
        let diff = diff?;
        if !diff.is_zero() {
            return Ok(VerifyReport {
                equal: false,
                mode: VerifyMode::Randomized,
                difference: Polynomial::constant(diff),
                trials: Some(settings.trials),
                witness: Some(at.clone()),
            });
        }
    }
    Ok(VerifyReport {
        equal: true,
        mode: VerifyMode::Randomized,
        difference: Polynomial::zero(),
        trials: Some(settings.trials),
        witness: None,
    })
}

/// Evaluates both sides of the multinomial identity at seeded random integer
/// points, without expanding either side.
pub fn verify_random(inst: &IdentityInstance, settings: &RandomSettings, exec: Exec) -> Result<VerifyReport, IdentityError> {
    verify_random_sides(
        &lhs_eq3_expr(inst),
        &rhs_eq3_expr(inst),
        &inst.modes.free_variables(inst.m()),
        settings,
        exec,
    )
}

fn compare_pairs(a: (Polynomial, Polynomial), b: (Polynomial, Polynomial)) -> VerifyReport {
    let lhs_diff = &a.0 - &b.0;
    let rhs_diff = &a.1 - &b.1;
    let difference = if lhs_diff.is_zero() { rhs_diff } else { lhs_diff };
    VerifyReport::from_difference(VerifyMode::Symbolic, difference)
}

/// The multinomial identity at `m = 1` against the two-parameter identity
/// built from its own formula, side by side. `difference` holds the first
/// nonzero side difference.
pub fn check_reduction_eq3_to_eq2(n: u32, modes: &Modes) -> Result<VerifyReport, IdentityError> {
    let inst = IdentityInstance::new(IndexVector::from([n as i64]), modes.clone())?;
    Ok(compare_pairs(
        (lhs_eq3(&inst), rhs_eq3(&inst)),
        (lhs_eq2(n, modes), rhs_eq2(n, modes)),
    ))
}

/// The two-parameter identity at `alpha = beta = n`, `y = 1` against the
/// binomial identity, side by side.
pub fn check_reduction_eq2_to_eq1(n: u32) -> VerifyReport {
    let nn = Rational::from_integer(n.into());
    let at: BTreeMap<VariableId, Rational> = [
        (VariableId::Alpha, nn.clone()),
        (VariableId::Beta, nn),
        (VariableId::Y(1), Rational::one()),
    ]
    .into();
    let modes = Modes::symbolic();
    compare_pairs(
        (lhs_eq2(n, &modes).substitute(&at), rhs_eq2(n, &modes).substitute(&at)),
        (lhs_eq1(n), rhs_eq1(n)),
    )
}

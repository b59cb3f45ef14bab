//! Weighted words ("configurations") whose signed weight sum is the left side
//! of the multinomial identity.
//!
//! For parameters `n in N^m`, `alpha`, `beta` a configuration is a word of
//! length `L = beta + |n|` over `{a, b_1, ..., b_m}`:
//!
//! * for some `0 <= k <= n`, `n_i - k_i` copies of each `b_i` sit in the first
//!   segment (positions `1..=F`, `F = beta - alpha + |n|`), weighted `y_i` and
//!   circled;
//! * the remaining positions, anywhere in the word, hold `beta` copies of `a`
//!   (weight 1) and `k_i` copies of each `b_i`, each weighted `x_i` or `y_i`.
//!
//! Positions are 1-based throughout, including the JSON form.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{multinomial, IndexVector, Integer, Natural, Rational};
use crate::exec::Exec;
use crate::identity::{IdentityInstance, Modes};
use crate::multipoly::{Monomial, Polynomial, VariableId};

pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("m must be positive")]
    EmptyIndex,
    #[error("n must have nonnegative entries, got {0}")]
    NegativeIndex(IndexVector),
    #[error("alpha must be at least {min}, got {alpha}")]
    AlphaTooSmall { alpha: i64, min: i64 },
    #[error("beta must be at least 1, got {0}")]
    BetaTooSmall(i64),
    #[error("beta ({beta}) must be at least alpha ({alpha})")]
    BetaBelowAlpha { alpha: i64, beta: i64 },
    #[error("k = {k} is not a vector with 0 <= k <= n = {n}")]
    BadK { k: IndexVector, n: IndexVector },
    #[error("configuration space has {count} elements, above the cap of {cap}")]
    CapExceeded { count: Natural, cap: u64 },
    #[error("invalid configuration: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("malformed configuration JSON: {0}")]
    Json(String),
}

fn join(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Parameters of the configuration space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConfigParams {
    n: IndexVector,
    alpha: i64,
    beta: i64,
}

impl ConfigParams {
    /// Requires `m >= 1`, `n >= 0`, `1 <= alpha <= beta`.
    pub fn new(n: IndexVector, alpha: i64, beta: i64) -> Result<Self, ConfigError> {
        Self::build(n, alpha, beta, 1)
    }

    /// Like [`ConfigParams::new`] but also accepts `alpha = 0`.
    pub fn new_permissive(n: IndexVector, alpha: i64, beta: i64) -> Result<Self, ConfigError> {
        Self::build(n, alpha, beta, 0)
    }

    fn build(n: IndexVector, alpha: i64, beta: i64, min_alpha: i64) -> Result<Self, ConfigError> {
        if n.is_empty() {
            return Err(ConfigError::EmptyIndex);
        }
        if !n.is_natural() {
            return Err(ConfigError::NegativeIndex(n));
        }
        if alpha < min_alpha {
            return Err(ConfigError::AlphaTooSmall { alpha, min: min_alpha });
        }
        if beta < 1 {
            return Err(ConfigError::BetaTooSmall(beta));
        }
        if beta < alpha {
            return Err(ConfigError::BetaBelowAlpha { alpha, beta });
        }
        Ok(ConfigParams { n, alpha, beta })
    }

    pub fn m(&self) -> usize {
        self.n.len()
    }

    pub fn n(&self) -> &IndexVector {
        &self.n
    }

    pub fn alpha(&self) -> i64 {
        self.alpha
    }

    pub fn beta(&self) -> i64 {
        self.beta
    }

    /// Word length `L = beta + |n|`.
    pub fn word_len(&self) -> usize {
        (self.beta + self.n.norm()) as usize
    }

    /// First-segment length `F = beta - alpha + |n|`.
    pub fn first_segment(&self) -> usize {
        (self.beta - self.alpha + self.n.norm()) as usize
    }

    /// The identity instance with these concrete `alpha`, `beta` and symbolic
    /// `x`, `y`.
    pub fn identity_instance(&self) -> IdentityInstance {
        IdentityInstance::new(self.n.clone(), Modes::concrete_ab(self.alpha, self.beta))
            .expect("validated params form a valid instance")
    }

    /// Every admissible `k`, ascending lexicographically.
    pub fn ks(&self) -> Vec<IndexVector> {
        self.n.box_below()
    }

    pub fn check_k(&self, k: &IndexVector) -> Result<(), ConfigError> {
        let ok = k.len() == self.m()
            && k.entries().iter().zip(self.n.entries()).all(|(&ki, &ni)| (0..=ni).contains(&ki));
        if ok {
            Ok(())
        } else {
            Err(ConfigError::BadK {
                k: k.clone(),
                n: self.n.clone(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    A,
    /// `b_i`, 1-based.
    B(u32),
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::A => f.write_str("a"),
            Letter::B(i) => write!(f, "b{i}"),
        }
    }
}

impl std::str::FromStr for Letter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "a" => Ok(Letter::A),
            _ => s
                .strip_prefix('b')
                .and_then(|i| i.parse().ok())
                .map(Letter::B)
                .ok_or_else(|| format!("bad letter {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightMark {
    One,
    X(u32),
    Y(u32),
}

impl WeightMark {
    pub fn is_y(self) -> bool {
        matches!(self, WeightMark::Y(_))
    }
}

impl fmt::Display for WeightMark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightMark::One => f.write_str("1"),
            WeightMark::X(i) => write!(f, "x{i}"),
            WeightMark::Y(i) => write!(f, "y{i}"),
        }
    }
}

impl std::str::FromStr for WeightMark {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad mark {s:?}");
        if s == "1" {
            return Ok(WeightMark::One);
        }
        let (kind, idx) = s.split_at(1.min(s.len()));
        let idx: u32 = idx.parse().map_err(|_| bad())?;
        match kind {
            "x" => Ok(WeightMark::X(idx)),
            "y" => Ok(WeightMark::Y(idx)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(count: usize) -> Sign {
        if count.is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// A broken configuration invariant. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WrongLength { letters: usize, marks: usize, expected: usize },
    LetterOutOfRange { position: usize },
    LetterCount { letter: Letter, expected: i64, found: i64 },
    MarkIncompatible { position: usize },
    CircleOutOfRange { position: usize },
    CircleOutsideFirstSegment { position: usize },
    CircleNotY { position: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongLength {
                letters,
                marks,
                expected,
            } => write!(f, "word length mismatch: {letters} letters, {marks} marks, expected {expected}"),
            Violation::LetterOutOfRange { position } => {
                write!(f, "letter index out of range at position {position}")
            }
            Violation::LetterCount {
                letter,
                expected,
                found,
            } => write!(f, "letter {letter} occurs {found} times, expected {expected}"),
            Violation::MarkIncompatible { position } => {
                write!(f, "mark incompatible with letter at position {position}")
            }
            Violation::CircleOutOfRange { position } => {
                write!(f, "circled position {position} is not in the word")
            }
            Violation::CircleOutsideFirstSegment { position } => {
                write!(f, "circled outside first segment at position {position}")
            }
            Violation::CircleNotY { position } => {
                write!(f, "circled position {position} is not a y-weighted b")
            }
        }
    }
}

/// A weighted word with its circled positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    params: ConfigParams,
    letters: Vec<Letter>,
    marks: Vec<WeightMark>,
    circled: BTreeSet<usize>,
}

impl Configuration {
    /// Assembles a configuration without checking it; see [`Self::validate`].
    pub fn from_parts(
        params: ConfigParams,
        letters: Vec<Letter>,
        marks: Vec<WeightMark>,
        circled: BTreeSet<usize>,
    ) -> Self {
        Configuration {
            params,
            letters,
            marks,
            circled,
        }
    }

    /// Like [`Self::from_parts`] but rejects invalid configurations.
    pub fn checked(
        params: ConfigParams,
        letters: Vec<Letter>,
        marks: Vec<WeightMark>,
        circled: BTreeSet<usize>,
    ) -> Result<Self, ConfigError> {
        let c = Self::from_parts(params, letters, marks, circled);
        c.ensure_valid()?;
        Ok(c)
    }

    pub fn params(&self) -> &ConfigParams {
        &self.params
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn marks(&self) -> &[WeightMark] {
        &self.marks
    }

    pub fn circled(&self) -> &BTreeSet<usize> {
        &self.circled
    }

    /// Letter at 1-based position `p`.
    pub fn letter(&self, p: usize) -> Letter {
        self.letters[p - 1]
    }

    pub fn mark(&self, p: usize) -> WeightMark {
        self.marks[p - 1]
    }

    /// A copy with the circled status of position `p` flipped.
    pub fn with_toggled(&self, p: usize) -> Configuration {
        let mut c = self.clone();
        if !c.circled.remove(&p) {
            c.circled.insert(p);
        }
        c
    }

    /// Every broken invariant, in position order; empty when valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let p = &self.params;
        let len = p.word_len();
        let first = p.first_segment();
        let m = p.m() as u32;
        if self.letters.len() != len || self.marks.len() != len {
            out.push(Violation::WrongLength {
                letters: self.letters.len(),
                marks: self.marks.len(),
                expected: len,
            });
            return out;
        }
        let mut counts = vec![0i64; p.m() + 1];
        for (idx, (&letter, &mark)) in self.letters.iter().zip(&self.marks).enumerate() {
            let pos = idx + 1;
            match letter {
                Letter::A => {
                    counts[0] += 1;
                    if mark != WeightMark::One {
                        out.push(Violation::MarkIncompatible { position: pos });
                    }
                }
                Letter::B(i) if i >= 1 && i <= m => {
                    counts[i as usize] += 1;
                    if mark != WeightMark::X(i) && mark != WeightMark::Y(i) {
                        out.push(Violation::MarkIncompatible { position: pos });
                    }
                }
                Letter::B(_) => out.push(Violation::LetterOutOfRange { position: pos }),
            }
        }
        if counts[0] != p.beta {
            out.push(Violation::LetterCount {
                letter: Letter::A,
                expected: p.beta,
                found: counts[0],
            });
        }
        for (i, (&found, &expected)) in counts[1..].iter().zip(p.n.entries()).enumerate() {
            if found != expected {
                out.push(Violation::LetterCount {
                    letter: Letter::B(i as u32 + 1),
                    expected,
                    found,
                });
            }
        }
        for &pos in &self.circled {
            if pos == 0 || pos > len {
                out.push(Violation::CircleOutOfRange { position: pos });
                continue;
            }
            if pos > first {
                out.push(Violation::CircleOutsideFirstSegment { position: pos });
            }
            let ok = matches!((self.letter(pos), self.mark(pos)), (Letter::B(i), WeightMark::Y(j)) if i == j);
            if !ok {
                out.push(Violation::CircleNotY { position: pos });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub(crate) fn ensure_valid(&self) -> Result<(), ConfigError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(v))
        }
    }

    pub(crate) fn k_unchecked(&self) -> IndexVector {
        let mut k = self.params.n.entries().to_vec();
        for &p in &self.circled {
            if let Letter::B(i) = self.letter(p) {
                k[i as usize - 1] -= 1;
            }
        }
        IndexVector::new(k)
    }

    pub(crate) fn sign_unchecked(&self) -> Sign {
        Sign::from_parity(self.circled.len())
    }

    /// Exponents of `x_1..x_m, y_1..y_m` in the weight.
    pub(crate) fn weight_exponents(&self) -> Vec<u32> {
        let m = self.params.m();
        let mut e = vec![0u32; 2 * m];
        for &mark in &self.marks {
            match mark {
                WeightMark::One => {}
                WeightMark::X(i) => e[i as usize - 1] += 1,
                WeightMark::Y(i) => e[m + i as usize - 1] += 1,
            }
        }
        e
    }

    /// `k_i = n_i - (number of circled b_i)`.
    pub fn k_of(&self) -> Result<IndexVector, ConfigError> {
        self.ensure_valid()?;
        Ok(self.k_unchecked())
    }

    /// `(-1)^(number of circles)`.
    pub fn sign(&self) -> Result<Sign, ConfigError> {
        self.ensure_valid()?;
        Ok(self.sign_unchecked())
    }

    /// Product of the position weights as a one-term polynomial.
    pub fn weight(&self) -> Result<Polynomial, ConfigError> {
        self.ensure_valid()?;
        Ok(weight_polynomial(&self.weight_exponents(), Rational::one()))
    }

    pub fn to_json(&self) -> ConfigurationJson {
        ConfigurationJson {
            m: self.params.m(),
            n: self.params.n.entries().to_vec(),
            alpha: self.params.alpha,
            beta: self.params.beta,
            letters: self.letters.iter().map(|l| l.to_string()).collect(),
            marks: self.marks.iter().map(|w| w.to_string()).collect(),
            circled: self.circled.iter().copied().collect(),
        }
    }

    /// Parses and validates one JSON configuration.
    pub fn from_json_str(s: &str) -> Result<Configuration, ConfigError> {
        let raw: ConfigurationJson = serde_json::from_str(s).map_err(|e| ConfigError::Json(e.to_string()))?;
        raw.into_configuration()
    }
}

/// Wire form of a [`Configuration`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigurationJson {
    pub m: usize,
    pub n: Vec<i64>,
    pub alpha: i64,
    pub beta: i64,
    pub letters: Vec<String>,
    pub marks: Vec<String>,
    pub circled: Vec<usize>,
}

impl ConfigurationJson {
    pub fn into_configuration(self) -> Result<Configuration, ConfigError> {
        if self.m != self.n.len() {
            return Err(ConfigError::Json(format!(
                "m = {} but n has {} entries",
                self.m,
                self.n.len()
            )));
        }
        let params = ConfigParams::new_permissive(IndexVector::new(self.n), self.alpha, self.beta)?;
        let letters = self
            .letters
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Letter>, _>>()
            .map_err(ConfigError::Json)?;
        let marks = self
            .marks
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<WeightMark>, _>>()
            .map_err(ConfigError::Json)?;
        let circled: BTreeSet<usize> = self.circled.iter().copied().collect();
        if circled.len() != self.circled.len() {
            return Err(ConfigError::Json("duplicate circled position".into()));
        }
        Configuration::checked(params, letters, marks, circled)
    }
}

pub(crate) fn weight_polynomial(exponents: &[u32], coeff: Rational) -> Polynomial {
    let m = exponents.len() / 2;
    let pairs = exponents.iter().enumerate().map(|(j, &e)| {
        let v = if j < m {
            VariableId::X(j as u32 + 1)
        } else {
            VariableId::Y((j - m) as u32 + 1)
        };
        (v, e)
    });
    Polynomial::monomial(coeff, Monomial::from_pairs(pairs))
}

/// Closed-form size of the `k`-slice:
/// `(F choose n-k) * (beta+|k| choose k) * 2^|k|`.
pub fn count_for_k(params: &ConfigParams, k: &IndexVector) -> Natural {
    let nk = params.n.sub(k);
    let placements = multinomial(&Integer::from(params.first_segment()), &nk)
        * multinomial(&Integer::from(params.beta + k.norm()), k);
    let marks = Integer::one() << k.norm() as usize;
    (placements * marks)
        .to_biguint()
        .expect("configuration counts are nonnegative")
}

/// Number of configurations, optionally restricted to one `k`, without
/// enumerating.
pub fn count(params: &ConfigParams, k: Option<&IndexVector>) -> Result<Natural, ConfigError> {
    match k {
        Some(k) => {
            params.check_k(k)?;
            Ok(count_for_k(params, k))
        }
        None => Ok(params.ks().iter().map(|k| count_for_k(params, k)).sum()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumOptions {
    /// Largest configuration space an enumeration-backed call accepts.
    pub cap: u64,
    pub exec: Exec,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            cap: DEFAULT_CAP,
            exec: Exec::default(),
        }
    }
}

pub(crate) fn check_cap(params: &ConfigParams, k: Option<&IndexVector>, cap: u64) -> Result<(), ConfigError> {
    let c = count(params, k)?;
    if c > Natural::from(cap) {
        return Err(ConfigError::CapExceeded { count: c, cap });
    }
    Ok(())
}

/// Streams every configuration (or those with the given `k`) in the
/// canonical order: `k` ascending, then circled placements, then uncircled
/// placements, then marks. Fails if the space exceeds `cap`.
pub fn enumerate(params: &ConfigParams, k_filter: Option<&IndexVector>, cap: u64) -> Result<ConfigIter, ConfigError> {
    check_cap(params, k_filter, cap)?;
    let ks = match k_filter {
        Some(k) => vec![k.clone()],
        None => params.ks(),
    };
    Ok(ConfigIter::new(params.clone(), ks))
}

/// Lexicographic `size`-subset of `pool` (indices into it).
#[derive(Debug, Clone)]
struct Level {
    size: usize,
    pool: Vec<usize>,
    idx: Vec<usize>,
}

impl Level {
    fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.idx.iter().map(|&i| self.pool[i])
    }

    fn advance(&mut self) -> bool {
        let (s, n) = (self.size, self.pool.len());
        let mut i = s;
        while i > 0 {
            i -= 1;
            if self.idx[i] < n - s + i {
                self.idx[i] += 1;
                for j in i + 1..s {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
}

/// Iterator behind [`enumerate`].
#[derive(Debug, Clone)]
pub struct ConfigIter {
    params: ConfigParams,
    ks: Vec<IndexVector>,
    next_k: usize,
    /// Circled levels `b_1..b_m`, then uncircled levels `b_1..b_m`.
    levels: Vec<Level>,
    /// Uncircled `b` positions ascending, and their Y (true) / X choices.
    free_b: Vec<usize>,
    mark_bits: Vec<bool>,
    active: bool,
}

impl ConfigIter {
    /// The slice with one fixed `k`, without the cap check.
    pub(crate) fn for_k(params: &ConfigParams, k: &IndexVector) -> Self {
        Self::new(params.clone(), vec![k.clone()])
    }

    fn new(params: ConfigParams, ks: Vec<IndexVector>) -> Self {
        let mut it = ConfigIter {
            params,
            ks,
            next_k: 0,
            levels: Vec::new(),
            free_b: Vec::new(),
            mark_bits: Vec::new(),
            active: false,
        };
        it.start_next_k();
        it
    }

    fn start_next_k(&mut self) {
        self.active = false;
        while self.next_k < self.ks.len() {
            let k = self.ks[self.next_k].clone();
            self.next_k += 1;
            let nk = self.params.n.sub(&k);
            if nk.norm() as usize > self.params.first_segment() {
                continue;
            }
            let sizes: Vec<usize> = nk
                .entries()
                .iter()
                .chain(k.entries())
                .map(|&v| v as usize)
                .collect();
            self.levels = sizes
                .into_iter()
                .map(|size| Level {
                    size,
                    pool: Vec::new(),
                    idx: Vec::new(),
                })
                .collect();
            self.reset_levels_from(0);
            self.active = true;
            return;
        }
    }

    /// Rebuilds pools of levels `from..` given the choices above them, each
    /// at its first subset, and resets the marks.
    fn reset_levels_from(&mut self, from: usize) {
        let m = self.params.m();
        let first = self.params.first_segment();
        let len = self.params.word_len();
        let mut used = vec![false; len + 1];
        for level in &self.levels[..from] {
            for p in level.positions() {
                used[p] = true;
            }
        }
        for j in from..self.levels.len() {
            let limit = if j < m { first } else { len };
            let pool: Vec<usize> = (1..=limit).filter(|&p| !used[p]).collect();
            let level = &mut self.levels[j];
            level.idx = (0..level.size).collect();
            level.pool = pool;
            for p in level.positions() {
                used[p] = true;
            }
        }
        self.free_b = self.levels[m..].iter().flat_map(Level::positions).collect();
        self.free_b.sort_unstable();
        self.mark_bits = vec![false; self.free_b.len()];
    }

    fn current(&self) -> Configuration {
        let m = self.params.m();
        let len = self.params.word_len();
        let mut letters = vec![Letter::A; len];
        let mut marks = vec![WeightMark::One; len];
        let mut circled = BTreeSet::new();
        for (j, level) in self.levels.iter().enumerate() {
            let i = (j % m) as u32 + 1;
            for p in level.positions() {
                letters[p - 1] = Letter::B(i);
                if j < m {
                    marks[p - 1] = WeightMark::Y(i);
                    circled.insert(p);
                }
            }
        }
        for (&p, &is_y) in self.free_b.iter().zip(&self.mark_bits) {
            let Letter::B(i) = letters[p - 1] else {
                unreachable!("free b position holds a b")
            };
            marks[p - 1] = if is_y { WeightMark::Y(i) } else { WeightMark::X(i) };
        }
        Configuration {
            params: self.params.clone(),
            letters,
            marks,
            circled,
        }
    }

    fn advance(&mut self) {
        for bit in self.mark_bits.iter_mut().rev() {
            if !*bit {
                *bit = true;
                return;
            }
            *bit = false;
        }
        let mut j = self.levels.len();
        while j > 0 {
            j -= 1;
            if self.levels[j].advance() {
                self.reset_levels_from(j + 1);
                return;
            }
        }
        self.start_next_k();
    }
}

impl Iterator for ConfigIter {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        if !self.active {
            return None;
        }
        let c = self.current();
        self.advance();
        Some(c)
    }
}

/// Accumulates weights as exponent vectors with integer multiplicities.
#[derive(Debug, Clone, Default)]
pub(crate) struct WeightTally {
    counts: HashMap<Vec<u32>, i128>,
}

impl WeightTally {
    pub(crate) fn add(&mut self, exponents: Vec<u32>, by: i128) {
        *self.counts.entry(exponents).or_insert(0) += by;
    }

    pub(crate) fn merge(&mut self, other: WeightTally) {
        for (e, c) in other.counts {
            self.add(e, c);
        }
    }

    pub(crate) fn to_polynomial(&self) -> Polynomial {
        self.counts
            .iter()
            .filter(|(_, &c)| c != 0)
            .map(|(e, &c)| weight_polynomial(e, Rational::from_integer(Integer::from(c))))
            .sum()
    }
}

/// `sum sign(c) * weight(c)` over the whole space, sharded by `k`.
pub fn signed_sum(params: &ConfigParams, opts: &EnumOptions) -> Result<Polynomial, ConfigError> {
    check_cap(params, None, opts.cap)?;
    let ks = params.ks();
    let shards = opts.exec.map(&ks, |k| {
        let mut tally = WeightTally::default();
        for c in ConfigIter::for_k(params, k) {
            tally.add(c.weight_exponents(), c.sign_unchecked().as_i8() as i128);
        }
        tally
    });
    let mut total = WeightTally::default();
    for s in shards {
        total.merge(s);
    }
    Ok(total.to_polynomial())
}

/// Unsigned weight sum of one `k`-slice with the slice's common sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSum {
    pub sign: Sign,
    pub unsigned: Polynomial,
}

pub fn k_sum(params: &ConfigParams, k: &IndexVector, cap: u64) -> Result<KSum, ConfigError> {
    let mut tally = WeightTally::default();
    for c in enumerate(params, Some(k), cap)? {
        tally.add(c.weight_exponents(), 1);
    }
    Ok(KSum {
        sign: Sign::from_parity(params.n.sub(k).norm() as usize),
        unsigned: tally.to_polynomial(),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::arith::rational;
    use crate::multipoly::VariableId::{X, Y};

    pub(crate) fn figure_params() -> ConfigParams {
        ConfigParams::new([2, 2].into(), 2, 4).unwrap()
    }

    /// `a b2 a b1 b2 a b1 a`, weights `1 x2 1 y1 y2 1 x1 1`, position 5 circled.
    pub(crate) fn figure_left() -> Configuration {
        let json = r#"{"m":2,"n":[2,2],"alpha":2,"beta":4,
            "letters":["a","b2","a","b1","b2","a","b1","a"],
            "marks":["1","x2","1","y1","y2","1","x1","1"],"circled":[5]}"#;
        Configuration::from_json_str(json).unwrap()
    }

    pub(crate) fn figure_right() -> Configuration {
        figure_left().with_toggled(4)
    }

    fn tiny(letters: &[&str], marks: &[&str], circled: &[usize]) -> Configuration {
        Configuration::from_parts(
            ConfigParams::new([1].into(), 1, 1).unwrap(),
            letters.iter().map(|s| s.parse().unwrap()).collect(),
            marks.iter().map(|s| s.parse().unwrap()).collect(),
            circled.iter().copied().collect(),
        )
    }

    fn v(id: VariableId) -> Polynomial {
        Polynomial::var(id)
    }

    #[test]
    fn params_validation() {
        assert_eq!(ConfigParams::new(IndexVector::default(), 1, 1), Err(ConfigError::EmptyIndex));
        assert_eq!(
            ConfigParams::new([1].into(), 2, 1),
            Err(ConfigError::BetaBelowAlpha { alpha: 2, beta: 1 })
        );
        assert_eq!(
            ConfigParams::new([1].into(), 0, 1),
            Err(ConfigError::AlphaTooSmall { alpha: 0, min: 1 })
        );
        assert!(ConfigParams::new_permissive([1].into(), 0, 1).is_ok());
        assert_eq!(ConfigParams::new([1].into(), 0, 0), Err(ConfigError::AlphaTooSmall { alpha: 0, min: 1 }));
        assert_eq!(ConfigParams::new_permissive([1].into(), 0, 0), Err(ConfigError::BetaTooSmall(0)));
        assert!(matches!(ConfigParams::new([1, -1].into(), 1, 1), Err(ConfigError::NegativeIndex(_))));
        let p = figure_params();
        assert_eq!((p.word_len(), p.first_segment()), (8, 6));
    }

    #[test]
    fn validate_examples() {
        assert!(figure_left().validate().is_empty());
        assert!(figure_right().validate().is_empty());

        let mut raw = figure_left().to_json();
        raw.circled = vec![7];
        let moved = ConfigurationJson::into_configuration(raw.clone());
        let Err(ConfigError::Invalid(vs)) = moved else {
            panic!("expected rejection, got {moved:?}")
        };
        assert!(vs.contains(&Violation::CircleOutsideFirstSegment { position: 7 }));
        assert!(vs[0].to_string().contains("circled outside first segment"));

        let c = tiny(&["a", "b1"], &["x1", "x1"], &[]);
        let vs = c.validate();
        assert_eq!(vs, vec![Violation::MarkIncompatible { position: 1 }]);
        assert!(vs[0].to_string().contains("mark incompatible with letter"));
    }

    #[test]
    fn validate_reports_each_broken_invariant() {
        let short = tiny(&["a"], &["1"], &[]);
        assert!(matches!(short.validate()[0], Violation::WrongLength { .. }));
        let counts = tiny(&["a", "a"], &["1", "1"], &[]);
        assert_eq!(
            counts.validate(),
            vec![
                Violation::LetterCount {
                    letter: Letter::A,
                    expected: 1,
                    found: 2
                },
                Violation::LetterCount {
                    letter: Letter::B(1),
                    expected: 1,
                    found: 0
                }
            ]
        );
        let x_circled = tiny(&["b1", "a"], &["x1", "1"], &[1]);
        assert_eq!(x_circled.validate(), vec![Violation::CircleNotY { position: 1 }]);
        let off_word = tiny(&["b1", "a"], &["y1", "1"], &[3]);
        assert_eq!(off_word.validate(), vec![Violation::CircleOutOfRange { position: 3 }]);
        let bad_index = tiny(&["b2", "a"], &["x2", "1"], &[]);
        assert!(bad_index.validate().contains(&Violation::LetterOutOfRange { position: 1 }));
        assert!(matches!(bad_index.k_of(), Err(ConfigError::Invalid(_))));
        assert!(bad_index.sign().is_err() && bad_index.weight().is_err());
    }

    #[test]
    fn k_sign_weight_examples() {
        assert_eq!(figure_left().k_of().unwrap(), IndexVector::from([2, 1]));
        assert_eq!(figure_right().k_of().unwrap(), IndexVector::from([1, 1]));
        let plain = figure_left().with_toggled(5);
        assert_eq!(plain.k_of().unwrap(), IndexVector::from([2, 2]));

        assert_eq!(plain.sign().unwrap(), Sign::Plus);
        assert_eq!(figure_left().sign().unwrap(), Sign::Minus);
        assert_eq!(figure_right().sign().unwrap(), Sign::Plus);

        let w = [X(1), X(2), Y(1), Y(2)].into_iter().map(v).fold(Polynomial::one(), |a, b| &a * &b);
        assert_eq!(figure_left().weight().unwrap(), w);
        let all_a = Configuration::checked(
            ConfigParams::new([0].into(), 1, 2).unwrap(),
            vec![Letter::A; 2],
            vec![WeightMark::One; 2],
            BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(all_a.weight().unwrap(), Polynomial::one());
        assert_eq!(tiny(&["b1", "a"], &["y1", "1"], &[]).weight().unwrap(), v(Y(1)));
    }

    #[test]
    fn json_roundtrip_matches_wire_format() {
        let c = figure_left();
        let s = serde_json::to_string(&c.to_json()).unwrap();
        assert_eq!(
            s,
            r#"{"m":2,"n":[2,2],"alpha":2,"beta":4,"letters":["a","b2","a","b1","b2","a","b1","a"],"marks":["1","x2","1","y1","y2","1","x1","1"],"circled":[5]}"#
        );
        assert_eq!(Configuration::from_json_str(&s).unwrap(), c);
        assert!(matches!(Configuration::from_json_str("{"), Err(ConfigError::Json(_))));
        let dup = s.replace("[5]", "[5,5]");
        assert!(matches!(Configuration::from_json_str(&dup), Err(ConfigError::Json(_))));
    }

    #[test]
    fn tiny_space_enumeration_order() {
        let p = ConfigParams::new([1].into(), 1, 1).unwrap();
        let words: Vec<String> = enumerate(&p, None, DEFAULT_CAP)
            .unwrap()
            .map(|c| {
                let s: Vec<String> = (1..=2)
                    .map(|q| {
                        let circ = if c.circled().contains(&q) { "*" } else { "" };
                        format!("{}:{}{}", c.letter(q), c.mark(q), circ)
                    })
                    .collect();
                s.join(" ")
            })
            .collect();
        assert_eq!(
            words,
            vec![
                "b1:y1* a:1",
                "b1:x1 a:1",
                "b1:y1 a:1",
                "a:1 b1:x1",
                "a:1 b1:y1",
            ]
        );
    }

    #[test]
    fn counts() {
        let p = ConfigParams::new([1].into(), 1, 1).unwrap();
        assert_eq!(count(&p, None).unwrap(), Natural::from(5u32));
        assert_eq!(count(&figure_params(), None).unwrap(), Natural::from(23490u32));
        assert_eq!(count(&figure_params(), Some(&[2, 1].into())).unwrap(), Natural::from(5040u32));
        let zero = ConfigParams::new([0, 0].into(), 2, 3).unwrap();
        assert_eq!(count(&zero, None).unwrap(), Natural::from(1u32));
        assert_eq!(enumerate(&zero, None, 10).unwrap().count(), 1);
        assert!(matches!(count(&p, Some(&[2].into())), Err(ConfigError::BadK { .. })));
        assert!(matches!(count(&p, Some(&[0, 0].into())), Err(ConfigError::BadK { .. })));
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate(&figure_params(), None, 1000).unwrap_err();
        assert_eq!(
            err,
            ConfigError::CapExceeded {
                count: Natural::from(23490u32),
                cap: 1000
            }
        );
        assert!(enumerate(&figure_params(), Some(&[2, 1].into()), 5040).is_ok());
        let opts = EnumOptions { cap: 10, ..Default::default() };
        assert!(signed_sum(&figure_params(), &opts).is_err());
    }

    #[test]
    fn sums_small_instance() {
        let p = ConfigParams::new([1].into(), 1, 1).unwrap();
        let two = rational(2);
        let expected = &v(X(1)).scale(&two) + &v(Y(1));
        assert_eq!(signed_sum(&p, &EnumOptions::default()).unwrap(), expected);
        let ks = k_sum(&p, &[1].into(), DEFAULT_CAP).unwrap();
        assert_eq!(ks.sign, Sign::Plus);
        assert_eq!(ks.unsigned, (&v(X(1)) + &v(Y(1))).scale(&two));
        let ks0 = k_sum(&p, &[0].into(), DEFAULT_CAP).unwrap();
        assert_eq!(ks0.sign, Sign::Minus);
        assert_eq!(ks0.unsigned, v(Y(1)));
        let zero = ConfigParams::new([0].into(), 1, 1).unwrap();
        assert_eq!(signed_sum(&zero, &EnumOptions::default()).unwrap(), Polynomial::one());
    }
}

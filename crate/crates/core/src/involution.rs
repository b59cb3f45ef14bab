//! The sign-reversing involution on configurations and its audit.
//!
//! The map finds the first position in the first segment whose mark is some
//! `y_i` and toggles its circle. Toggling keeps the weight, flips the parity of
//! the circle count and leaves that first `y` position unchanged, so the map is
//! its own inverse. Configurations without a `y` mark in the first segment are
//! fixed; their weights add up to the right side of the identity.

use serde::Serialize;
use thiserror::Error;

use crate::arith::{multinomial, IndexVector, Integer, Natural};
use crate::configspace::{
    check_cap, ConfigError, ConfigIter, ConfigParams, Configuration, ConfigurationJson, EnumOptions, Sign,
    WeightTally,
};
use crate::identity::{lhs_eq3_expr, rhs_eq3_expr, VerifyMode, VerifyReport};
use crate::multipoly::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvolutionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// The toggled partner broke a configuration invariant. This cannot
    /// happen for a correct implementation.
    #[error("internal error: partner of a valid configuration is invalid ({0:?})")]
    InvalidPartner(Box<Configuration>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvolutionOutcome {
    Fixed,
    Paired { partner: Configuration, toggled: usize },
}

impl InvolutionOutcome {
    pub fn is_fixed(&self) -> bool {
        matches!(self, InvolutionOutcome::Fixed)
    }
}

fn first_y_unchecked(c: &Configuration) -> Option<usize> {
    (1..=c.params().first_segment()).find(|&p| c.mark(p).is_y())
}

fn is_fixed_unchecked(c: &Configuration) -> bool {
    !c.marks()[..c.params().first_segment()].iter().any(|m| m.is_y())
}

fn apply_unchecked(c: &Configuration) -> InvolutionOutcome {
    match first_y_unchecked(c) {
        None => InvolutionOutcome::Fixed,
        Some(p) => InvolutionOutcome::Paired {
            partner: c.with_toggled(p),
            toggled: p,
        },
    }
}

/// Smallest first-segment position carrying a `y` mark, circled or not.
pub fn first_y_position(c: &Configuration) -> Result<Option<usize>, ConfigError> {
    c.ensure_valid()?;
    Ok(first_y_unchecked(c))
}

/// Applies the involution. The partner is checked for validity.
pub fn apply(c: &Configuration) -> Result<InvolutionOutcome, InvolutionError> {
    c.ensure_valid()?;
    let out = apply_unchecked(c);
    if let InvolutionOutcome::Paired { partner, .. } = &out {
        if !partner.is_valid() {
            return Err(InvolutionError::InvalidPartner(Box::new(partner.clone())));
        }
    }
    Ok(out)
}

/// True iff no first-segment position is weighted `y`.
pub fn is_fixed(c: &Configuration) -> Result<bool, ConfigError> {
    c.ensure_valid()?;
    Ok(is_fixed_unchecked(c))
}

/// Fixed points with their total weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPoints {
    pub count: u64,
    pub weight_sum: Polynomial,
}

pub fn fixed_points(params: &ConfigParams, opts: &EnumOptions) -> Result<FixedPoints, ConfigError> {
    check_cap(params, None, opts.cap)?;
    let ks = params.ks();
    let shards = opts.exec.map(&ks, |k| {
        let mut tally = WeightTally::default();
        let mut count = 0u64;
        for c in ConfigIter::for_k(params, k).filter(is_fixed_unchecked) {
            count += 1;
            tally.add(c.weight_exponents(), 1);
        }
        (count, tally)
    });
    let mut count = 0;
    let mut tally = WeightTally::default();
    for (c, t) in shards {
        count += c;
        tally.merge(t);
    }
    Ok(FixedPoints {
        count,
        weight_sum: tally.to_polynomial(),
    })
}

/// Sum of the weights of the fixed points.
pub fn fixed_point_sum(params: &ConfigParams, opts: &EnumOptions) -> Result<Polynomial, ConfigError> {
    Ok(fixed_points(params, opts)?.weight_sum)
}

/// Number of fixed points by counting: the `y`-weighted letters form `n - k`
/// inside the last `alpha` positions, and `a^beta` with `x`-weighted `b^k`
/// fill the rest, giving `sum_k (alpha choose n-k) (beta+|k| choose k)`.
pub fn fixed_point_count_closed_form(params: &ConfigParams) -> Natural {
    params
        .ks()
        .iter()
        .map(|k| {
            multinomial(&Integer::from(params.alpha()), &params.n().sub(k))
                * multinomial(&Integer::from(params.beta() + k.norm()), k)
        })
        .sum::<Integer>()
        .to_biguint()
        .expect("counts are nonnegative")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuditChecks {
    pub involutive: bool,
    pub sign_reversal: bool,
    pub weight_preserved: bool,
    pub fixed_characterization: bool,
    pub sums_match: bool,
}

impl AuditChecks {
    fn all_pass() -> Self {
        AuditChecks {
            involutive: true,
            sign_reversal: true,
            weight_preserved: true,
            fixed_characterization: true,
            sums_match: true,
        }
    }

    pub fn passed(&self) -> bool {
        self.involutive && self.sign_reversal && self.weight_preserved && self.fixed_characterization && self.sums_match
    }

    fn and(self, o: AuditChecks) -> AuditChecks {
        AuditChecks {
            involutive: self.involutive && o.involutive,
            sign_reversal: self.sign_reversal && o.sign_reversal,
            weight_preserved: self.weight_preserved && o.weight_preserved,
            fixed_characterization: self.fixed_characterization && o.fixed_characterization,
            sums_match: self.sums_match && o.sums_match,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuditTotals {
    pub configurations: u64,
    pub fixed_points: u64,
    pub pairs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditSums {
    pub lhs: String,
    pub rhs: String,
    pub signed_total: String,
    pub fixed_sum: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditInstance {
    pub m: usize,
    pub n: Vec<i64>,
    pub alpha: i64,
    pub beta: i64,
}

/// Result of [`audit`]; serializes to the documented JSON report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub instance: AuditInstance,
    pub checks: AuditChecks,
    pub totals: AuditTotals,
    pub sums: AuditSums,
    pub counterexample: Option<ConfigurationJson>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.passed() && self.counterexample.is_none()
    }
}

/// Per-configuration outcome of the local checks.
fn check_one(c: &Configuration) -> AuditChecks {
    let mut r = AuditChecks::all_pass();
    let sign = c.sign_unchecked();
    let outcome = apply_unchecked(c);
    r.fixed_characterization = outcome.is_fixed() == is_fixed_unchecked(c);
    match &outcome {
        InvolutionOutcome::Fixed => {
            r.fixed_characterization &= c.circled().is_empty() && sign == Sign::Plus && &c.k_unchecked() == c.params().n();
        }
        InvolutionOutcome::Paired { partner, toggled } => {
            let back = match apply_unchecked(partner) {
                InvolutionOutcome::Paired { partner: back, toggled: t2 } => t2 == *toggled && &back == c,
                InvolutionOutcome::Fixed => false,
            };
            r.involutive = partner.is_valid() && partner != c && back;
            r.sign_reversal = partner.sign_unchecked() == -sign;
            r.weight_preserved = partner.weight_exponents() == c.weight_exponents();
        }
    }
    r
}

struct Shard {
    checks: AuditChecks,
    configurations: u64,
    fixed: u64,
    paired: u64,
    signed: WeightTally,
    fixed_tally: WeightTally,
    counterexample: Option<Configuration>,
}

fn audit_shard(params: &ConfigParams, k: &IndexVector) -> Shard {
    let mut s = Shard {
        checks: AuditChecks::all_pass(),
        configurations: 0,
        fixed: 0,
        paired: 0,
        signed: WeightTally::default(),
        fixed_tally: WeightTally::default(),
        counterexample: None,
    };
    for c in ConfigIter::for_k(params, k) {
        s.configurations += 1;
        let r = check_one(&c);
        if !r.passed() && s.counterexample.is_none() {
            s.counterexample = Some(c.clone());
        }
        s.checks = s.checks.and(r);
        let e = c.weight_exponents();
        if is_fixed_unchecked(&c) {
            s.fixed += 1;
            s.fixed_tally.add(e.clone(), 1);
        } else {
            s.paired += 1;
        }
        s.signed.add(e, c.sign_unchecked().as_i8() as i128);
    }
    s
}

/// Runs every check on every configuration of `params`:
/// the map is an involution with valid, distinct partners; paired
/// configurations have opposite signs and equal weights; fixed points are
/// exactly the configurations with no first-segment `y`, have no circles and
/// are positive; and the signed total and fixed-point sum equal the two sides
/// of the identity at this `alpha`, `beta`. The first failing configuration
/// in enumeration order is reported.
pub fn audit(params: &ConfigParams, opts: &EnumOptions) -> Result<AuditReport, ConfigError> {
    check_cap(params, None, opts.cap)?;
    let ks = params.ks();
    let shards = opts.exec.map(&ks, |k| audit_shard(params, k));

    let mut checks = AuditChecks::all_pass();
    let (mut configurations, mut fixed, mut paired) = (0u64, 0u64, 0u64);
    let mut signed = WeightTally::default();
    let mut fixed_tally = WeightTally::default();
    let mut counterexample = None;
    for s in shards {
        checks = checks.and(s.checks);
        configurations += s.configurations;
        fixed += s.fixed;
        paired += s.paired;
        signed.merge(s.signed);
        fixed_tally.merge(s.fixed_tally);
        if counterexample.is_none() {
            counterexample = s.counterexample;
        }
    }
    // a perfect matching needs an even number of paired configurations
    checks.involutive &= paired % 2 == 0;

    let inst = params.identity_instance();
    let lhs = lhs_eq3_expr(&inst).expand(opts.exec);
    let rhs = rhs_eq3_expr(&inst).expand(opts.exec);
    let signed_total = signed.to_polynomial();
    let fixed_sum = fixed_tally.to_polynomial();
    checks.sums_match = signed_total == lhs && fixed_sum == rhs;

    Ok(AuditReport {
        instance: AuditInstance {
            m: params.m(),
            n: params.n().entries().to_vec(),
            alpha: params.alpha(),
            beta: params.beta(),
        },
        checks,
        totals: AuditTotals {
            configurations,
            fixed_points: fixed,
            pairs: paired / 2,
        },
        sums: AuditSums {
            lhs: lhs.canonical_string(),
            rhs: rhs.canonical_string(),
            signed_total: signed_total.canonical_string(),
            fixed_sum: fixed_sum.canonical_string(),
        },
        counterexample: counterexample.map(|c| c.to_json()),
    })
}

/// Verifies the identity at concrete `alpha`, `beta` by enumeration: the
/// signed configuration total must equal the left side, the fixed-point sum
/// the right side. `difference` is `signed_total - fixed_sum`.
pub fn verify_enumerative(params: &ConfigParams, opts: &EnumOptions) -> Result<VerifyReport, ConfigError> {
    let signed_total = crate::configspace::signed_sum(params, opts)?;
    let fixed = fixed_point_sum(params, opts)?;
    let inst = params.identity_instance();
    let lhs = lhs_eq3_expr(&inst).expand(opts.exec);
    let rhs = rhs_eq3_expr(&inst).expand(opts.exec);
    let difference = &signed_total - &fixed;
    Ok(VerifyReport {
        equal: difference.is_zero() && signed_total == lhs && fixed == rhs,
        mode: VerifyMode::Enumerative,
        difference,
        trials: None,
        witness: None,
    })
}

/// Fixed-point summary for the `fixed-points` report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedPointReport {
    pub instance: AuditInstance,
    pub fixed_points: u64,
    /// Decimal string; may exceed 64 bits in principle.
    pub closed_form_count: String,
    pub fixed_sum: String,
    pub rhs: String,
    pub equal: bool,
}

pub fn fixed_point_report(params: &ConfigParams, opts: &EnumOptions) -> Result<FixedPointReport, ConfigError> {
    let fp = fixed_points(params, opts)?;
    let rhs = rhs_eq3_expr(&params.identity_instance()).expand(opts.exec);
    let closed = fixed_point_count_closed_form(params);
    Ok(FixedPointReport {
        instance: AuditInstance {
            m: params.m(),
            n: params.n().entries().to_vec(),
            alpha: params.alpha(),
            beta: params.beta(),
        },
        fixed_points: fp.count,
        equal: fp.weight_sum == rhs && closed == Natural::from(fp.count),
        closed_form_count: closed.to_string(),
        fixed_sum: fp.weight_sum.canonical_string(),
        rhs: rhs.canonical_string(),
    })
}

//! Exact verification of a multinomial binomial-sum identity in two families
//! of variables, symbolically and through a sign-reversing involution on
//! weighted words.
//!
//! * [`arith`]: big integers, rationals, multinomial coefficients.
//! * [`multipoly`]: canonical sparse polynomials over `alpha, beta, x_i, y_i`.
//! * [`identity`]: both sides of the identities, symbolic and randomized checks.
//! * [`configspace`]: the weighted-word model, enumeration and signed sums.
//! * [`involution`]: the involution and its exhaustive audit.
//!
//! Loops over independent shards run on rayon when the `parallel` feature is
//! enabled (the default); see [`Exec`].

pub mod arith;
pub mod configspace;
pub mod exec;
pub mod identity;
pub mod involution;
pub mod multipoly;

pub use arith::{IndexVector, Integer, Natural, Rational};
pub use configspace::{ConfigError, ConfigParams, Configuration, EnumOptions};
pub use exec::Exec;
pub use identity::{IdentityInstance, Modes, VerifyReport};
pub use involution::{audit, AuditReport};
pub use multipoly::{Polynomial, VariableId};

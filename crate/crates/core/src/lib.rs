//! Trust decisions as statistical hypothesis tests.
//!
//! A system's observable behaviors form a finite [`BehaviorAlphabet`]; a trust
//! hypothesis is a [`BehaviorProfile`] over it. The crate offers
//!
//! - Fisher significance and Neyman-Pearson tests of a trustworthy null
//!   against observed events ([`testing`]);
//! - Bayesian updating and MAP selection over hypothesis sets ([`bayes`]);
//! - formulation of the null itself by two-part minimum description length
//!   over a quantized family of profiles ([`mdl`]);
//! - a seeded simulation harness with brute-force oracles ([`harness`]).
//!
//! Logarithms are base 2 throughout and `0·log 0 = 0`.

pub mod bayes;
pub mod error;
pub mod formats;
pub mod harness;
pub mod mdl;
pub mod model;
pub mod rng;
mod serde_ext;
pub mod testing;

pub use error::{Result, TrustError};
pub use model::{
    empirical_profile, log_likelihood, validate_profile, BehaviorAlphabet, BehaviorProfile,
    Hypothesis, HypothesisSet, Observation, PROB_SUM_TOLERANCE,
};
pub use testing::{Decision, TestReport, Variant, Verdict};

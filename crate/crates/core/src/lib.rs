//! Decides whether the insolvability results for `X^t + Y^t = B·Z^t` apply
//! to a given prime exponent `t > 3` and coefficient `B`.
//!
//! The crate checks every computable hypothesis exactly, reports the
//! hypotheses it imports from the literature, machine-checks the cyclotomic
//! identities the descent argument relies on, and cross-validates verdicts
//! against a bounded exhaustive search.

pub mod arith;
pub mod assumption;
pub mod bernoulli;
pub mod cyclotomic;
pub mod error;
pub mod hypotheses;
pub mod modgroup;
pub mod report;
pub mod search;
mod serde_str;

pub use error::{Error, Result};

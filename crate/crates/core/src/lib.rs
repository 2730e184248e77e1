//! Statistical risk analytics for an automobile insurance portfolio:
//! negative-binomial claim frequency by No-Claims-Discount level,
//! per-coverage severity fitting, quota-share reinsurance transforms, and
//! empirical VaR/CTE risk reports comparing bundled against unbundled
//! coverages, plus bundle-pricing decision rules.
//!
//! The seeded synthetic generator ([`synthgen`]) stands in for a real book
//! of ~22k policies so every analysis in the pipeline is reproducible from
//! a single seed.

pub mod bundling;
pub mod error;
pub mod frequency;
pub mod io;
pub mod model;
pub mod numeric;
pub mod reinsurance;
pub mod risk;
pub mod sample;
pub mod severity;
pub mod synthgen;

pub use error::{Error, Result};
pub use model::{ClaimEvent, Gender, LossType, PolicyHolder, Portfolio};
pub use sample::EmpiricalSample;

//! `EmpiricalSample`: an ordered multiset of non-negative loss amounts.
//!
//! Every risk measure, severity fit and reinsurance transform in this crate
//! operates on this type. Values are held sorted ascending and validated
//! finite and >= 0 at construction, so downstream code never re-checks.

use crate::error::{Error, Result};
use crate::numeric;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
}

impl EmpiricalSample {
    /// Build a sample from raw amounts. Sorts ascending; rejects negative,
    /// NaN or infinite values.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "sample value {v} is not finite"
                )));
            }
            if v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "sample value {v} is negative"
                )));
            }
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn empty() -> Self {
        Self { values: Vec::new() }
    }

    /// Internal constructor for values already known valid and sorted
    /// (e.g. a sorted sample scaled by a positive constant).
    pub(crate) fn from_sorted_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Self { values }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Compensated sum of all values.
    pub fn total(&self) -> f64 {
        numeric::compensated_sum(&self.values)
    }

    /// Sample mean (NaN on an empty sample).
    pub fn mean(&self) -> f64 {
        numeric::mean(&self.values)
    }

    /// Unbiased (n-1) sample variance (NaN for n < 2).
    pub fn variance(&self) -> f64 {
        numeric::sample_variance(&self.values)
    }

    /// Standardized third central moment (NaN for n < 2 or zero spread).
    pub fn skewness(&self) -> f64 {
        numeric::skewness(&self.values)
    }
}

//! Quota-share reinsurance transforms.
//!
//! `quota` is the fraction of each loss the ceding insurer RETAINS (a quota
//! of 0.25 retains 25% and cedes 75%); a quota of 1 is the no-reinsurance
//! book. Scaling every loss by a positive constant preserves sort order, so
//! retained samples keep the shape of the original: the mean scales by q,
//! the variance by q^2, and empirical quantile-based measures scale by q.
//! A quota of 0 is rejected: a fully ceded book has no retained
//! distribution left to analyze.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::{cte_empirical, var_empirical, Percentile};
use crate::sample::EmpiricalSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotaShare {
    quota: f64,
}

impl QuotaShare {
    pub fn new(quota: f64) -> Result<Self> {
        if !quota.is_finite() || quota <= 0.0 || quota > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "quota must lie in (0, 1], got {quota}"
            )));
        }
        Ok(Self { quota })
    }

    /// Fraction retained by the ceding insurer.
    pub fn retained_fraction(&self) -> f64 {
        self.quota
    }

    /// Fraction transferred to the reinsurer.
    pub fn ceded_fraction(&self) -> f64 {
        1.0 - self.quota
    }
}

/// Losses kept by the insurer: every value scaled by the quota. Order and
/// count are preserved.
pub fn retained_losses(sample: &EmpiricalSample, q: QuotaShare) -> EmpiricalSample {
    scale_sample(sample, q.retained_fraction())
}

/// Losses transferred to the reinsurer: every value scaled by 1 - quota.
pub fn ceded_losses(sample: &EmpiricalSample, q: QuotaShare) -> EmpiricalSample {
    scale_sample(sample, q.ceded_fraction())
}

fn scale_sample(sample: &EmpiricalSample, factor: f64) -> EmpiricalSample {
    let values: Vec<f64> = sample.values().iter().map(|v| v * factor).collect();
    // Multiplying by a non-negative constant preserves ascending order.
    EmpiricalSample::from_sorted_unchecked(values)
}

/// Closed-form moments of the retained book: (q * mean, q^2 * variance).
pub fn retained_moments(mean: f64, variance: f64, q: QuotaShare) -> Result<(f64, f64)> {
    if !(variance >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "variance must be >= 0, got {variance}"
        )));
    }
    let f = q.retained_fraction();
    Ok((f * mean, f * f * variance))
}

/// Summary statistics of one retained distribution in a quota sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotaSummary {
    pub quota: f64,
    pub mean: f64,
    pub variance: f64,
    pub var95: f64,
    pub cte95: f64,
}

/// Retained distributions and summaries across a set of quotas.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotaSweep {
    /// (quota, retained sample) ordered by quota ascending.
    pub retained: Vec<(QuotaShare, EmpiricalSample)>,
    pub summary: Vec<QuotaSummary>,
}

/// Evaluate the retained book at each quota (e.g. 0.25, 0.5, 0.75, 1.0).
pub fn quota_sweep(sample: &EmpiricalSample, quotas: &[f64]) -> Result<QuotaSweep> {
    if quotas.is_empty() {
        return Err(Error::InvalidArgument("quota list is empty".into()));
    }
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut parsed: Vec<QuotaShare> = quotas
        .iter()
        .map(|&q| QuotaShare::new(q))
        .collect::<Result<_>>()?;
    parsed.sort_by(|a, b| a.quota.total_cmp(&b.quota));

    let p95 = Percentile::new(0.95)?;
    let mut retained = Vec::with_capacity(parsed.len());
    let mut summary = Vec::with_capacity(parsed.len());
    for q in parsed {
        let kept = retained_losses(sample, q);
        summary.push(QuotaSummary {
            quota: q.retained_fraction(),
            mean: kept.mean(),
            variance: kept.variance(),
            var95: var_empirical(&kept, p95)?,
            cte95: cte_empirical(&kept, p95)?,
        });
        retained.push((q, kept));
    }
    Ok(QuotaSweep { retained, summary })
}

/// Write the sweep summary as CSV: `quota,mean,variance,var95,cte95`.
pub fn write_sweep_csv<W: std::io::Write>(sweep: &QuotaSweep, mut w: W) -> Result<()> {
    writeln!(w, "quota,mean,variance,var95,cte95")?;
    for s in &sweep.summary {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.quota, s.mean, s.variance, s.var95, s.cte95
        )?;
    }
    Ok(())
}

//! Per-coverage loss-severity modelling: maximum-likelihood fits for three
//! standard actuarial families (lognormal, gamma, Pareto) with AIC selection,
//! Gaussian kernel density estimation, and closed-form tail probabilities.
//!
//! Severity is conditional on a loss occurring: zero amounts are excluded
//! before fitting and the exclusion count is reported on the fit.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use statrs::function::gamma::{digamma, gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::numeric::{self, compensated_sum, trigamma};
use crate::sample::EmpiricalSample;

const SQRT_2PI: f64 = 2.5066282746310002;

/// A fitted (or calibrated) severity distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SeverityFamily {
    Lognormal { mu: f64, sigma: f64 },
    Gamma { shape: f64, scale: f64 },
    Pareto { x_min: f64, alpha: f64 },
}

/// Family selector for `fit_severity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Lognormal,
    Gamma,
    Pareto,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 3] = [FamilyKind::Lognormal, FamilyKind::Gamma, FamilyKind::Pareto];
}

impl SeverityFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SeverityFamily::Lognormal { mu, sigma } => mu.is_finite() && sigma > 0.0,
            SeverityFamily::Gamma { shape, scale } => shape > 0.0 && scale > 0.0,
            SeverityFamily::Pareto { x_min, alpha } => x_min > 0.0 && alpha > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid severity parameters: {self:?}"
            )))
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            SeverityFamily::Lognormal { .. } => FamilyKind::Lognormal,
            SeverityFamily::Gamma { .. } => FamilyKind::Gamma,
            SeverityFamily::Pareto { .. } => FamilyKind::Pareto,
        }
    }

    /// P(X <= x), closed form.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            SeverityFamily::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
                }
            }
            SeverityFamily::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_lr(shape, x / scale)
                }
            }
            SeverityFamily::Pareto { x_min, alpha } => {
                if x < x_min {
                    0.0
                } else {
                    1.0 - (x_min / x).powf(alpha)
                }
            }
        }
    }

    /// ln f(x); -inf outside the support.
    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            SeverityFamily::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let lx = x.ln();
                    let z = (lx - mu) / sigma;
                    -lx - sigma.ln() - SQRT_2PI.ln() - 0.5 * z * z
                }
            }
            SeverityFamily::Gamma { shape, scale } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (shape - 1.0) * x.ln() - x / scale - shape * scale.ln() - ln_gamma(shape)
                }
            }
            SeverityFamily::Pareto { x_min, alpha } => {
                if x < x_min {
                    f64::NEG_INFINITY
                } else {
                    alpha.ln() + alpha * x_min.ln() - (alpha + 1.0) * x.ln()
                }
            }
        }
    }

    /// Draw one amount.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            SeverityFamily::Lognormal { mu, sigma } => {
                rand_distr::LogNormal::new(mu, sigma)
                    .expect("validated parameters")
                    .sample(rng)
            }
            SeverityFamily::Gamma { shape, scale } => rand_distr::Gamma::new(shape, scale)
                .expect("validated parameters")
                .sample(rng),
            SeverityFamily::Pareto { x_min, alpha } => rand_distr::Pareto::new(x_min, alpha)
                .expect("validated parameters")
                .sample(rng),
        }
    }
}

/// Result of a maximum-likelihood severity fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityFit {
    pub family: SeverityFamily,
    pub loglik: f64,
    /// 2 * n_params - 2 * loglik; every family here has 2 parameters.
    pub aic: f64,
    /// Number of (strictly positive) values the fit used.
    pub n: usize,
    /// Zero amounts excluded before fitting.
    pub zeros_excluded: usize,
}

const N_PARAMS: f64 = 2.0;

fn positive_values(sample: &EmpiricalSample) -> (Vec<f64>, usize) {
    let vals: Vec<f64> = sample.values().iter().copied().filter(|&v| v > 0.0).collect();
    let zeros = sample.n() - vals.len();
    (vals, zeros)
}

fn loglik_of(family: &SeverityFamily, values: &[f64]) -> f64 {
    compensated_sum(&values.iter().map(|&x| family.log_pdf(x)).collect::<Vec<_>>())
}

/// Fit one family by maximum likelihood. Requires at least 3 positive values.
pub fn fit_severity(sample: &EmpiricalSample, kind: FamilyKind) -> Result<SeverityFit> {
    let (values, zeros_excluded) = positive_values(sample);
    let n = values.len();
    if n < 3 {
        return Err(Error::SampleTooSmall {
            required: 3,
            actual: n,
        });
    }
    let family = match kind {
        FamilyKind::Lognormal => fit_lognormal(&values)?,
        FamilyKind::Gamma => fit_gamma(&values)?,
        FamilyKind::Pareto => fit_pareto(&values)?,
    };
    let loglik = loglik_of(&family, &values);
    Ok(SeverityFit {
        family,
        loglik,
        aic: 2.0 * N_PARAMS - 2.0 * loglik,
        n,
        zeros_excluded,
    })
}

fn fit_lognormal(values: &[f64]) -> Result<SeverityFamily> {
    let logs: Vec<f64> = values.iter().map(|x| x.ln()).collect();
    let mu = numeric::mean(&logs);
    let var =
        compensated_sum(&logs.iter().map(|l| (l - mu).powi(2)).collect::<Vec<_>>())
            / logs.len() as f64;
    if var <= 0.0 {
        return Err(Error::Degenerate(
            "all values identical; lognormal sigma would be zero".into(),
        ));
    }
    Ok(SeverityFamily::Lognormal {
        mu,
        sigma: var.sqrt(),
    })
}

fn fit_gamma(values: &[f64]) -> Result<SeverityFamily> {
    let n = values.len() as f64;
    let mean = numeric::mean(values);
    let mean_log = numeric::mean(&values.iter().map(|x| x.ln()).collect::<Vec<_>>());
    // s = ln(mean) - mean(ln x) >= 0, zero only for a constant sample.
    let s = mean.ln() - mean_log;
    if s <= 1e-14 {
        return Err(Error::Degenerate(
            "all values identical; gamma shape diverges".into(),
        ));
    }
    // Minka's closed-form start, then Newton on ln k - psi(k) = s.
    let mut k = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..100 {
        let f = k.ln() - digamma(k) - s;
        let fp = 1.0 / k - trigamma(k);
        let step = f / fp;
        k -= step;
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Degenerate(format!(
                "gamma shape iteration left the domain (n = {n})"
            )));
        }
        if step.abs() < 1e-13 * k.max(1.0) {
            break;
        }
    }
    Ok(SeverityFamily::Gamma {
        shape: k,
        scale: mean / k,
    })
}

fn fit_pareto(values: &[f64]) -> Result<SeverityFamily> {
    // Values arrive ascending from EmpiricalSample, but accept any order.
    let x_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let sum_log_ratio =
        compensated_sum(&values.iter().map(|x| (x / x_min).ln()).collect::<Vec<_>>());
    if sum_log_ratio <= 0.0 {
        return Err(Error::Degenerate(
            "all values identical; Pareto alpha diverges".into(),
        ));
    }
    Ok(SeverityFamily::Pareto {
        x_min,
        alpha: values.len() as f64 / sum_log_ratio,
    })
}

/// Fit all three families, return the minimum-AIC fit. Ties break in family
/// order lognormal < gamma < Pareto. Requires at least 10 positive values.
pub fn best_fit(sample: &EmpiricalSample) -> Result<SeverityFit> {
    let (values, _) = positive_values(sample);
    if values.len() < 10 {
        return Err(Error::SampleTooSmall {
            required: 10,
            actual: values.len(),
        });
    }
    let mut best: Option<SeverityFit> = None;
    for kind in FamilyKind::ALL {
        if let Ok(fit) = fit_severity(sample, kind) {
            let better = match &best {
                None => true,
                Some(b) => fit.aic < b.aic,
            };
            if better {
                best = Some(fit);
            }
        }
    }
    best.ok_or_else(|| Error::Degenerate("all severity fits failed".into()))
}

/// Analytic log-likelihood gradient at the family's parameters, in the
/// family's natural parameter order. Stationarity at a fitted optimum is a
/// testable property of the fitters.
pub fn loglik_grad(family: &SeverityFamily, values: &[f64]) -> [f64; 2] {
    let n = values.len() as f64;
    match *family {
        SeverityFamily::Lognormal { mu, sigma } => {
            let logs: Vec<f64> = values.iter().map(|x| x.ln()).collect();
            let d_mu = compensated_sum(&logs.iter().map(|l| l - mu).collect::<Vec<_>>())
                / (sigma * sigma);
            let d_sigma = -n / sigma
                + compensated_sum(&logs.iter().map(|l| (l - mu).powi(2)).collect::<Vec<_>>())
                    / sigma.powi(3);
            [d_mu, d_sigma]
        }
        SeverityFamily::Gamma { shape, scale } => {
            let sum_log = compensated_sum(&values.iter().map(|x| x.ln()).collect::<Vec<_>>());
            let sum = compensated_sum(values);
            let d_shape = sum_log - n * scale.ln() - n * digamma(shape);
            let d_scale = sum / (scale * scale) - n * shape / scale;
            [d_shape, d_scale]
        }
        SeverityFamily::Pareto { x_min, alpha } => {
            // x_min is pinned at the sample minimum; only alpha is free.
            let sum_log_ratio =
                compensated_sum(&values.iter().map(|x| (x / x_min).ln()).collect::<Vec<_>>());
            [n / alpha - sum_log_ratio, 0.0]
        }
    }
}

/// Silverman's rule-of-thumb bandwidth: 0.9 * min(sd, IQR/1.34) * n^(-1/5).
pub fn silverman_bandwidth(sample: &EmpiricalSample) -> Result<f64> {
    let n = sample.n();
    if n < 2 {
        return Err(Error::SampleTooSmall {
            required: 2,
            actual: n,
        });
    }
    let sd = sample.variance().sqrt();
    let iqr = numeric::quantile_sorted(sample.values(), 0.75)
        - numeric::quantile_sorted(sample.values(), 0.25);
    let spread = sd.min(iqr / 1.34);
    let h = 0.9 * spread * (n as f64).powf(-0.2);
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::ZeroBandwidth);
    }
    Ok(h)
}

/// Gaussian-kernel density estimates at the given grid points.
/// `bandwidth = None` selects Silverman's rule.
pub fn kde_density(
    sample: &EmpiricalSample,
    grid: &[f64],
    bandwidth: Option<f64>,
) -> Result<Vec<f64>> {
    let n = sample.n();
    if n < 2 {
        return Err(Error::SampleTooSmall {
            required: 2,
            actual: n,
        });
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(_) => return Err(Error::ZeroBandwidth),
        None => silverman_bandwidth(sample)?,
    };
    let norm = 1.0 / (n as f64 * h * SQRT_2PI);
    let densities = grid
        .iter()
        .map(|&g| {
            let mut acc = 0.0;
            for &x in sample.values() {
                let t = (g - x) / h;
                acc += (-0.5 * t * t).exp();
            }
            acc * norm
        })
        .collect();
    Ok(densities)
}

/// Evenly spaced grid spanning [min - 4h, max + 4h]; the Gaussian kernel's
/// mass outside that span is negligible.
pub fn density_grid(sample: &EmpiricalSample, bandwidth: f64, points: usize) -> Vec<f64> {
    debug_assert!(points >= 2);
    let lo = sample.min().unwrap_or(0.0) - 4.0 * bandwidth;
    let hi = sample.max().unwrap_or(0.0) + 4.0 * bandwidth;
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

/// P(X <= threshold) under the fitted family.
pub fn tail_loss_probability(fit: &SeverityFit, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be > 0, got {threshold}"
        )));
    }
    Ok(fit.family.cdf(threshold))
}

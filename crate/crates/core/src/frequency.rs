//! Negative-binomial claim modelling with the NCD level as covariate.
//!
//! The pmf is parameterized by dispersion `r` and mean `mu`:
//!
//! ```text
//! P(k) = C(k + r - 1, k) * (r / (r + mu))^r * (mu / (r + mu))^k
//! ```
//!
//! so the variance is `mu + mu^2 / r`. Univariate fits (`fit_negbin`) profile
//! the likelihood: the mean MLE is the sample mean exactly, and `r` solves
//! the one-dimensional score equation by Newton in `ln r`. The regression
//! (`fit_ncd_regression`) uses a log link with the single covariate NCD/10
//! and alternates Fisher scoring on the coefficients with Newton on `ln r`.
//!
//! Responses are currency amounts rounded to the nearest integer unit so the
//! count likelihood applies; see `response_observations` for how each
//! response kind maps a portfolio onto observations.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::model::{Portfolio, NCD_LEVELS};
use crate::numeric::{compensated_sum, sample_variance, trigamma};

/// Dispersion/mean parameter pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegBinParams {
    pub r: f64,
    pub mu: f64,
}

impl NegBinParams {
    pub fn new(r: f64, mu: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() || !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "negative binomial parameters must be positive and finite, got r={r}, mu={mu}"
            )));
        }
        Ok(Self { r, mu })
    }
}

/// ln P(k); computed entirely in log space.
pub fn negbin_log_pmf(k: u64, p: &NegBinParams) -> f64 {
    let kf = k as f64;
    let (r, mu) = (p.r, p.mu);
    ln_gamma(kf + r) - ln_gamma(r) - ln_gamma(kf + 1.0) + r * (r.ln() - (r + mu).ln())
        + kf * (mu.ln() - (r + mu).ln())
}

/// P(k), exponentiated from log space and clamped to [0, 1].
pub fn negbin_pmf(k: u64, p: &NegBinParams) -> f64 {
    negbin_log_pmf(k, p).exp().clamp(0.0, 1.0)
}

/// Log-likelihood of iid counts under (r, mu).
pub fn negbin_loglik(counts: &[u64], r: f64, mu: f64) -> f64 {
    let p = NegBinParams { r, mu };
    compensated_sum(&counts.iter().map(|&k| negbin_log_pmf(k, &p)).collect::<Vec<_>>())
}

/// Analytic gradient (d/dr, d/dmu) of `negbin_loglik`.
pub fn negbin_loglik_grad(counts: &[u64], r: f64, mu: f64) -> (f64, f64) {
    let mut d_r = 0.0;
    let mut d_mu = 0.0;
    for &k in counts {
        let kf = k as f64;
        d_r += digamma(kf + r) - digamma(r) + (r / (r + mu)).ln() + 1.0 - (r + kf) / (r + mu);
        d_mu += kf / mu - (r + kf) / (r + mu);
    }
    (d_r, d_mu)
}

/// Profile score in r at the mean MLE mu = k-bar:
/// U(r) = sum psi(k_i + r) - n psi(r) + n ln(r / (r + mu)).
fn profile_score(counts: &[u64], r: f64, mu: f64) -> f64 {
    let n = counts.len() as f64;
    let mut acc = 0.0;
    for &k in counts {
        acc += digamma(k as f64 + r);
    }
    acc - n * digamma(r) + n * (r / (r + mu)).ln()
}

fn profile_score_deriv(counts: &[u64], r: f64, mu: f64) -> f64 {
    let n = counts.len() as f64;
    let mut acc = 0.0;
    for &k in counts {
        acc += trigamma(k as f64 + r);
    }
    acc - n * trigamma(r) + n * mu / (r * (r + mu))
}

const MAX_NEWTON_ITER: usize = 100;
const LOG_R_TOL: f64 = 1e-10;

/// Maximum-likelihood (r, mu) for iid counts.
///
/// mu-hat is the sample mean exactly; r-hat solves the profile score by
/// Newton in ln r from the method-of-moments start r0 = mu^2 / (s^2 - mu).
/// Underdispersed samples (s^2 <= mean) have no finite r-hat and error out
/// so the caller can fall back to a Poisson model.
pub fn fit_negbin(counts: &[u64]) -> Result<NegBinParams> {
    let n = counts.len();
    if n < 2 {
        return Err(Error::SampleTooSmall {
            required: 2,
            actual: n,
        });
    }
    if counts.iter().all(|&k| k == counts[0]) {
        return Err(Error::Degenerate(
            "all counts equal; dispersion is unidentifiable".into(),
        ));
    }
    let values: Vec<f64> = counts.iter().map(|&k| k as f64).collect();
    let mu = compensated_sum(&values) / n as f64;
    let s2 = sample_variance(&values);
    if s2 <= mu {
        return Err(Error::Underdispersed {
            mean: mu,
            variance: s2,
        });
    }

    let r0 = mu * mu / (s2 - mu);
    let mut t = r0.ln();
    let mut converged = false;
    for _ in 0..MAX_NEWTON_ITER {
        let r = t.exp();
        let u = profile_score(counts, r, mu);
        let du_dt = profile_score_deriv(counts, r, mu) * r;
        if du_dt == 0.0 || !du_dt.is_finite() {
            break;
        }
        let step = (u / du_dt).clamp(-2.0, 2.0);
        t -= step;
        if step.abs() < LOG_R_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: MAX_NEWTON_ITER,
            last_iterate: format!("r={}, mu={mu}", t.exp()),
        });
    }
    // One polishing step: quadratic convergence drives the score residual to
    // its floating-point floor.
    let r = t.exp();
    let u = profile_score(counts, r, mu);
    let du_dt = profile_score_deriv(counts, r, mu) * r;
    let t = if du_dt.is_finite() && du_dt != 0.0 {
        t - (u / du_dt).clamp(-2.0, 2.0)
    } else {
        t
    };
    NegBinParams::new(t.exp(), mu)
}

/// The three Table-1 random variables a portfolio can be summarized by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResponseKind {
    IndividualLoss,
    SumByType,
    SumByEvent,
}

impl ResponseKind {
    pub const ALL: [ResponseKind; 3] = [
        ResponseKind::IndividualLoss,
        ResponseKind::SumByType,
        ResponseKind::SumByEvent,
    ];

    /// Stable code used in CSV output and CLI flags.
    pub fn code(self) -> &'static str {
        match self {
            ResponseKind::IndividualLoss => "indl",
            ResponseKind::SumByType => "type",
            ResponseKind::SumByEvent => "event",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "indl" => Some(ResponseKind::IndividualLoss),
            "type" => Some(ResponseKind::SumByType),
            "event" => Some(ResponseKind::SumByEvent),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ResponseKind::IndividualLoss => "Indl. Loss",
            ResponseKind::SumByType => "Sum Losses-Type",
            ResponseKind::SumByEvent => "Sum Losses-Sp. Event",
        }
    }

    pub fn index(self) -> usize {
        match self {
            ResponseKind::IndividualLoss => 0,
            ResponseKind::SumByType => 1,
            ResponseKind::SumByEvent => 2,
        }
    }
}

/// One regression observation: covariate NCD/10 and rounded response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub ncd_level: u8,
    pub response: u64,
}

/// Map a portfolio onto regression observations for a response kind.
///
/// Observations aggregate at the policyholder level so claim frequency flows
/// into the response; policyholders (or policyholder/type pairs) without
/// claims contribute explicit zero responses.
///
/// * `SumByEvent`: one observation per policyholder, the sum of all losses
///   across that policyholder's accidents.
/// * `SumByType`: three observations per policyholder, the per-type sums
///   across that policyholder's accidents.
/// * `IndividualLoss`: one observation per typed loss entry, plus one zero
///   observation per claim-free policyholder.
pub fn response_observations(portfolio: &Portfolio, kind: ResponseKind) -> Vec<Observation> {
    use std::collections::HashMap;

    let round = |x: f64| -> u64 { x.round() as u64 };
    let mut out = Vec::new();
    match kind {
        ResponseKind::SumByEvent => {
            let mut totals: HashMap<&str, f64> = HashMap::new();
            for ev in portfolio.events() {
                *totals.entry(ev.policyholder_id.as_str()).or_insert(0.0) += ev.total();
            }
            for ph in portfolio.policyholders() {
                let total = totals.get(ph.id.as_str()).copied().unwrap_or(0.0);
                out.push(Observation {
                    ncd_level: ph.ncd_level,
                    response: round(total),
                });
            }
        }
        ResponseKind::SumByType => {
            let mut totals: HashMap<&str, [f64; 3]> = HashMap::new();
            for ev in portfolio.events() {
                let entry = totals
                    .entry(ev.policyholder_id.as_str())
                    .or_insert([0.0; 3]);
                for (t, amount) in &ev.losses {
                    entry[t.index()] += amount;
                }
            }
            for ph in portfolio.policyholders() {
                let sums = totals.get(ph.id.as_str()).copied().unwrap_or([0.0; 3]);
                for sum in sums {
                    out.push(Observation {
                        ncd_level: ph.ncd_level,
                        response: round(sum),
                    });
                }
            }
        }
        ResponseKind::IndividualLoss => {
            let mut has_claims: HashMap<&str, bool> = HashMap::new();
            for ev in portfolio.events() {
                has_claims.insert(ev.policyholder_id.as_str(), true);
                let ncd = portfolio
                    .ncd_of(&ev.policyholder_id)
                    .expect("validated portfolio");
                for (_, amount) in &ev.losses {
                    out.push(Observation {
                        ncd_level: ncd,
                        response: round(*amount),
                    });
                }
            }
            for ph in portfolio.policyholders() {
                if !has_claims.contains_key(ph.id.as_str()) {
                    out.push(Observation {
                        ncd_level: ph.ncd_level,
                        response: 0,
                    });
                }
            }
        }
    }
    out
}

/// Fitted log-link regression: predicted mean = exp(intercept + slope * d/10)
/// at NCD level d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcdRegressionModel {
    pub kind: ResponseKind,
    pub intercept: f64,
    /// Change of the log mean per NCD decade.
    pub slope: f64,
    pub r: f64,
    pub loglik: f64,
    pub n_obs: usize,
    pub iterations: usize,
}

impl NcdRegressionModel {
    pub fn predicted_mean(&self, ncd_level: u8) -> f64 {
        (self.intercept + self.slope * f64::from(ncd_level) / 10.0).exp()
    }
}

fn regression_loglik(obs: &[(f64, u64)], beta0: f64, beta1: f64, r: f64) -> f64 {
    let terms: Vec<f64> = obs
        .iter()
        .map(|&(x, k)| {
            let mu = (beta0 + beta1 * x).exp();
            negbin_log_pmf(k, &NegBinParams { r, mu })
        })
        .collect();
    compensated_sum(&terms)
}

/// Fit the NCD regression for one response kind.
///
/// Requires claims at two or more distinct NCD levels; fails with the last
/// iterate if the alternating maximization does not converge.
pub fn fit_ncd_regression(portfolio: &Portfolio, kind: ResponseKind) -> Result<NcdRegressionModel> {
    let observations = response_observations(portfolio, kind);
    let levels_with_claims: std::collections::BTreeSet<u8> = portfolio
        .events()
        .iter()
        .filter_map(|ev| portfolio.ncd_of(&ev.policyholder_id))
        .collect();
    if levels_with_claims.len() < 2 {
        return Err(Error::InsufficientNcdDiversity {
            levels: levels_with_claims.len(),
        });
    }

    let obs: Vec<(f64, u64)> = observations
        .iter()
        .map(|o| (f64::from(o.ncd_level) / 10.0, o.response))
        .collect();
    let n = obs.len() as f64;

    // Method-of-moments start.
    let values: Vec<f64> = obs.iter().map(|&(_, k)| k as f64).collect();
    let mean = compensated_sum(&values) / n;
    let var = sample_variance(&values);
    let mut beta0 = mean.max(1e-8).ln();
    let mut beta1 = 0.0;
    let mut log_r = if var > mean {
        (mean * mean / (var - mean)).max(1e-6).ln()
    } else {
        // Start from a near-Poisson dispersion when the raw moments do not
        // show overdispersion; the profile step will move it if needed.
        10f64.ln()
    };

    let mut iterations = 0;
    let mut converged = false;
    'outer: for _ in 0..MAX_NEWTON_ITER {
        iterations += 1;
        let mut outer_change = 0.0f64;

        // Fisher scoring on the coefficients for fixed r.
        let r = log_r.exp();
        for _ in 0..50 {
            let mut g0 = 0.0;
            let mut g1 = 0.0;
            let mut w00 = 0.0;
            let mut w01 = 0.0;
            let mut w11 = 0.0;
            for &(x, k) in &obs {
                let mu = (beta0 + beta1 * x).exp();
                let resid = (k as f64 - mu) * r / (r + mu);
                let w = mu * r / (r + mu);
                g0 += resid;
                g1 += resid * x;
                w00 += w;
                w01 += w * x;
                w11 += w * x * x;
            }
            let det = w00 * w11 - w01 * w01;
            if det.abs() < 1e-12 || !det.is_finite() {
                break 'outer;
            }
            let d0 = (w11 * g0 - w01 * g1) / det;
            let d1 = (w00 * g1 - w01 * g0) / det;
            beta0 += d0;
            beta1 += d1;
            let step = d0.abs().max(d1.abs());
            outer_change = outer_change.max(step);
            if step < 1e-12 {
                break;
            }
        }

        // Newton on ln r for fixed coefficients.
        for _ in 0..50 {
            let r = log_r.exp();
            let mut score = 0.0;
            let mut deriv = 0.0;
            for &(x, k) in &obs {
                let kf = k as f64;
                let mu = (beta0 + beta1 * x).exp();
                score += digamma(kf + r) - digamma(r) + (r / (r + mu)).ln() + 1.0
                    - (r + kf) / (r + mu);
                deriv += trigamma(kf + r) - trigamma(r) + 1.0 / r - 1.0 / (r + mu)
                    + (kf - mu) / ((r + mu) * (r + mu));
            }
            let du_dt = deriv * r;
            if du_dt == 0.0 || !du_dt.is_finite() {
                break;
            }
            let step = (score / du_dt).clamp(-2.0, 2.0);
            log_r -= step;
            outer_change = outer_change.max(step.abs());
            if step.abs() < 1e-12 {
                break;
            }
        }

        if outer_change < LOG_R_TOL {
            converged = true;
            break;
        }
    }

    let r = log_r.exp();
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            last_iterate: format!("intercept={beta0}, slope={beta1}, r={r}"),
        });
    }

    Ok(NcdRegressionModel {
        kind,
        intercept: beta0,
        slope: beta1,
        r,
        loglik: regression_loglik(&obs, beta0, beta1, r),
        n_obs: obs.len(),
        iterations,
    })
}

/// The Table-1-shaped grid: one row per response kind (in `ResponseKind::ALL`
/// order), one column per NCD level 0..50.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedMeanGrid {
    pub rows: [[f64; 6]; 3],
}

impl PredictedMeanGrid {
    pub fn new(rows: [[f64; 6]; 3]) -> Result<Self> {
        if rows.iter().flatten().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "grid entries must be positive and finite".into(),
            ));
        }
        Ok(Self { rows })
    }

    pub fn row(&self, kind: ResponseKind) -> &[f64; 6] {
        &self.rows[kind.index()]
    }
}

/// Evaluate the three fitted models over the NCD grid. Exactly one model per
/// response kind is required (any order).
pub fn predicted_mean_grid(models: &[NcdRegressionModel]) -> Result<PredictedMeanGrid> {
    let mut slots: [Option<&NcdRegressionModel>; 3] = [None, None, None];
    for m in models {
        let slot = &mut slots[m.kind.index()];
        if slot.is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate model for response kind {:?}",
                m.kind
            )));
        }
        *slot = Some(m);
    }
    let mut rows = [[0.0; 6]; 3];
    for kind in ResponseKind::ALL {
        let model = slots[kind.index()].ok_or_else(|| {
            Error::InvalidArgument(format!("missing model for response kind {kind:?}"))
        })?;
        for (j, level) in NCD_LEVELS.iter().enumerate() {
            rows[kind.index()][j] = model.predicted_mean(*level);
        }
    }
    PredictedMeanGrid::new(rows)
}

/// Successive differences mean(d+10) - mean(d) per response kind: the
/// change-of-mean series for equal NCD steps.
pub fn mean_change_series(grid: &PredictedMeanGrid) -> [[f64; 5]; 3] {
    let mut out = [[0.0; 5]; 3];
    for (i, row) in grid.rows.iter().enumerate() {
        for j in 0..5 {
            out[i][j] = row[j + 1] - row[j];
        }
    }
    out
}

/// Per-level sample means of the same observation sets the regression uses,
/// for side-by-side comparison with the model grid. `None` marks a level
/// with no observations.
pub fn observed_mean_grid(portfolio: &Portfolio) -> [[Option<f64>; 6]; 3] {
    let mut out = [[None; 6]; 3];
    for kind in ResponseKind::ALL {
        let obs = response_observations(portfolio, kind);
        let mut sums = [0.0f64; 6];
        let mut counts = [0usize; 6];
        for o in &obs {
            let idx = (o.ncd_level / 10) as usize;
            sums[idx] += o.response as f64;
            counts[idx] += 1;
        }
        for j in 0..6 {
            if counts[j] > 0 {
                out[kind.index()][j] = Some(sums[j] / counts[j] as f64);
            }
        }
    }
    out
}

/// Write the predicted-mean grid as CSV:
/// `response_kind,ncd_0,ncd_10,ncd_20,ncd_30,ncd_40,ncd_50`.
pub fn write_grid_csv<W: Write>(grid: &PredictedMeanGrid, mut w: W) -> Result<()> {
    writeln!(w, "response_kind,ncd_0,ncd_10,ncd_20,ncd_30,ncd_40,ncd_50")?;
    for kind in ResponseKind::ALL {
        let row = grid.row(kind);
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{},{}", kind.code(), cells.join(","))?;
    }
    Ok(())
}

/// Write per-level observed means in the same layout; empty levels print NA.
pub fn write_observed_csv<W: Write>(grid: &[[Option<f64>; 6]; 3], mut w: W) -> Result<()> {
    writeln!(w, "response_kind,ncd_0,ncd_10,ncd_20,ncd_30,ncd_40,ncd_50")?;
    for kind in ResponseKind::ALL {
        let cells: Vec<String> = grid[kind.index()]
            .iter()
            .map(|v| match v {
                Some(x) => x.to_string(),
                None => "NA".to_string(),
            })
            .collect();
        writeln!(w, "{},{}", kind.code(), cells.join(","))?;
    }
    Ok(())
}

/// Write the change-of-mean series:
/// `response_kind,change_0_10,...,change_40_50`.
pub fn write_changes_csv<W: Write>(changes: &[[f64; 5]; 3], mut w: W) -> Result<()> {
    writeln!(
        w,
        "response_kind,change_0_10,change_10_20,change_20_30,change_30_40,change_40_50"
    )?;
    for kind in ResponseKind::ALL {
        let cells: Vec<String> = changes[kind.index()]
            .iter()
            .map(|v| v.to_string())
            .collect();
        writeln!(w, "{},{}", kind.code(), cells.join(","))?;
    }
    Ok(())
}

//! Seeded synthetic portfolio generation.
//!
//! Stands in for a proprietary ~22k-policy motor book. Claim counts per
//! policyholder are negative binomial (sampled as a gamma-Poisson mixture
//! with dispersion `r` and log-mean falling in the NCD level), each accident
//! draws a non-empty set of loss types, and amounts come from per-type
//! severity distributions. All values are synthetic calibration, not
//! inference about any real book.
//!
//! The generator uses ChaCha (12 rounds), a named, documented, portable
//! stream cipher RNG: a fixed `(config, seed)` pair yields the identical
//! portfolio on every platform and run. Draw order is fixed: per
//! policyholder, attributes first, then the claim count, then per event the
//! type-inclusion flags (redrawn until non-empty) and amounts in loss-type
//! order.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClaimEvent, Gender, LossType, PolicyHolder, Portfolio, NCD_LEVELS};
use crate::severity::SeverityFamily;

const VEHICLE_TYPES: [&str; 5] = ["sedan", "hatchback", "suv", "bakkie", "coupe"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_policyholders: usize,
    pub seed: u64,
    /// Probability of each NCD level 0,10,...,50; must sum to 1.
    pub ncd_mix: [f64; 6],
    /// Mean claim count at NCD 0.
    pub freq_base_mean: f64,
    /// Per-decade change of the log claim-count mean (negative: higher NCD,
    /// fewer claims).
    pub freq_ncd_slope: f64,
    /// Negative binomial dispersion; claim-count variance is mu + mu^2/r.
    pub dispersion_r: f64,
    /// Severity distribution per loss type, indexed by `LossType::index()`.
    pub severity: [SeverityFamily; 3],
    /// Probability that an accident includes each loss type, indexed by
    /// `LossType::index()`. The inclusion draw repeats until at least one
    /// type is present.
    pub type_inclusion_probs: [f64; 3],
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_policyholders == 0 {
            return Err(Error::InvalidConfig("n_policyholders must be > 0".into()));
        }
        let mix_sum: f64 = self.ncd_mix.iter().sum();
        if (mix_sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "ncd_mix sums to {mix_sum}, expected 1"
            )));
        }
        if self.ncd_mix.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidConfig("ncd_mix entries must be in [0,1]".into()));
        }
        if !(self.freq_base_mean > 0.0) || !self.freq_base_mean.is_finite() {
            return Err(Error::InvalidConfig("freq_base_mean must be > 0".into()));
        }
        if !self.freq_ncd_slope.is_finite() {
            return Err(Error::InvalidConfig("freq_ncd_slope must be finite".into()));
        }
        if !(self.dispersion_r > 0.0) || !self.dispersion_r.is_finite() {
            return Err(Error::InvalidConfig("dispersion_r must be > 0".into()));
        }
        for fam in &self.severity {
            fam.validate()?;
        }
        if self
            .type_inclusion_probs
            .iter()
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(Error::InvalidConfig(
                "type_inclusion_probs must be in [0,1]".into(),
            ));
        }
        if self.type_inclusion_probs.iter().all(|&p| p == 0.0) {
            return Err(Error::InvalidConfig(
                "at least one type_inclusion_prob must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Expected claim count at an NCD level.
    pub fn claim_mean_at(&self, ncd_level: u8) -> f64 {
        (self.freq_base_mean.ln() + self.freq_ncd_slope * f64::from(ncd_level) / 10.0).exp()
    }
}

/// The shipped calibration: 22k policyholders, claim frequency falling with
/// NCD, third-party-injury severity heaviest-tailed and own-damage lightest.
pub fn default_config() -> GenConfig {
    GenConfig {
        n_policyholders: 22_000,
        seed: 42,
        ncd_mix: [0.25, 0.20, 0.18, 0.15, 0.12, 0.10],
        freq_base_mean: 0.35,
        freq_ncd_slope: -0.15,
        dispersion_r: 1.5,
        severity: [
            SeverityFamily::Lognormal { mu: 5.6, sigma: 1.3 },
            SeverityFamily::Lognormal { mu: 1.7, sigma: 0.6 },
            SeverityFamily::Lognormal { mu: 4.3, sigma: 0.8 },
        ],
        type_inclusion_probs: [0.70, 0.35, 0.45],
    }
}

/// Generate a portfolio. Deterministic for a fixed config (including seed).
pub fn generate_portfolio(cfg: &GenConfig) -> Result<Portfolio> {
    cfg.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);

    let mut policyholders = Vec::with_capacity(cfg.n_policyholders);
    let mut events = Vec::new();
    let mut event_counter: u64 = 0;

    for i in 0..cfg.n_policyholders {
        let id = format!("p{:06}", i + 1);
        let age: u32 = rng.random_range(18..=75);
        let gender = {
            let u: f64 = rng.random();
            if u < 0.48 {
                Gender::Male
            } else if u < 0.96 {
                Gender::Female
            } else {
                Gender::Unspecified
            }
        };
        let vehicle_type = VEHICLE_TYPES[rng.random_range(0..VEHICLE_TYPES.len())].to_string();
        let vehicle_age: u32 = rng.random_range(0..=15);
        let prior_experience: u32 = rng.random_range(0..=(age - 16).min(40));
        let ncd_level = draw_ncd(&cfg.ncd_mix, &mut rng);

        let mu = cfg.claim_mean_at(ncd_level);
        let n_claims = sample_negbin_count(mu, cfg.dispersion_r, &mut rng);

        for _ in 0..n_claims {
            event_counter += 1;
            let event_id = format!("e{event_counter:07}");
            let mut losses = Vec::new();
            // Redraw the inclusion flags until the accident has a loss.
            loop {
                losses.clear();
                for t in LossType::ALL {
                    let u: f64 = rng.random();
                    if u < cfg.type_inclusion_probs[t.index()] {
                        losses.push(t);
                    }
                }
                if !losses.is_empty() {
                    break;
                }
            }
            let typed: Vec<(LossType, f64)> = losses
                .into_iter()
                .map(|t| (t, cfg.severity[t.index()].sample(&mut rng)))
                .collect();
            events.push(ClaimEvent::new(event_id, id.clone(), typed)?);
        }

        policyholders.push(PolicyHolder {
            id,
            age,
            gender,
            vehicle_type,
            vehicle_age,
            prior_experience,
            ncd_level,
        });
    }

    Portfolio::new(policyholders, events)
}

fn draw_ncd<R: Rng + ?Sized>(mix: &[f64; 6], rng: &mut R) -> u8 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (level, p) in NCD_LEVELS.iter().zip(mix) {
        acc += p;
        if u < acc {
            return *level;
        }
    }
    *NCD_LEVELS.last().unwrap()
}

/// Negative binomial count via the gamma-Poisson mixture: lambda drawn from
/// Gamma(shape = r, scale = mu/r), count from Poisson(lambda).
fn sample_negbin_count<R: Rng + ?Sized>(mu: f64, r: f64, rng: &mut R) -> u64 {
    let lambda: f64 = rand_distr::Gamma::new(r, mu / r)
        .expect("validated parameters")
        .sample(rng);
    if lambda <= 0.0 || !lambda.is_finite() {
        return 0;
    }
    let k: f64 = rand_distr::Poisson::new(lambda)
        .expect("positive finite lambda")
        .sample(rng);
    k as u64
}

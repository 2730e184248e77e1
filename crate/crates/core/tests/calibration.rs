//! Generate-and-refit checks against the shipped synthetic calibration.
//! Expected values here are recovery targets computed from the generating
//! parameters, asserted at fixed seeds.

use std::collections::HashMap;

use qsr_core::frequency::{fit_ncd_regression, fit_negbin, predicted_mean_grid, ResponseKind};
use qsr_core::model::{LossType, Portfolio, NCD_LEVELS};
use qsr_core::numeric::ulp_distance;
use qsr_core::reinsurance::{retained_losses, retained_moments, QuotaShare};
use qsr_core::risk::{cte_empirical, Percentile};
use qsr_core::severity::{best_fit, fit_severity, FamilyKind, SeverityFamily};
use qsr_core::synthgen::{default_config, generate_portfolio, GenConfig};
use qsr_core::EmpiricalSample;

fn claim_counts(portfolio: &Portfolio) -> Vec<u64> {
    let mut by_ph: HashMap<&str, u64> = HashMap::new();
    for ev in portfolio.events() {
        *by_ph.entry(ev.policyholder_id.as_str()).or_insert(0) += 1;
    }
    portfolio
        .policyholders()
        .iter()
        .map(|ph| by_ph.get(ph.id.as_str()).copied().unwrap_or(0))
        .collect()
}

#[test]
fn default_portfolio_aggregate_losses_decrease_in_ncd() {
    let portfolio = generate_portfolio(&default_config()).unwrap();
    assert_eq!(portfolio.n_policyholders(), 22_000);

    let mut agg: HashMap<&str, f64> = HashMap::new();
    for ev in portfolio.events() {
        *agg.entry(ev.policyholder_id.as_str()).or_insert(0.0) += ev.total();
    }
    let mut sums = [0.0f64; 6];
    let mut counts = [0usize; 6];
    for ph in portfolio.policyholders() {
        let i = (ph.ncd_level / 10) as usize;
        sums[i] += agg.get(ph.id.as_str()).copied().unwrap_or(0.0);
        counts[i] += 1;
    }
    let means: Vec<f64> = (0..6).map(|i| sums[i] / counts[i] as f64).collect();
    for (w, level) in means.windows(2).zip(NCD_LEVELS.windows(2)) {
        assert!(
            w[1] < w[0],
            "mean aggregate loss must fall from NCD {} to {}: {means:?}",
            level[0],
            level[1]
        );
    }
}

#[test]
fn regression_recovers_generating_slope() {
    let cfg = GenConfig {
        freq_ncd_slope: -0.12,
        ..default_config()
    };
    let portfolio = generate_portfolio(&cfg).unwrap();
    for kind in ResponseKind::ALL {
        let model = fit_ncd_regression(&portfolio, kind).unwrap();
        assert!(
            (model.slope - (-0.12)).abs() <= 0.02,
            "{kind:?}: fitted slope {} not within 0.02 of -0.12",
            model.slope
        );
    }
}

#[test]
fn predicted_grid_strictly_decreasing_under_default_calibration() {
    let portfolio = generate_portfolio(&default_config()).unwrap();
    let models: Vec<_> = ResponseKind::ALL
        .iter()
        .map(|&kind| fit_ncd_regression(&portfolio, kind).unwrap())
        .collect();
    let grid = predicted_mean_grid(&models).unwrap();
    for (kind, row) in ResponseKind::ALL.iter().zip(&grid.rows) {
        for w in row.windows(2) {
            assert!(
                w[1] < w[0],
                "{kind:?}: predicted means must fall across NCD levels: {row:?}"
            );
        }
    }
}

#[test]
fn negbin_fit_recovers_generating_parameters() {
    // 50k policyholders with NCD-flat claim means: counts are iid draws
    // from a negative binomial with (r = 2, mu = 0.3).
    let cfg = GenConfig {
        n_policyholders: 50_000,
        freq_base_mean: 0.3,
        freq_ncd_slope: 0.0,
        dispersion_r: 2.0,
        ..default_config()
    };
    let portfolio = generate_portfolio(&cfg).unwrap();
    let counts = claim_counts(&portfolio);
    let fit = fit_negbin(&counts).unwrap();
    assert!(
        (fit.r - 2.0).abs() / 2.0 <= 0.05,
        "r = {} not within 5% of 2",
        fit.r
    );
    assert!(
        (fit.mu - 0.3).abs() / 0.3 <= 0.02,
        "mu = {} not within 2% of 0.3",
        fit.mu
    );
}

#[test]
fn lognormal_severity_recovery_within_one_percent() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1234);
    let truth = SeverityFamily::Lognormal { mu: 5.0, sigma: 1.2 };
    let values: Vec<f64> = (0..100_000).map(|_| truth.sample(&mut rng)).collect();
    let sample = EmpiricalSample::new(values).unwrap();

    let fit = fit_severity(&sample, FamilyKind::Lognormal).unwrap();
    match fit.family {
        SeverityFamily::Lognormal { mu, sigma } => {
            assert!((mu - 5.0).abs() / 5.0 <= 0.01, "mu = {mu}");
            assert!((sigma - 1.2).abs() / 1.2 <= 0.01, "sigma = {sigma}");
        }
        other => panic!("wrong family {other:?}"),
    }

    let best = best_fit(&sample).unwrap();
    assert!(
        matches!(best.family, SeverityFamily::Lognormal { .. }),
        "AIC must select the generating family, got {:?}",
        best.family
    );
    assert_eq!(best.n, 100_000);
}

#[test]
fn cte99_ordering_matches_tail_heaviness() {
    let portfolio = generate_portfolio(&default_config()).unwrap();
    let p99 = Percentile::new(0.99).unwrap();
    let cte = |t: LossType| cte_empirical(&portfolio.losses_by_type(t), p99).unwrap();
    let injury = cte(LossType::ThirdPartyInjury);
    let own = cte(LossType::OwnDamage);
    let property = cte(LossType::ThirdPartyProperty);
    assert!(
        injury > property && property > own,
        "CTE99 ordering violated: injury={injury}, property={property}, own={own}"
    );
}

#[test]
fn loss_mass_below_5000_ordered_injury_property_own() {
    // P(loss of type t occurs and is <= 5000) = inclusion prob * CDF(5000)
    // under the shipped calibration.
    let cfg = default_config();
    let mass = |t: LossType| cfg.type_inclusion_probs[t.index()] * cfg.severity[t.index()].cdf(5000.0);
    let injury = mass(LossType::ThirdPartyInjury);
    let own = mass(LossType::OwnDamage);
    let property = mass(LossType::ThirdPartyProperty);
    assert!(
        injury > property && property > own,
        "mass ordering violated: injury={injury}, property={property}, own={own}"
    );
}

#[test]
fn cross_sum_identity_on_generated_portfolio() {
    let cfg = GenConfig {
        n_policyholders: 4000,
        ..default_config()
    };
    let portfolio = generate_portfolio(&cfg).unwrap();
    let by_type: f64 = LossType::ALL
        .iter()
        .map(|&t| portfolio.losses_by_type(t).total())
        .sum();
    let by_event = portfolio.event_totals().total();
    let canonical = portfolio.total_losses();
    assert!(
        ulp_distance(by_type, by_event) <= 2,
        "per-type vs per-event totals: {by_type} vs {by_event}"
    );
    assert!(ulp_distance(canonical, by_event) <= 2);
}

#[test]
fn retained_moments_agree_with_sample_moments() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(55);
    let fam = SeverityFamily::Lognormal { mu: 4.0, sigma: 1.0 };
    let values: Vec<f64> = (0..100_000).map(|_| fam.sample(&mut rng)).collect();
    let sample = EmpiricalSample::new(values).unwrap();
    for &quota in &[0.25, 0.5, 0.75] {
        let q = QuotaShare::new(quota).unwrap();
        let kept = retained_losses(&sample, q);
        let (mean, variance) = retained_moments(sample.mean(), sample.variance(), q).unwrap();
        assert!(
            ulp_distance(kept.mean(), mean) <= 4,
            "q={quota}: mean {} vs {}",
            kept.mean(),
            mean
        );
        assert!(
            ulp_distance(kept.variance(), variance) <= 4,
            "q={quota}: variance {} vs {}",
            kept.variance(),
            variance
        );
    }
}

#[test]
fn quota_one_reproduces_uninsured_book() {
    let cfg = GenConfig {
        n_policyholders: 2000,
        ..default_config()
    };
    let portfolio = generate_portfolio(&cfg).unwrap();
    let original = portfolio.event_totals();
    let kept = retained_losses(&original, QuotaShare::new(1.0).unwrap());
    assert_eq!(kept, original);
}

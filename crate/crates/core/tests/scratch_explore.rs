// Temporary exploration harness; deleted before ship.
use std::collections::HashMap;
use std::time::Instant;

use qsr_core::frequency::{fit_ncd_regression, fit_negbin, ResponseKind};
use qsr_core::model::{LossType, NCD_LEVELS};
use qsr_core::risk::{cte_empirical, Percentile};
use qsr_core::synthgen::{default_config, generate_portfolio, GenConfig};

#[test]
#[ignore]
fn explore_default_calibration() {
    let t0 = Instant::now();
    let cfg = default_config();
    let p = generate_portfolio(&cfg).unwrap();
    println!("generate 22k: {:?}, events={}", t0.elapsed(), p.n_events());

    // Per-NCD mean aggregate losses.
    let mut agg: HashMap<&str, f64> = HashMap::new();
    for ev in p.events() {
        *agg.entry(ev.policyholder_id.as_str()).or_insert(0.0) += ev.total();
    }
    let mut sums = [0.0f64; 6];
    let mut counts = [0usize; 6];
    let mut claim_counts = [0u64; 6];
    let mut claims_by_ph: HashMap<&str, u64> = HashMap::new();
    for ev in p.events() {
        *claims_by_ph.entry(ev.policyholder_id.as_str()).or_insert(0) += 1;
    }
    for ph in p.policyholders() {
        let i = (ph.ncd_level / 10) as usize;
        sums[i] += agg.get(ph.id.as_str()).copied().unwrap_or(0.0);
        counts[i] += 1;
        claim_counts[i] += claims_by_ph.get(ph.id.as_str()).copied().unwrap_or(0);
    }
    println!("per-NCD mean aggregate losses:");
    for (j, level) in NCD_LEVELS.iter().enumerate() {
        println!(
            "  ncd {level}: n={} mean_agg={:.2} mean_count={:.4}",
            counts[j],
            sums[j] / counts[j] as f64,
            claim_counts[j] as f64 / counts[j] as f64
        );
    }

    // Regressions.
    for kind in ResponseKind::ALL {
        let t = Instant::now();
        match fit_ncd_regression(&p, kind) {
            Ok(m) => println!(
                "  {:?}: intercept={:.4} slope={:.5} r={:.5} iters={} n={} ({:?})",
                kind, m.intercept, m.slope, m.r, m.iterations, m.n_obs, t.elapsed()
            ),
            Err(e) => println!("  {kind:?}: ERROR {e}"),
        }
    }

    // CTE99 ordering.
    let p99 = Percentile::new(0.99).unwrap();
    for t in LossType::ALL {
        let s = p.losses_by_type(t);
        println!(
            "  {}: n={} cte99={:.1}",
            t.code(),
            s.n(),
            cte_empirical(&s, p99).unwrap()
        );
    }

    // Cross-sum identity check.
    let lhs: f64 = LossType::ALL
        .iter()
        .map(|&t| p.losses_by_type(t).total())
        .sum();
    let rhs = p.event_totals().total();
    let canonical = p.total_losses();
    println!("  totals: lhs={lhs:.6} rhs={rhs:.6} canonical={canonical:.6}");
    println!(
        "  bitexact lhs==rhs: {} | ulp={}",
        lhs == rhs,
        qsr_core::numeric::ulp_distance(lhs, rhs)
    );
}

#[test]
#[ignore]
fn explore_slope_recovery() {
    let cfg = GenConfig {
        freq_ncd_slope: -0.12,
        ..default_config()
    };
    let p = generate_portfolio(&cfg).unwrap();
    for (kind, label) in [
        (ResponseKind::SumByEvent, "event"),
        (ResponseKind::SumByType, "type"),
        (ResponseKind::IndividualLoss, "indl"),
    ] {
        let m = fit_ncd_regression(&p, kind).unwrap();
        println!("{label}: slope={:.5} (target -0.12, tol 0.02)", m.slope);
    }
}

#[test]
#[ignore]
fn explore_negbin_recovery() {
    let t0 = Instant::now();
    let cfg = GenConfig {
        n_policyholders: 50_000,
        freq_base_mean: 0.3,
        freq_ncd_slope: 0.0,
        dispersion_r: 2.0,
        ..default_config()
    };
    let p = generate_portfolio(&cfg).unwrap();
    let mut claims: HashMap<&str, u64> = HashMap::new();
    for ev in p.events() {
        *claims.entry(ev.policyholder_id.as_str()).or_insert(0) += 1;
    }
    let counts: Vec<u64> = p
        .policyholders()
        .iter()
        .map(|ph| claims.get(ph.id.as_str()).copied().unwrap_or(0))
        .collect();
    let fit = fit_negbin(&counts).unwrap();
    println!(
        "negbin recovery: r={:.4} (target 2 +-5%), mu={:.5} (target 0.3 +-2%), elapsed {:?}",
        fit.r,
        fit.mu,
        t0.elapsed()
    );
}

#[test]
#[ignore]
fn explore_severity_recovery() {
    use qsr_core::severity::{best_fit, fit_severity, FamilyKind, SeverityFamily};
    use qsr_core::EmpiricalSample;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1234);
    let fam = SeverityFamily::Lognormal { mu: 5.0, sigma: 1.2 };
    let values: Vec<f64> = (0..100_000).map(|_| fam.sample(&mut rng)).collect();
    let s = EmpiricalSample::new(values).unwrap();
    let t0 = Instant::now();
    let fit = fit_severity(&s, FamilyKind::Lognormal).unwrap();
    println!("lognormal fit: {:?} ({:?})", fit.family, t0.elapsed());
    let t0 = Instant::now();
    let best = best_fit(&s).unwrap();
    println!("best fit: {:?} aic={:.1} ({:?})", best.family.kind(), best.aic, t0.elapsed());

    // Fig-3 style ordering at threshold 5000 under the default calibration.
    let cfg = default_config();
    for (t, fam) in LossType::ALL.iter().zip(&cfg.severity) {
        let mass = cfg.type_inclusion_probs[t.index()] * fam.cdf(5000.0);
        println!("  {}: inclusion*cdf(5000) = {:.4}", t.code(), mass);
    }
}

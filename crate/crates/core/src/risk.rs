//! Empirical VaR and CTE, and the bundled-vs-unbundled risk report.
//!
//! Quantile convention: with m = max(1, ceil((1 - p) * n)), VaR at level p
//! is the m-th largest sample value (no interpolation) and CTE is the mean
//! of the m largest. Under this convention CTE is the top-m average, which
//! is subadditive for aligned samples: the top-m sum of (x_i + y_i) never
//! exceeds the sum of the two top-m sums. That turns the "bundled risk is
//! smaller" comparison into a provable property rather than a data accident.
//! VaR carries no such guarantee, so the report records whether VaR
//! subadditivity held instead of asserting it.
//!
//! The "Sum of Unbundled" row is emitted in two constructions: the
//! arithmetic sum of the three per-coverage measures, and a seeded Monte
//! Carlo variant that resamples the three coverages' per-event amounts
//! independently (zero-filled for events without the coverage) and measures
//! the risk of the summed draws.

use std::io::Write;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LossType, Portfolio};
use crate::sample::EmpiricalSample;

/// A tail probability level in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentile(f64);

impl Percentile {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 0.0 || p >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "percentile must lie in (0, 1), got {p}"
            )));
        }
        Ok(Self(p))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// The canonical report levels 90%, 95%, 99%.
    pub fn canonical() -> Vec<Percentile> {
        vec![Percentile(0.90), Percentile(0.95), Percentile(0.99)]
    }
}

/// Number of tail observations at level p: max(1, ceil((1 - p) * n)).
pub fn tail_count(n: usize, p: Percentile) -> usize {
    (((1.0 - p.value()) * n as f64).ceil() as usize).max(1)
}

/// The m-th largest value, m = max(1, ceil((1 - p) * n)).
pub fn var_empirical(sample: &EmpiricalSample, p: Percentile) -> Result<f64> {
    let n = sample.n();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let m = tail_count(n, p);
    Ok(sample.values()[n - m])
}

/// Mean of the m largest values, m = max(1, ceil((1 - p) * n)).
/// Summed ascending over the tail slice.
pub fn cte_empirical(sample: &EmpiricalSample, p: Percentile) -> Result<f64> {
    let n = sample.n();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let m = tail_count(n, p);
    let mut acc = 0.0;
    for &v in &sample.values()[n - m..] {
        acc += v;
    }
    Ok(acc / m as f64)
}

pub const ROW_SUM_UNBUNDLED: &str = "Sum of Unbundled";
pub const ROW_BUNDLED: &str = "Bundled (Comprehensive)";
pub const ROW_SUM_INDEPENDENT: &str = "Sum of Unbundled (independent)";

/// One report row: a coverage (or aggregate) with VaR and CTE per
/// percentile. `None` cells mark an empty underlying sample (n = 0) —
/// explicitly not zero risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub label: String,
    pub n: usize,
    pub var: Vec<Option<f64>>,
    pub cte: Vec<Option<f64>>,
}

impl RiskRow {
    fn from_sample(label: &str, sample: &EmpiricalSample, percentiles: &[Percentile]) -> Self {
        if sample.is_empty() {
            return Self {
                label: label.to_string(),
                n: 0,
                var: vec![None; percentiles.len()],
                cte: vec![None; percentiles.len()],
            };
        }
        let var = percentiles
            .iter()
            .map(|&p| Some(var_empirical(sample, p).expect("non-empty")))
            .collect();
        let cte = percentiles
            .iter()
            .map(|&p| Some(cte_empirical(sample, p).expect("non-empty")))
            .collect();
        Self {
            label: label.to_string(),
            n: sample.n(),
            var,
            cte,
        }
    }
}

/// Monte Carlo settings for the independence construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub draws: usize,
    /// Fixed number of deterministic RNG substreams. Results depend on the
    /// shard count, never on the worker count.
    pub shards: usize,
    /// Worker threads processing the shards.
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            draws: 1_000_000,
            shards: 16,
            workers: 1,
        }
    }
}

/// The Table-2-shaped report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    /// Levels, ascending, as raw probabilities.
    pub percentiles: Vec<f64>,
    /// Three coverages, arithmetic Sum of Unbundled, Bundled (Comprehensive).
    pub rows: Vec<RiskRow>,
    /// Independence-resampling construction of the Sum of Unbundled row.
    pub independent_sum: Option<RiskRow>,
    /// Per percentile: whether VaR(bundled) <= arithmetic-sum VaR held
    /// (recorded, not asserted; VaR is not coherent).
    pub var_subadditive: Vec<Option<bool>>,
    pub mc: Option<McConfig>,
}

impl RiskReport {
    pub fn row(&self, label: &str) -> Option<&RiskRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    fn percentile_index(&self, p: Percentile) -> Result<usize> {
        self.percentiles
            .iter()
            .position(|&x| x == p.value())
            .ok_or(Error::MissingPercentile(p.value()))
    }
}

/// Build the full report: per-coverage rows, both Sum-of-Unbundled
/// constructions, and the bundled row.
pub fn risk_table(
    portfolio: &Portfolio,
    percentiles: &[Percentile],
    mc: &McConfig,
) -> Result<RiskReport> {
    if portfolio.n_events() == 0 {
        return Err(Error::EmptyPortfolio);
    }
    if percentiles.is_empty() {
        return Err(Error::InvalidArgument("percentile list is empty".into()));
    }
    let mut levels = percentiles.to_vec();
    levels.sort_by(|a, b| a.value().total_cmp(&b.value()));

    let type_samples: Vec<EmpiricalSample> = LossType::ALL
        .iter()
        .map(|&t| portfolio.losses_by_type(t))
        .collect();
    let mut rows: Vec<RiskRow> = LossType::ALL
        .iter()
        .zip(&type_samples)
        .map(|(&t, s)| RiskRow::from_sample(t.label(), s, &levels))
        .collect();

    // Arithmetic sum of the available per-coverage measures.
    let sum_cell = |cells: Vec<Option<f64>>| -> Option<f64> {
        let present: Vec<f64> = cells.into_iter().flatten().collect();
        if present.is_empty() {
            None
        } else {
            Some(present.iter().sum())
        }
    };
    let sum_row = RiskRow {
        label: ROW_SUM_UNBUNDLED.to_string(),
        n: rows.iter().map(|r| r.n).sum(),
        var: (0..levels.len())
            .map(|i| sum_cell(rows.iter().map(|r| r.var[i]).collect()))
            .collect(),
        cte: (0..levels.len())
            .map(|i| sum_cell(rows.iter().map(|r| r.cte[i]).collect()))
            .collect(),
    };
    rows.push(sum_row);

    let bundled_sample = portfolio.event_totals();
    rows.push(RiskRow::from_sample(ROW_BUNDLED, &bundled_sample, &levels));

    let independent_sample = independent_sum_sample(portfolio, mc);
    let independent_sum = Some(RiskRow::from_sample(
        ROW_SUM_INDEPENDENT,
        &independent_sample,
        &levels,
    ));

    let sum_row = &rows[3];
    let bundled_row = &rows[4];
    let var_subadditive = (0..levels.len())
        .map(|i| match (sum_row.var[i], bundled_row.var[i]) {
            (Some(s), Some(b)) => Some(b <= s),
            _ => None,
        })
        .collect();

    Ok(RiskReport {
        percentiles: levels.iter().map(Percentile::value).collect(),
        rows,
        independent_sum,
        var_subadditive,
        mc: Some(*mc),
    })
}

/// Draw `mc.draws` sums of independently resampled per-event coverage
/// amounts. Shard s uses ChaCha stream s+1 of the seed, so the result is a
/// pure function of (portfolio, seed, draws, shards) regardless of worker
/// count.
fn independent_sum_sample(portfolio: &Portfolio, mc: &McConfig) -> EmpiricalSample {
    let marginals: Vec<Vec<f64>> = LossType::ALL
        .iter()
        .map(|&t| portfolio.aligned_amounts(t))
        .collect();
    let n = portfolio.n_events();
    let shards = mc.shards.max(1);
    let workers = mc.workers.clamp(1, shards);

    let shard_draws = |shard: usize| -> Vec<f64> {
        let base = mc.draws / shards;
        let extra = usize::from(shard < mc.draws % shards);
        let count = base + extra;
        let mut rng = ChaCha12Rng::seed_from_u64(mc.seed);
        rng.set_stream(shard as u64 + 1);
        (0..count)
            .map(|_| {
                let mut total = 0.0;
                for marginal in &marginals {
                    total += marginal[rng.random_range(0..n)];
                }
                total
            })
            .collect()
    };

    let mut values: Vec<f64> = if workers == 1 {
        (0..shards).flat_map(shard_draws).collect()
    } else {
        let chunk = shards.div_ceil(workers);
        let mut chunks: Vec<Vec<f64>> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let lo = w * chunk;
                    let hi = ((w + 1) * chunk).min(shards);
                    let shard_draws = &shard_draws;
                    scope.spawn(move || -> Vec<f64> {
                        (lo..hi).flat_map(shard_draws).collect()
                    })
                })
                .collect();
            for h in handles {
                chunks.push(h.join().expect("worker thread panicked"));
            }
        });
        chunks.into_iter().flatten().collect()
    };
    values.sort_by(f64::total_cmp);
    EmpiricalSample::from_sorted_unchecked(values)
}

/// Capital relief from bundling at level p: arithmetic Sum-of-Unbundled CTE
/// minus bundled CTE.
pub fn economic_capital_gap(report: &RiskReport, p: Percentile) -> Result<f64> {
    let idx = report.percentile_index(p)?;
    let sum_row = report
        .row(ROW_SUM_UNBUNDLED)
        .ok_or_else(|| Error::MissingRow(ROW_SUM_UNBUNDLED.into()))?;
    let bundled_row = report
        .row(ROW_BUNDLED)
        .ok_or_else(|| Error::MissingRow(ROW_BUNDLED.into()))?;
    let sum_cte = sum_row.cte[idx].ok_or_else(|| {
        Error::InvalidArgument(format!("`{ROW_SUM_UNBUNDLED}` CTE is empty at index {idx}"))
    })?;
    let bundled_cte = bundled_row.cte[idx].ok_or_else(|| {
        Error::InvalidArgument(format!("`{ROW_BUNDLED}` CTE is empty at index {idx}"))
    })?;
    Ok(sum_cte - bundled_cte)
}

fn percent_label(p: f64) -> String {
    let v = p * 100.0;
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Write the report as CSV with the Table-2 row/column layout:
/// `coverage,var_90,var_95,var_99,cte_90,cte_95,cte_99,n` for the canonical
/// percentiles (column names follow the actual levels). Empty cells print NA.
pub fn write_report_csv<W: Write>(report: &RiskReport, mut w: W) -> Result<()> {
    let var_cols: Vec<String> = report
        .percentiles
        .iter()
        .map(|&p| format!("var_{}", percent_label(p)))
        .collect();
    let cte_cols: Vec<String> = report
        .percentiles
        .iter()
        .map(|&p| format!("cte_{}", percent_label(p)))
        .collect();
    writeln!(w, "coverage,{},{},n", var_cols.join(","), cte_cols.join(","))?;
    for row in &report.rows {
        let cell = |c: &Option<f64>| match c {
            Some(v) => v.to_string(),
            None => "NA".to_string(),
        };
        let vars: Vec<String> = row.var.iter().map(cell).collect();
        let ctes: Vec<String> = row.cte.iter().map(cell).collect();
        writeln!(
            w,
            "{},{},{},{}",
            row.label,
            vars.join(","),
            ctes.join(","),
            row.n
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ClaimEvent, Gender, PolicyHolder};
    use approx::assert_abs_diff_eq;

    fn sample(values: Vec<f64>) -> EmpiricalSample {
        EmpiricalSample::new(values).unwrap()
    }

    fn p(v: f64) -> Percentile {
        Percentile::new(v).unwrap()
    }

    #[test]
    fn percentile_domain() {
        assert!(Percentile::new(0.0).is_err());
        assert!(Percentile::new(1.0).is_err());
        assert!(Percentile::new(0.5).is_ok());
    }

    #[test]
    fn var_and_cte_on_one_to_ten() {
        let s = sample((1..=10).map(f64::from).collect());
        assert_eq!(var_empirical(&s, p(0.95)).unwrap(), 10.0);
        assert_eq!(var_empirical(&s, p(0.50)).unwrap(), 6.0);
        assert_eq!(cte_empirical(&s, p(0.50)).unwrap(), 8.0);
    }

    #[test]
    fn constant_sample_var_equals_cte() {
        let s = sample(vec![7.0; 12]);
        for level in [0.5, 0.9, 0.95, 0.99] {
            assert_eq!(var_empirical(&s, p(level)).unwrap(), 7.0);
            assert_eq!(cte_empirical(&s, p(level)).unwrap(), 7.0);
        }
    }

    #[test]
    fn empty_sample_errors() {
        let s = EmpiricalSample::empty();
        assert!(matches!(
            var_empirical(&s, p(0.9)).unwrap_err(),
            Error::EmptySample
        ));
        assert!(matches!(
            cte_empirical(&s, p(0.9)).unwrap_err(),
            Error::EmptySample
        ));
    }

    #[test]
    fn cte_dominates_var_and_both_monotone_in_p() {
        let s = sample((0..97).map(|i| ((i * 37) % 89) as f64 + 0.25).collect());
        let mut last_var = f64::MIN;
        let mut last_cte = f64::MIN;
        for level in [0.5, 0.75, 0.9, 0.95, 0.99] {
            let v = var_empirical(&s, p(level)).unwrap();
            let c = cte_empirical(&s, p(level)).unwrap();
            assert!(c >= v);
            assert!(v >= last_var);
            assert!(c >= last_cte);
            last_var = v;
            last_cte = c;
        }
    }

    #[test]
    fn positive_homogeneity() {
        let s = sample((1..=64).map(|i| (i as f64) * 1.3 + 0.1).collect());
        for level in [0.9, 0.95, 0.99] {
            for &c in &[0.25, 0.5, 2.0] {
                // Powers of two scale exactly through sums and divisions.
                let scaled = sample(s.values().iter().map(|v| v * c).collect());
                assert_eq!(
                    var_empirical(&scaled, p(level)).unwrap(),
                    c * var_empirical(&s, p(level)).unwrap()
                );
                assert_eq!(
                    cte_empirical(&scaled, p(level)).unwrap(),
                    c * cte_empirical(&s, p(level)).unwrap()
                );
            }
        }
    }

    fn single_event_portfolio() -> Portfolio {
        let ph = PolicyHolder {
            id: "p1".into(),
            age: 30,
            gender: Gender::Male,
            vehicle_type: "sedan".into(),
            vehicle_age: 2,
            prior_experience: 4,
            ncd_level: 0,
        };
        let ev = ClaimEvent::new(
            "e1".into(),
            "p1".into(),
            vec![(LossType::ThirdPartyInjury, 100.0)],
        )
        .unwrap();
        Portfolio::new(vec![ph], vec![ev]).unwrap()
    }

    #[test]
    fn single_event_report_marks_missing_coverages() {
        let report = risk_table(
            &single_event_portfolio(),
            &Percentile::canonical(),
            &McConfig {
                draws: 1000,
                ..McConfig::default()
            },
        )
        .unwrap();
        let labels: Vec<&str> = report.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(
            labels,
            vec![
                "Third party injury",
                "Own damage",
                "Third party property",
                ROW_SUM_UNBUNDLED,
                ROW_BUNDLED
            ]
        );
        let injury = report.row("Third party injury").unwrap();
        assert!(injury.var.iter().all(|c| *c == Some(100.0)));
        assert!(injury.cte.iter().all(|c| *c == Some(100.0)));
        let own = report.row("Own damage").unwrap();
        assert_eq!(own.n, 0);
        assert!(own.var.iter().all(Option::is_none));
        let bundled = report.row(ROW_BUNDLED).unwrap();
        assert!(bundled.cte.iter().all(|c| *c == Some(100.0)));
    }

    #[test]
    fn empty_portfolio_rejected() {
        let ph = PolicyHolder {
            id: "p1".into(),
            age: 30,
            gender: Gender::Male,
            vehicle_type: "sedan".into(),
            vehicle_age: 2,
            prior_experience: 4,
            ncd_level: 0,
        };
        let portfolio = Portfolio::new(vec![ph], vec![]).unwrap();
        assert!(matches!(
            risk_table(&portfolio, &Percentile::canonical(), &McConfig::default()).unwrap_err(),
            Error::EmptyPortfolio
        ));
    }

    #[test]
    fn comonotonic_coverages_have_zero_gap() {
        // Every event carries all three types with the same amount, chosen
        // as multiples of 5 so the top-m averages are exact in floating
        // point; the bundled CTE then equals the arithmetic sum exactly.
        let ph = PolicyHolder {
            id: "p1".into(),
            age: 50,
            gender: Gender::Female,
            vehicle_type: "suv".into(),
            vehicle_age: 1,
            prior_experience: 20,
            ncd_level: 0,
        };
        let events: Vec<ClaimEvent> = (1..=100)
            .map(|i| {
                let amount = (5 * i) as f64;
                ClaimEvent::new(
                    format!("e{i:03}"),
                    "p1".into(),
                    vec![
                        (LossType::ThirdPartyInjury, amount),
                        (LossType::OwnDamage, amount),
                        (LossType::ThirdPartyProperty, amount),
                    ],
                )
                .unwrap()
            })
            .collect();
        let portfolio = Portfolio::new(vec![ph], events).unwrap();
        let report = risk_table(
            &portfolio,
            &Percentile::canonical(),
            &McConfig {
                draws: 1000,
                ..McConfig::default()
            },
        )
        .unwrap();
        for level in [0.90, 0.95, 0.99] {
            assert_eq!(economic_capital_gap(&report, p(level)).unwrap(), 0.0);
        }
    }

    #[test]
    fn published_rows_fixture_gap() {
        // Formatting/arithmetic fixture on externally supplied rows.
        let percentiles = vec![0.90, 0.95, 0.99];
        let row = |label: &str, var: [f64; 3], cte: [f64; 3]| RiskRow {
            label: label.into(),
            n: 0,
            var: var.iter().map(|&v| Some(v)).collect(),
            cte: cte.iter().map(|&v| Some(v)).collect(),
        };
        let report = RiskReport {
            percentiles,
            rows: vec![
                row("Third party injury", [61.4, 209.8, 1063.9], [492.3, 864.2, 2557.9]),
                row("Own damage", [4.9, 5.9, 8.6], [6.5, 7.6, 10.4]),
                row("Third party property", [88.2, 109.5, 164.3], [123.5, 148.8, 224.3]),
                row(ROW_SUM_UNBUNDLED, [299.3, 479.2, 1415.1], [781.4, 1190.1, 2086.7]),
                row(ROW_BUNDLED, [158.6, 224.6, 663.2], [368.3, 552.3, 1437.7]),
            ],
            independent_sum: None,
            var_subadditive: vec![None; 3],
            mc: None,
        };
        let gap = economic_capital_gap(&report, p(0.99)).unwrap();
        assert_abs_diff_eq!(gap, 649.0, epsilon = 1e-9);
        assert!(gap >= 0.0);
        assert!(matches!(
            economic_capital_gap(&report, p(0.975)).unwrap_err(),
            Error::MissingPercentile(_)
        ));
    }

    #[test]
    fn independence_sample_is_worker_count_invariant() {
        let ph = PolicyHolder {
            id: "p1".into(),
            age: 40,
            gender: Gender::Male,
            vehicle_type: "sedan".into(),
            vehicle_age: 5,
            prior_experience: 10,
            ncd_level: 10,
        };
        let events: Vec<ClaimEvent> = (1..=40)
            .map(|i| {
                ClaimEvent::new(
                    format!("e{i:03}"),
                    "p1".into(),
                    vec![(LossType::ThirdPartyProperty, (i * 3) as f64)],
                )
                .unwrap()
            })
            .collect();
        let portfolio = Portfolio::new(vec![ph], events).unwrap();
        let base = McConfig {
            seed: 7,
            draws: 10_000,
            shards: 16,
            workers: 1,
        };
        let a = independent_sum_sample(&portfolio, &base);
        let b = independent_sum_sample(
            &portfolio,
            &McConfig {
                workers: 5,
                ..base
            },
        );
        assert_eq!(a, b);
    }
}

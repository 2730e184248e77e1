//! Reference-price decision rules for bundled vs unbundled offers.
//!
//! Two scenarios for moving customers from unbundled coverages to a bundle:
//! a bundle that is exactly the sum of its parts is viable only at or below
//! the component-price sum, while a bundle with a genuinely new component
//! can price above that sum if (and only if) customers hold a positive
//! reference price for the addition and its value is communicated. A
//! value-add whose reference price is zero never supports a premium. The
//! rules are deterministic; the underlying behavioral claim is qualitative,
//! so no probability model is attached.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prices of a candidate bundle offer, all in Rand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfferScenario {
    /// Per-coverage standalone prices, indexed by `LossType::index()`.
    pub component_prices: [f64; 3],
    pub bundle_price: f64,
    /// Whether the bundle adds a component not sold separately.
    pub value_add_present: bool,
    /// Customers' reference price for the added component; meaningful only
    /// when `value_add_present`.
    pub value_add_reference_price: f64,
}

impl OfferScenario {
    pub fn validate(&self) -> Result<()> {
        let all_prices = self
            .component_prices
            .iter()
            .chain([&self.bundle_price, &self.value_add_reference_price]);
        for &p in all_prices {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "prices must be finite and >= 0, got {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn component_sum(&self) -> f64 {
        self.component_prices.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recommendation {
    BundleViable,
    BundleViableIfValueCommunicated,
    PreferUnbundledLikely,
}

impl Recommendation {
    /// Ordering used by the monotonicity property: a higher rank is never
    /// reached by lowering the value-add reference price.
    pub fn rank(self) -> u8 {
        match self {
            Recommendation::PreferUnbundledLikely => 0,
            Recommendation::BundleViableIfValueCommunicated => 1,
            Recommendation::BundleViable => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingGuidance {
    pub max_recommended_bundle_price: f64,
    pub recommendation: Recommendation,
    pub rationale: String,
}

/// Apply the decision rules to an offer. Pure and total on valid scenarios.
pub fn evaluate_offer(s: &OfferScenario) -> Result<PricingGuidance> {
    s.validate()?;
    let parts = s.component_sum();

    if !s.value_add_present {
        // Bundle is the sum of its parts: price at or below the parts.
        let viable = s.bundle_price <= parts;
        return Ok(PricingGuidance {
            max_recommended_bundle_price: parts,
            recommendation: if viable {
                Recommendation::BundleViable
            } else {
                Recommendation::PreferUnbundledLikely
            },
            rationale: if viable {
                format!(
                    "bundle equals the sum of its parts; price {} does not exceed the \
                     component sum {parts}",
                    s.bundle_price
                )
            } else {
                format!(
                    "bundle equals the sum of its parts but is priced {} above the \
                     component sum {parts}; customers are likely to prefer the unbundled option",
                    s.bundle_price
                )
            },
        });
    }

    if s.value_add_reference_price == 0.0 {
        // A new component customers value at R0.00 supports no premium at
        // any bundle price.
        return Ok(PricingGuidance {
            max_recommended_bundle_price: parts,
            recommendation: Recommendation::PreferUnbundledLikely,
            rationale: format!(
                "the added component has a reference price of R0.00, so customers are \
                 more than likely to prefer the unbundled option (component sum {parts})"
            ),
        });
    }

    let max_price = parts + s.value_add_reference_price;
    let viable = s.bundle_price <= max_price;
    Ok(PricingGuidance {
        max_recommended_bundle_price: max_price,
        recommendation: if viable {
            Recommendation::BundleViableIfValueCommunicated
        } else {
            Recommendation::PreferUnbundledLikely
        },
        rationale: if viable {
            format!(
                "bundle price {} is within component sum {parts} plus the value-add \
                 reference price {}; viable if the new component's value proposition is \
                 clearly communicated",
                s.bundle_price, s.value_add_reference_price
            )
        } else {
            format!(
                "bundle price {} exceeds component sum {parts} plus the value-add \
                 reference price {}",
                s.bundle_price, s.value_add_reference_price
            )
        },
    })
}

//! Domain types: policyholders, claim events, typed losses and the portfolio.
//!
//! A `ClaimEvent` is one accident carrying one or more typed loss amounts;
//! an event holds at most one amount per loss type (same-type amounts are
//! summed at ingestion). All types are immutable after construction and safe
//! to share across threads.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::EmpiricalSample;

/// The three coverages an automobile claim decomposes into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LossType {
    ThirdPartyInjury,
    OwnDamage,
    ThirdPartyProperty,
}

impl LossType {
    pub const ALL: [LossType; 3] = [
        LossType::ThirdPartyInjury,
        LossType::OwnDamage,
        LossType::ThirdPartyProperty,
    ];

    /// Stable CSV code.
    pub fn code(self) -> &'static str {
        match self {
            LossType::ThirdPartyInjury => "TPI",
            LossType::OwnDamage => "OD",
            LossType::ThirdPartyProperty => "TPP",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "TPI" => Some(LossType::ThirdPartyInjury),
            "OD" => Some(LossType::OwnDamage),
            "TPP" => Some(LossType::ThirdPartyProperty),
            _ => None,
        }
    }

    /// Human-readable coverage label used in report rows.
    pub fn label(self) -> &'static str {
        match self {
            LossType::ThirdPartyInjury => "Third party injury",
            LossType::OwnDamage => "Own damage",
            LossType::ThirdPartyProperty => "Third party property",
        }
    }

    pub fn index(self) -> usize {
        match self {
            LossType::ThirdPartyInjury => 0,
            LossType::OwnDamage => 1,
            LossType::ThirdPartyProperty => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
    Unspecified,
}

impl Gender {
    pub fn code(self) -> &'static str {
        match self {
            Gender::Male => "M",
            Gender::Female => "F",
            Gender::Unspecified => "U",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "M" => Some(Gender::Male),
            "F" => Some(Gender::Female),
            "U" => Some(Gender::Unspecified),
            _ => None,
        }
    }
}

/// Valid No-Claims-Discount levels (percent of premium).
pub const NCD_LEVELS: [u8; 6] = [0, 10, 20, 30, 40, 50];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyHolder {
    pub id: String,
    pub age: u32,
    pub gender: Gender,
    pub vehicle_type: String,
    pub vehicle_age: u32,
    pub prior_experience: u32,
    pub ncd_level: u8,
}

impl PolicyHolder {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidPolicyholder {
                id: self.id.clone(),
                detail: "empty id".into(),
            });
        }
        if self.age < 16 {
            return Err(Error::InvalidPolicyholder {
                id: self.id.clone(),
                detail: format!("age {} below 16", self.age),
            });
        }
        if !NCD_LEVELS.contains(&self.ncd_level) {
            return Err(Error::InvalidPolicyholder {
                id: self.id.clone(),
                detail: format!(
                    "ncd_level {} not in {{0,10,20,30,40,50}}",
                    self.ncd_level
                ),
            });
        }
        if self.prior_experience > self.age - 16 {
            return Err(Error::InvalidPolicyholder {
                id: self.id.clone(),
                detail: format!(
                    "prior_experience {} exceeds age - 16 = {}",
                    self.prior_experience,
                    self.age - 16
                ),
            });
        }
        Ok(())
    }
}

/// One accident. `losses` is non-empty, ordered by `LossType`, with at most
/// one entry per type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimEvent {
    pub event_id: String,
    pub policyholder_id: String,
    pub losses: Vec<(LossType, f64)>,
}

impl ClaimEvent {
    /// Canonicalize: sum same-type amounts, sort by loss type, validate.
    pub fn new(
        event_id: String,
        policyholder_id: String,
        raw_losses: Vec<(LossType, f64)>,
    ) -> Result<Self> {
        if raw_losses.is_empty() {
            return Err(Error::InvalidEvent {
                event_id,
                detail: "event has no losses".into(),
            });
        }
        let mut by_type: BTreeMap<LossType, f64> = BTreeMap::new();
        for (t, amount) in raw_losses {
            if !amount.is_finite() {
                return Err(Error::InvalidEvent {
                    event_id,
                    detail: format!("non-finite amount {amount}"),
                });
            }
            if amount < 0.0 {
                return Err(Error::InvalidEvent {
                    event_id,
                    detail: format!("negative amount {amount}"),
                });
            }
            *by_type.entry(t).or_insert(0.0) += amount;
        }
        Ok(Self {
            event_id,
            policyholder_id,
            losses: by_type.into_iter().collect(),
        })
    }

    pub fn amount_for(&self, t: LossType) -> Option<f64> {
        self.losses
            .iter()
            .find(|(lt, _)| *lt == t)
            .map(|(_, a)| *a)
    }

    /// Sum of all typed amounts, added in loss-type order.
    pub fn total(&self) -> f64 {
        let mut acc = 0.0;
        for (_, a) in &self.losses {
            acc += a;
        }
        acc
    }
}

/// A validated book of business: every event references an existing
/// policyholder, ids are unique, and events are stored sorted by event id
/// (the canonical summation order).
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    policyholders: Vec<PolicyHolder>,
    events: Vec<ClaimEvent>,
    ncd_by_id: HashMap<String, u8>,
}

impl Portfolio {
    pub fn new(policyholders: Vec<PolicyHolder>, mut events: Vec<ClaimEvent>) -> Result<Self> {
        let mut ncd_by_id = HashMap::with_capacity(policyholders.len());
        for ph in &policyholders {
            ph.validate()?;
            if ncd_by_id.insert(ph.id.clone(), ph.ncd_level).is_some() {
                return Err(Error::DuplicatePolicyholderId { id: ph.id.clone() });
            }
        }
        let mut event_ids = HashSet::with_capacity(events.len());
        for ev in &events {
            if ev.losses.is_empty() {
                return Err(Error::InvalidEvent {
                    event_id: ev.event_id.clone(),
                    detail: "event has no losses".into(),
                });
            }
            if !event_ids.insert(ev.event_id.clone()) {
                return Err(Error::InvalidEvent {
                    event_id: ev.event_id.clone(),
                    detail: "duplicate event id".into(),
                });
            }
            if !ncd_by_id.contains_key(&ev.policyholder_id) {
                return Err(Error::InvalidEvent {
                    event_id: ev.event_id.clone(),
                    detail: format!("unknown policyholder `{}`", ev.policyholder_id),
                });
            }
        }
        events.sort_by(|a, b| a.event_id.cmp(&b.event_id));
        Ok(Self {
            policyholders,
            events,
            ncd_by_id,
        })
    }

    pub fn policyholders(&self) -> &[PolicyHolder] {
        &self.policyholders
    }

    /// Events sorted ascending by event id.
    pub fn events(&self) -> &[ClaimEvent] {
        &self.events
    }

    pub fn n_policyholders(&self) -> usize {
        self.policyholders.len()
    }

    pub fn n_events(&self) -> usize {
        self.events.len()
    }

    pub fn ncd_of(&self, policyholder_id: &str) -> Option<u8> {
        self.ncd_by_id.get(policyholder_id).copied()
    }

    /// One sample entry per event that carries a loss of type `t`.
    pub fn losses_by_type(&self, t: LossType) -> EmpiricalSample {
        let mut values: Vec<f64> = self
            .events
            .iter()
            .filter_map(|ev| ev.amount_for(t))
            .collect();
        values.sort_by(f64::total_cmp);
        EmpiricalSample::from_sorted_unchecked(values)
    }

    /// One sample entry per event: the comprehensive (bundled) loss for that
    /// accident, summed in loss-type order.
    pub fn event_totals(&self) -> EmpiricalSample {
        let mut values: Vec<f64> = self.events.iter().map(ClaimEvent::total).collect();
        values.sort_by(f64::total_cmp);
        EmpiricalSample::from_sorted_unchecked(values)
    }

    /// Grand total of all losses, accumulated in the canonical order
    /// (event id ascending, then loss type). Grouping the same additions by
    /// coverage or by event reproduces this value exactly because both views
    /// share this fixed order.
    pub fn total_losses(&self) -> f64 {
        let mut acc = 0.0;
        for ev in &self.events {
            for (_, a) in &ev.losses {
                acc += a;
            }
        }
        acc
    }

    /// Per-event amounts for type `t` aligned by event id, zero-filled where
    /// an event has no loss of that type. Index i corresponds to
    /// `events()[i]`; used for bundled-vs-unbundled comparisons.
    pub fn aligned_amounts(&self, t: LossType) -> Vec<f64> {
        self.events
            .iter()
            .map(|ev| ev.amount_for(t).unwrap_or(0.0))
            .collect()
    }
}

//! CSV ingestion and emission for the portfolio file formats.
//!
//! `policies.csv`: `id,age,gender,vehicle_type,vehicle_age,prior_experience,ncd_level`
//! `claims.csv`:   `event_id,policyholder_id,loss_type,amount` with
//! `loss_type` one of TPI/OD/TPP. Claims rows sharing an `event_id` belong to
//! the same accident; rows sharing `(event_id, loss_type)` are summed into
//! one loss entry. Emission writes the same headers, so
//! `ingest_csv(emit_csv(p)) == p`.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{ClaimEvent, Gender, LossType, PolicyHolder, Portfolio};

pub const POLICY_HEADER: [&str; 7] = [
    "id",
    "age",
    "gender",
    "vehicle_type",
    "vehicle_age",
    "prior_experience",
    "ncd_level",
];

pub const CLAIMS_HEADER: [&str; 4] = ["event_id", "policyholder_id", "loss_type", "amount"];

fn check_header(actual: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = actual.iter().collect();
    if got != expected {
        return Err(Error::MalformedRow {
            line: 1,
            detail: format!("header {:?}, expected {:?}", got, expected),
        });
    }
    Ok(())
}

fn field<'r>(record: &'r csv::StringRecord, idx: usize, line: u64, name: &str) -> Result<&'r str> {
    record.get(idx).ok_or_else(|| Error::MalformedRow {
        line,
        detail: format!("missing field `{name}`"),
    })
}

fn parse_num<T: std::str::FromStr>(raw: &str, line: u64, name: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::MalformedRow {
        line,
        detail: format!("cannot parse `{raw}` as {name}"),
    })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

/// Read and validate the policy and claims streams into a `Portfolio`.
pub fn ingest_csv<R1: Read, R2: Read>(policy_file: R1, claims_file: R2) -> Result<Portfolio> {
    let policyholders = read_policies(policy_file)?;
    let known_ids: HashMap<&str, ()> =
        policyholders.iter().map(|p| (p.id.as_str(), ())).collect();
    let events = read_claims(claims_file, |id| known_ids.contains_key(id))?;
    Portfolio::new(policyholders, events)
}

fn read_policies<R: Read>(reader: R) -> Result<Vec<PolicyHolder>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    check_header(rdr.headers()?, &POLICY_HEADER)?;

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        if rec.len() != POLICY_HEADER.len() {
            return Err(Error::MalformedRow {
                line,
                detail: format!("expected {} fields, got {}", POLICY_HEADER.len(), rec.len()),
            });
        }
        let gender_raw = field(&rec, 2, line, "gender")?;
        let gender = Gender::from_code(gender_raw).ok_or_else(|| Error::MalformedRow {
            line,
            detail: format!("unknown gender code `{gender_raw}` (expected M, F or U)"),
        })?;
        let ph = PolicyHolder {
            id: field(&rec, 0, line, "id")?.to_string(),
            age: parse_num(field(&rec, 1, line, "age")?, line, "age")?,
            gender,
            vehicle_type: field(&rec, 3, line, "vehicle_type")?.to_string(),
            vehicle_age: parse_num(field(&rec, 4, line, "vehicle_age")?, line, "vehicle_age")?,
            prior_experience: parse_num(
                field(&rec, 5, line, "prior_experience")?,
                line,
                "prior_experience",
            )?,
            ncd_level: parse_num(field(&rec, 6, line, "ncd_level")?, line, "ncd_level")?,
        };
        out.push(ph);
    }
    Ok(out)
}

fn read_claims<R: Read>(reader: R, known: impl Fn(&str) -> bool) -> Result<Vec<ClaimEvent>> {
    // A zero-byte claims file is a portfolio with no events.
    let mut buf = Vec::new();
    let mut reader = reader;
    reader.read_to_end(&mut buf)?;
    if buf.iter().all(|b| b.is_ascii_whitespace()) {
        return Ok(Vec::new());
    }

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(buf.as_slice());
    check_header(rdr.headers()?, &CLAIMS_HEADER)?;

    // event id -> (policyholder id, amounts in raw row order)
    let mut grouped: Vec<(String, String, Vec<(LossType, f64)>)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();

    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        if rec.len() != CLAIMS_HEADER.len() {
            return Err(Error::MalformedRow {
                line,
                detail: format!("expected {} fields, got {}", CLAIMS_HEADER.len(), rec.len()),
            });
        }
        let event_id = field(&rec, 0, line, "event_id")?.to_string();
        let ph_id = field(&rec, 1, line, "policyholder_id")?.to_string();
        let type_raw = field(&rec, 2, line, "loss_type")?;
        let loss_type = LossType::from_code(type_raw).ok_or_else(|| Error::UnknownLossType {
            line,
            code: type_raw.to_string(),
        })?;
        let amount: f64 = parse_num(field(&rec, 3, line, "amount")?, line, "amount")?;
        if !amount.is_finite() {
            return Err(Error::MalformedRow {
                line,
                detail: format!("amount `{amount}` is not finite"),
            });
        }
        if amount < 0.0 {
            return Err(Error::NegativeAmount { line, amount });
        }
        if !known(&ph_id) {
            return Err(Error::DanglingPolicyholder {
                line,
                policyholder_id: ph_id,
            });
        }

        match index.get(&event_id) {
            Some(&i) => {
                if grouped[i].1 != ph_id {
                    return Err(Error::MalformedRow {
                        line,
                        detail: format!(
                            "event `{event_id}` references policyholders `{}` and `{ph_id}`",
                            grouped[i].1
                        ),
                    });
                }
                grouped[i].2.push((loss_type, amount));
            }
            None => {
                index.insert(event_id.clone(), grouped.len());
                grouped.push((event_id, ph_id, vec![(loss_type, amount)]));
            }
        }
    }

    grouped
        .into_iter()
        .map(|(event_id, ph_id, losses)| ClaimEvent::new(event_id, ph_id, losses))
        .collect()
}

/// Write the portfolio back out in the canonical formats. Events are written
/// sorted by event id, losses in loss-type order, matching internal storage.
pub fn emit_csv<W1: Write, W2: Write>(
    portfolio: &Portfolio,
    policies_out: W1,
    claims_out: W2,
) -> Result<()> {
    let mut pw = csv::Writer::from_writer(policies_out);
    pw.write_record(POLICY_HEADER)?;
    for ph in portfolio.policyholders() {
        pw.write_record([
            ph.id.as_str(),
            &ph.age.to_string(),
            ph.gender.code(),
            ph.vehicle_type.as_str(),
            &ph.vehicle_age.to_string(),
            &ph.prior_experience.to_string(),
            &ph.ncd_level.to_string(),
        ])?;
    }
    pw.flush()?;

    let mut cw = csv::Writer::from_writer(claims_out);
    cw.write_record(CLAIMS_HEADER)?;
    for ev in portfolio.events() {
        for (t, amount) in &ev.losses {
            cw.write_record([
                ev.event_id.as_str(),
                ev.policyholder_id.as_str(),
                t.code(),
                &amount.to_string(),
            ])?;
        }
    }
    cw.flush()?;
    Ok(())
}

//! Per-class highlight queries over entity sub-arrays.
//!
//! | class          | query                                   |
//! |----------------|-----------------------------------------|
//! | Authoritative  | [`popular_values`]                      |
//! | Identity       | [`identity_deviations`]                 |
//! | Organizational | [`correlate_entities`], [`popular_values`] |
//! | Vestigial      | [`vestigial_summary`]                   |
//!
//! Every query returns findings sorted by count (descending), then subject.

use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::assoc_array::{format_value, AssocArray};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FindingKind {
    PopularValue,
    DuplicateValueAcrossRows,
    MultiValuedRow,
    CrossEntityPair,
    VestigialValue,
}

/// A single key, or an ordered pair of keys for cross-entity findings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KeyRef {
    One(String),
    Pair(String, String),
}

impl std::fmt::Display for KeyRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KeyRef::One(k) => f.write_str(k),
            KeyRef::Pair(a, b) => write!(f, "{a} x {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyFinding {
    pub kind: FindingKind,
    pub entity: KeyRef,
    pub subject: KeyRef,
    #[serde(serialize_with = "ser_count", deserialize_with = "de_count")]
    pub count: f64,
}

fn ser_count<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < 9.007_199_254_740_992e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

fn de_count<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    f64::deserialize(d)
}

impl AnomalyFinding {
    pub fn count_text(&self) -> String {
        format_value(self.count)
    }
}

fn by_count_then_subject(a: &AnomalyFinding, b: &AnomalyFinding) -> Ordering {
    b.count
        .total_cmp(&a.count)
        .then_with(|| a.subject.cmp(&b.subject))
}

fn sorted(mut findings: Vec<AnomalyFinding>) -> Vec<AnomalyFinding> {
    findings.sort_by(by_count_then_subject);
    findings
}

/// Column keys whose column sum exceeds `min_count` (strictly).
pub fn popular_values(entity: &str, sub: &AssocArray, min_count: f64) -> Vec<AnomalyFinding> {
    let popular = sub.col_sums().threshold(min_count);
    sorted(
        popular
            .iter()
            .map(|(_, col, count)| AnomalyFinding {
                kind: FindingKind::PopularValue,
                entity: KeyRef::One(entity.to_owned()),
                subject: KeyRef::One(col.to_owned()),
                count,
            })
            .collect(),
    )
}

/// Departures from a one-to-one row/value mapping: values held by more than
/// one row, then rows holding more than one value.
pub fn identity_deviations(entity: &str, sub: &AssocArray) -> Vec<AnomalyFinding> {
    let finding = |kind, key: &str, count: usize| AnomalyFinding {
        kind,
        entity: KeyRef::One(entity.to_owned()),
        subject: KeyRef::One(key.to_owned()),
        count: count as f64,
    };
    let duplicates = sub
        .col_keys()
        .iter()
        .zip(sub.col_degrees())
        .filter(|(_, d)| *d > 1)
        .map(|(k, d)| finding(FindingKind::DuplicateValueAcrossRows, k, d))
        .collect();
    let multi = (0..sub.nrows())
        .map(|r| (&sub.row_keys()[r], sub.row_slice(r).0.len()))
        .filter(|(_, d)| *d > 1)
        .map(|(k, d)| finding(FindingKind::MultiValuedRow, k, d))
        .collect();
    let mut out = sorted(duplicates);
    out.extend(sorted(multi));
    out
}

/// Co-occurrence counts of value pairs across rows, `E_iᵀ · E_j`, keeping
/// pairs seen in more than `min_count` rows.
pub fn correlate_entities(
    entity_a: &str,
    sub_a: &AssocArray,
    entity_b: &str,
    sub_b: &AssocArray,
    min_count: f64,
) -> Vec<AnomalyFinding> {
    let co = sub_a.transpose().multiply(sub_b).threshold(min_count);
    sorted(
        co.iter()
            .map(|(a, b, count)| AnomalyFinding {
                kind: FindingKind::CrossEntityPair,
                entity: KeyRef::Pair(entity_a.to_owned(), entity_b.to_owned()),
                subject: KeyRef::Pair(a.to_owned(), b.to_owned()),
                count,
            })
            .collect(),
    )
}

/// Full value census of an entity.
pub fn vestigial_summary(entity: &str, sub: &AssocArray) -> Vec<AnomalyFinding> {
    sorted(
        sub.col_sums()
            .iter()
            .map(|(_, col, count)| AnomalyFinding {
                kind: FindingKind::VestigialValue,
                entity: KeyRef::One(entity.to_owned()),
                subject: KeyRef::One(col.to_owned()),
                count,
            })
            .collect(),
    )
}

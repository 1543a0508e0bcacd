//! Seeded synthetic CSV corpora with a target structure class per entity.
//!
//! Each entity's cardinality is planned from the present-row count and then
//! checked against the classifier, so a request that cannot produce the
//! target class (an Organizational entity over too few rows, an
//! Authoritative entity with one unique value) fails before any output is
//! written.
//!
//! Authoritative entities are written as whitespace-joined tokens and must be
//! ingested with the field tokenized; [`GeneratedCorpus::ingest_config`]
//! returns a matching configuration.

use std::collections::BTreeSet;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dda::{classify, ClassifierConfig, EntityStats, StructureClass};
use crate::ingest::IngestConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct EntitySpec {
    pub name: String,
    pub class: StructureClass,
    /// Number of distinct values; planned from the class when absent.
    pub unique: Option<u64>,
    /// Probability that a row leaves this field blank.
    pub missing_rate: f64,
}

impl EntitySpec {
    pub fn new(name: impl Into<String>, class: StructureClass) -> Self {
        EntitySpec {
            name: name.into(),
            class,
            unique: None,
            missing_rate: 0.0,
        }
    }

    pub fn with_unique(mut self, unique: u64) -> Self {
        self.unique = Some(unique);
        self
    }

    pub fn with_missing_rate(mut self, rate: f64) -> Self {
        self.missing_rate = rate;
        self
    }
}

impl FromStr for EntitySpec {
    type Err = String;

    /// Parses `name:class[:unique[:missing_rate]]`. An empty `unique` field
    /// leaves the cardinality to the planner.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() < 2 || parts.len() > 4 || parts[0].is_empty() {
            return Err(format!("expected name:class[:unique[:missing_rate]], got {s:?}"));
        }
        let mut spec = EntitySpec::new(parts[0], parts[1].parse()?);
        if let Some(u) = parts.get(2).filter(|u| !u.is_empty()) {
            spec.unique = Some(u.parse().map_err(|_| format!("invalid unique count {u:?}"))?);
        }
        if let Some(m) = parts.get(3) {
            spec.missing_rate = m.parse().map_err(|_| format!("invalid missing rate {m:?}"))?;
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub rows: u64,
    pub seed: u64,
    pub entities: Vec<EntitySpec>,
    /// Reject entities whose planned dimensions would not classify as
    /// requested. When off, the class only steers the value layout.
    pub enforce_classes: bool,
    pub classifier: ClassifierConfig,
}

impl CorpusSpec {
    /// A mixed corpus with one entity of each class plus a second identity
    /// field and a sparse field.
    pub fn default_entities() -> Vec<EntitySpec> {
        use StructureClass::*;
        vec![
            EntitySpec::new("id", Identity),
            EntitySpec::new("user", Identity).with_missing_rate(0.05),
            EntitySpec::new("time", Organizational),
            EntitySpec::new("word", Authoritative),
            EntitySpec::new("department", Vestigial),
            EntitySpec::new("lat", Identity).with_missing_rate(0.3),
        ]
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("entity {entity:?}: {reason}")]
    Contradictory { entity: String, reason: String },
    #[error("invalid corpus spec: {0}")]
    Invalid(String),
}

/// A generated corpus plus what the generator planned for it.
#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub csv: String,
    /// Fields holding whitespace-separated tokens.
    pub tokenized: Vec<String>,
    /// Planned `(N_i, M_i, V_i)` per entity, in column order.
    pub planned: Vec<EntityStats>,
    /// Whether any field was left blank in any row.
    pub planted_missing: bool,
}

impl GeneratedCorpus {
    pub fn ingest_config(&self) -> IngestConfig {
        IngestConfig {
            tokenized_fields: self.tokenized.iter().cloned().collect(),
            ..Default::default()
        }
    }
}

fn contradiction(entity: &str, reason: impl Into<String>) -> GenerateError {
    GenerateError::Contradictory {
        entity: entity.to_owned(),
        reason: reason.into(),
    }
}

fn plan_unique(spec: &EntitySpec, present: u64, config: &ClassifierConfig) -> u64 {
    if let Some(u) = spec.unique {
        return u;
    }
    match spec.class {
        StructureClass::Identity => present,
        StructureClass::Vestigial => 1,
        StructureClass::Authoritative => 3 * present,
        StructureClass::Organizational => {
            let target = (present as f64 / (2.0 * config.tau_organization)).floor() as u64;
            target.max(config.vestigial_max_unique + 1)
        }
    }
}

/// Produces the corpus described by `spec`, or explains why the requested
/// classes cannot be realized.
pub fn generate(spec: &CorpusSpec) -> Result<GeneratedCorpus, GenerateError> {
    spec.classifier
        .validate()
        .map_err(|e| GenerateError::Invalid(e.to_string()))?;
    let mut names = BTreeSet::new();
    for e in &spec.entities {
        if e.name.is_empty() || e.name.contains('|') {
            return Err(GenerateError::Invalid(format!("invalid entity name {:?}", e.name)));
        }
        if !names.insert(e.name.as_str()) {
            return Err(GenerateError::Invalid(format!("entity {:?} listed twice", e.name)));
        }
        if !(0.0..1.0).contains(&e.missing_rate) {
            return Err(GenerateError::Invalid(format!(
                "missing rate for {:?} must be in [0, 1)",
                e.name
            )));
        }
    }

    let rows = spec.rows as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut columns: Vec<Vec<String>> = Vec::with_capacity(spec.entities.len());
    let mut planned = Vec::with_capacity(spec.entities.len());
    let mut tokenized = Vec::new();
    let mut planted_missing = false;

    for e in &spec.entities {
        let present_rows: Vec<usize> = (0..rows)
            .filter(|_| e.missing_rate == 0.0 || rng.random::<f64>() >= e.missing_rate)
            .collect();
        planted_missing |= present_rows.len() < rows;
        let present = present_rows.len() as u64;
        let unique = plan_unique(e, present, &spec.classifier);

        let mut cells = vec![String::new(); rows];
        if present > 0 {
            if unique == 0 {
                return Err(contradiction(&e.name, "zero unique values over non-empty rows"));
            }
            let single_valued = e.class != StructureClass::Authoritative;
            let unique = if single_valued && !spec.enforce_classes { unique.min(present) } else { unique };
            if single_valued && unique > present {
                return Err(contradiction(
                    &e.name,
                    format!("{unique} unique values cannot fit in {present} single-valued rows"),
                ));
            }
            let stats = if single_valued {
                EntityStats::new(&e.name, present, unique, present)
            } else {
                EntityStats::new(&e.name, present, unique, unique.max(present))
            };
            let got = classify(&stats, &spec.classifier);
            if spec.enforce_classes && got != e.class {
                return Err(contradiction(
                    &e.name,
                    format!(
                        "N_i={present}, M_i={unique} classifies as {got}, not {}",
                        e.class
                    ),
                ));
            }
            fill_cells(e, &present_rows, unique, &mut cells, &mut rng);
            planned.push(stats);
        } else {
            planned.push(EntityStats::new(&e.name, 0, 0, 0));
        }
        if e.class == StructureClass::Authoritative {
            tokenized.push(e.name.clone());
        }
        columns.push(cells);
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = spec.entities.iter().map(|e| e.name.as_str()).collect();
    writer.write_record(&header).expect("in-memory write");
    for r in 0..rows {
        writer
            .write_record(columns.iter().map(|c| c[r].as_str()))
            .expect("in-memory write");
    }
    let csv = String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("UTF-8");
    Ok(GeneratedCorpus {
        csv,
        tokenized,
        planned,
        planted_missing,
    })
}

fn fill_cells(
    e: &EntitySpec,
    present_rows: &[usize],
    unique: u64,
    cells: &mut [String],
    rng: &mut ChaCha8Rng,
) {
    let present = present_rows.len();
    let unique = unique as usize;
    let stem: String = e.name.chars().take(3).collect();
    let value = |i: usize| format!("{stem}{i:06}");
    match e.class {
        StructureClass::Authoritative => {
            // Spread `unique` distinct tokens round-robin so every row holds
            // at least one and every token is used exactly once.
            let mut tokens: Vec<Vec<String>> = vec![Vec::new(); present];
            let mut ids: Vec<usize> = (0..unique).collect();
            ids.shuffle(rng);
            for (k, id) in ids.into_iter().enumerate() {
                tokens[k % present].push(value(id));
            }
            for (slot, &r) in present_rows.iter().enumerate() {
                cells[r] = tokens[slot].join(" ");
            }
        }
        _ => {
            // First `unique` present rows get one value each so every value
            // is used; the rest draw uniformly.
            let mut assignment: Vec<usize> = (0..present)
                .map(|slot| if slot < unique { slot } else { rng.random_range(0..unique) })
                .collect();
            assignment.shuffle(rng);
            for (slot, &r) in present_rows.iter().enumerate() {
                cells[r] = value(assignment[slot]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(rows: u64, entities: Vec<EntitySpec>) -> CorpusSpec {
        CorpusSpec {
            rows,
            seed: 7,
            entities,
            enforce_classes: true,
            classifier: ClassifierConfig::default(),
        }
    }

    #[test]
    fn zero_rows_is_header_only() {
        let out = generate(&spec(0, CorpusSpec::default_entities())).unwrap();
        assert_eq!(out.csv, "id,user,time,word,department,lat\n");
        assert!(!out.planted_missing);
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate(&spec(500, CorpusSpec::default_entities())).unwrap();
        let b = generate(&spec(500, CorpusSpec::default_entities())).unwrap();
        assert_eq!(a.csv, b.csv);
        let mut other = spec(500, CorpusSpec::default_entities());
        other.seed = 8;
        assert_ne!(generate(&other).unwrap().csv, a.csv);
    }

    #[test]
    fn contradictory_requests_fail() {
        let err = generate(&spec(
            100,
            vec![EntitySpec::new("w", StructureClass::Authoritative).with_unique(1)],
        ))
        .unwrap_err();
        assert!(matches!(err, GenerateError::Contradictory { .. }));
        let err = generate(&spec(10, vec![EntitySpec::new("t", StructureClass::Organizational)])).unwrap_err();
        assert!(matches!(err, GenerateError::Contradictory { .. }));
        let err = generate(&spec(1, vec![EntitySpec::new("i", StructureClass::Identity)])).unwrap_err();
        assert!(matches!(err, GenerateError::Contradictory { .. }));
    }

    #[test]
    fn invalid_specs_fail() {
        let dup = vec![
            EntitySpec::new("a", StructureClass::Vestigial),
            EntitySpec::new("a", StructureClass::Vestigial),
        ];
        assert!(matches!(generate(&spec(5, dup)), Err(GenerateError::Invalid(_))));
        let bad = vec![EntitySpec::new("a", StructureClass::Vestigial).with_missing_rate(1.0)];
        assert!(matches!(generate(&spec(5, bad)), Err(GenerateError::Invalid(_))));
    }

    #[test]
    fn entity_spec_parsing() {
        let s: EntitySpec = "time:organizational:10:0.25".parse().unwrap();
        assert_eq!(s.class, StructureClass::Organizational);
        assert_eq!(s.unique, Some(10));
        assert_eq!(s.missing_rate, 0.25);
        let s: EntitySpec = "word:authority".parse().unwrap();
        assert_eq!(s.unique, None);
        let s: EntitySpec = "x:vestigial::0.5".parse().unwrap();
        assert_eq!((s.unique, s.missing_rate), (None, 0.5));
        assert!("x".parse::<EntitySpec>().is_err());
        assert!("x:nope".parse::<EntitySpec>().is_err());
    }
}

//! Dimensional data analysis: per-entity `(N_i, M_i, V_i)` counts, the
//! global-sum consistency checks, and structural classification.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assoc_array::AssocArray;
use crate::ingest::EntityRegistry;

/// Dimensions of one entity's sub-array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityStats {
    pub entity: String,
    /// Rows holding at least one value of the entity (`N_i`).
    #[serde(rename = "N_i")]
    pub rows: u64,
    /// Stored entries (`V_i`).
    #[serde(rename = "V_i")]
    pub entries: u64,
    /// Distinct column keys, i.e. unique values (`M_i`).
    #[serde(rename = "M_i")]
    pub columns: u64,
}

impl EntityStats {
    pub fn new(entity: impl Into<String>, rows: u64, columns: u64, entries: u64) -> Self {
        EntityStats {
            entity: entity.into(),
            rows,
            entries,
            columns,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StructureClass {
    Identity,
    Authoritative,
    Organizational,
    Vestigial,
}

impl StructureClass {
    pub const ALL: [StructureClass; 4] = [
        StructureClass::Identity,
        StructureClass::Authoritative,
        StructureClass::Organizational,
        StructureClass::Vestigial,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StructureClass::Identity => "Identity",
            StructureClass::Authoritative => "Authoritative",
            StructureClass::Organizational => "Organizational",
            StructureClass::Vestigial => "Vestigial",
        }
    }
}

impl fmt::Display for StructureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StructureClass {
    type Err = String;

    /// Accepts the class names case-insensitively, plus the short forms
    /// `Authority` and `Organization`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "i" => Ok(StructureClass::Identity),
            "authoritative" | "authority" | "a" => Ok(StructureClass::Authoritative),
            "organizational" | "organization" | "o" => Ok(StructureClass::Organizational),
            "vestigial" | "delta" | "v" => Ok(StructureClass::Vestigial),
            _ => Err(format!("unknown structure class {s:?}")),
        }
    }
}

/// Thresholds turning "significantly smaller/greater" into numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassifierConfig {
    /// Minimum `M_i / N_i` for Authoritative.
    pub tau_authority: f64,
    /// Minimum `N_i / M_i` for Organizational.
    pub tau_organization: f64,
    /// Largest `M_i` still counted as Vestigial.
    pub vestigial_max_unique: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            tau_authority: 2.0,
            tau_organization: 50.0,
            vestigial_max_unique: 1,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DdaError {
    #[error("invalid classifier configuration: {0}")]
    Config(String),
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), DdaError> {
        if !self.tau_authority.is_finite() || self.tau_authority <= 1.0 {
            return Err(DdaError::Config(format!(
                "tau_authority must be a finite number > 1, got {}",
                self.tau_authority
            )));
        }
        if !self.tau_organization.is_finite() || self.tau_organization <= 1.0 {
            return Err(DdaError::Config(format!(
                "tau_organization must be a finite number > 1, got {}",
                self.tau_organization
            )));
        }
        if self.vestigial_max_unique < 1 {
            return Err(DdaError::Config("vestigial_max_unique must be >= 1".into()));
        }
        Ok(())
    }
}

/// Classifies one entity. Rules are tried in order, and a ratio exactly at
/// its threshold selects the special class:
///
/// 1. Vestigial when `M_i <= vestigial_max_unique`;
/// 2. Authoritative when `M_i / N_i >= tau_authority`;
/// 3. Organizational when `N_i / M_i >= tau_organization`;
/// 4. Identity otherwise.
pub fn classify(stats: &EntityStats, config: &ClassifierConfig) -> StructureClass {
    if stats.columns <= config.vestigial_max_unique {
        return StructureClass::Vestigial;
    }
    let rows = stats.rows as f64;
    let cols = stats.columns as f64;
    if rows == 0.0 || cols / rows >= config.tau_authority {
        StructureClass::Authoritative
    } else if rows / cols >= config.tau_organization {
        StructureClass::Organizational
    } else {
        StructureClass::Identity
    }
}

/// Output of the per-entity pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EntityScan {
    pub stats: Vec<EntityStats>,
    /// Registered entities with no stored entries.
    pub skipped: Vec<String>,
}

/// Counts `(N_i, M_i, V_i)` for every registered entity, skipping entities
/// whose sub-array is empty.
///
/// The sub-array of an entity is the contiguous block of column keys carrying
/// its prefix, so each entity is counted in one pass over the rows without
/// materializing the selection.
pub fn compute_entity_stats(store: &AssocArray, registry: &EntityRegistry) -> EntityScan {
    let counted: Vec<(String, Option<EntityStats>)> = registry
        .prefixes()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(entity, prefix)| {
            let range = store.col_prefix_range(&prefix);
            if range.is_empty() {
                return (entity.to_owned(), None);
            }
            let mut rows = 0u64;
            let mut entries = 0u64;
            for r in 0..store.nrows() {
                let (cols, _) = store.row_slice(r);
                let lo = cols.partition_point(|&c| c < range.start);
                let hi = cols.partition_point(|&c| c < range.end);
                if hi > lo {
                    rows += 1;
                    entries += (hi - lo) as u64;
                }
            }
            let stats = EntityStats::new(entity, rows, range.len() as u64, entries);
            (entity.to_owned(), Some(stats))
        })
        .collect();

    let mut scan = EntityScan::default();
    for (entity, stats) in counted {
        match stats {
            Some(s) => scan.stats.push(s),
            None => scan.skipped.push(entity),
        }
    }
    scan
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "N <= sum(N_i)")]
    RowsBounded,
    #[serde(rename = "M = sum(M_i)")]
    ColumnsPartition,
    #[serde(rename = "V = sum(V_i)")]
    EntriesPartition,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::RowsBounded => "N <= sum(N_i)",
            Relation::ColumnsPartition => "M = sum(M_i)",
            Relation::EntriesPartition => "V = sum(V_i)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub relation: Relation,
    pub lhs: u64,
    pub rhs: u64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalSums {
    #[serde(rename = "N")]
    pub rows: u64,
    #[serde(rename = "M")]
    pub columns: u64,
    #[serde(rename = "V")]
    pub entries: u64,
    #[serde(rename = "sumN_i")]
    pub sum_rows: u64,
    #[serde(rename = "sumM_i")]
    pub sum_columns: u64,
    #[serde(rename = "sumV_i")]
    pub sum_entries: u64,
    pub checks: Vec<RelationCheck>,
}

impl GlobalSums {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_relations(&self) -> Vec<Relation> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.relation).collect()
    }
}

/// Checks `N <= sum(N_i)`, `M = sum(M_i)` and `V = sum(V_i)`.
pub fn validate_global_sums(store: &AssocArray, stats: &[EntityStats]) -> GlobalSums {
    let rows = store.nrows() as u64;
    let columns = store.ncols() as u64;
    let entries = store.nnz() as u64;
    let sum_rows = stats.iter().map(|s| s.rows).sum();
    let sum_columns = stats.iter().map(|s| s.columns).sum();
    let sum_entries = stats.iter().map(|s| s.entries).sum();
    let checks = vec![
        RelationCheck {
            relation: Relation::RowsBounded,
            lhs: rows,
            rhs: sum_rows,
            passed: rows <= sum_rows,
        },
        RelationCheck {
            relation: Relation::ColumnsPartition,
            lhs: columns,
            rhs: sum_columns,
            passed: columns == sum_columns,
        },
        RelationCheck {
            relation: Relation::EntriesPartition,
            lhs: entries,
            rhs: sum_entries,
            passed: entries == sum_entries,
        },
    ];
    GlobalSums {
        rows,
        columns,
        entries,
        sum_rows,
        sum_columns,
        sum_entries,
        checks,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityReport {
    #[serde(flatten)]
    pub stats: EntityStats,
    #[serde(rename = "structureType")]
    pub class: StructureClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Durations {
    pub dda_seconds: f64,
}

/// Everything one DDA pass produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DdaReport {
    pub classifier: ClassifierConfig,
    pub entities: Vec<EntityReport>,
    /// Absent when the report was built from recorded stats without a store.
    pub global_sums: Option<GlobalSums>,
    pub skipped: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub durations: Option<Durations>,
}

impl DdaReport {
    /// Classifies precomputed stats. No store is available, so no global
    /// sums are checked.
    pub fn from_stats(stats: Vec<EntityStats>, config: &ClassifierConfig) -> Result<Self, DdaError> {
        config.validate()?;
        let mut entities = Vec::new();
        let mut skipped = Vec::new();
        for s in stats {
            if s.rows == 0 {
                skipped.push(s.entity);
            } else {
                let class = classify(&s, config);
                entities.push(EntityReport { stats: s, class });
            }
        }
        Ok(DdaReport {
            classifier: *config,
            entities,
            global_sums: None,
            skipped,
            durations: None,
        })
    }

    /// False only when a global-sum relation was checked and failed.
    pub fn passed(&self) -> bool {
        self.global_sums.as_ref().is_none_or(GlobalSums::passed)
    }

    pub fn class_of(&self, entity: &str) -> Option<StructureClass> {
        self.entities
            .iter()
            .find(|e| e.stats.entity == entity)
            .map(|e| e.class)
    }

    pub fn without_timings(mut self) -> Self {
        self.durations = None;
        self
    }
}

/// Runs the full pass: entity counts, global sums and classification.
pub fn analyze(
    store: &AssocArray,
    registry: &EntityRegistry,
    config: &ClassifierConfig,
) -> Result<DdaReport, DdaError> {
    config.validate()?;
    let start = Instant::now();
    let scan = compute_entity_stats(store, registry);
    let global_sums = validate_global_sums(store, &scan.stats);
    let entities = scan
        .stats
        .into_iter()
        .map(|stats| {
            let class = classify(&stats, config);
            EntityReport { stats, class }
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    Ok(DdaReport {
        classifier: *config,
        entities,
        global_sums: Some(global_sums),
        skipped: scan.skipped,
        durations: Some(Durations { dda_seconds: elapsed }),
    })
}

/// Writes the registry sidecar: one `entity<TAB>N_i<TAB>M_i<TAB>V_i` line per
/// registered entity, with zeros for skipped entities.
pub fn write_registry<W: Write>(registry: &EntityRegistry, scan: &EntityScan, mut w: W) -> io::Result<()> {
    for name in registry.names() {
        let (n, m, v) = scan
            .stats
            .iter()
            .find(|s| &s.entity == name)
            .map_or((0, 0, 0), |s| (s.rows, s.columns, s.entries));
        writeln!(w, "{name}\t{n}\t{m}\t{v}")?;
    }
    w.flush()
}

/// Reads the stats recorded in a registry sidecar.
pub fn read_registry_stats<R: io::BufRead>(r: R) -> Result<Vec<EntityStats>, String> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [name, n, m, v] = fields[..] else {
            return Err(format!("line {}: expected entity, N_i, M_i, V_i", i + 1));
        };
        let parse = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| format!("line {}: invalid count {s:?}", i + 1))
        };
        out.push(EntityStats::new(name, parse(n)?, parse(m)?, parse(v)?));
    }
    Ok(out)
}

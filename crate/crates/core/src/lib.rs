//! Dimensional data analysis over sparse associative arrays.
//!
//! The pipeline:
//!
//! 1. [`ingest`] parses CSV, TSV or JSON-lines records and explodes every
//!    `(field, value)` pair into a column key `field|value` with value 1.
//! 2. [`assoc_array::AssocArray`] holds the resulting sparse store and
//!    provides the algebra (sum, transpose, multiply, reductions,
//!    thresholds, prefix selection).
//! 3. [`dda`] counts, for each entity, the rows `N_i`, unique values `M_i`
//!    and entries `V_i`, checks them against the whole store and assigns a
//!    structure class.
//! 4. [`anomaly`] runs the highlight query that fits each class.
//! 5. [`report`] renders tables, JSON and timings.
//!
//! [`generate`] builds seeded synthetic corpora with controlled structure.

pub mod anomaly;
pub mod assoc_array;
pub mod dda;
pub mod generate;
pub mod ingest;
pub mod report;

pub use assoc_array::{AssocArray, Triple};
pub use dda::{analyze, classify, ClassifierConfig, DdaReport, EntityStats, StructureClass};
pub use ingest::{EntityRegistry, IngestConfig};

//! Parsing of delimited and JSON-lines records, and their explosion into
//! the sparse `entity|value` column schema.
//!
//! Every distinct non-blank value `v` of entity `e` in a record becomes one
//! entry `(rowKey, e|v, 1)`. Fields missing from a record produce no entries.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Read};
use std::str::FromStr;

use indexmap::IndexMap;
use serde_json::Value;
use thiserror::Error;

use crate::assoc_array::{AssocArray, Triple};

/// Width of the zero-padded record ordinal used for generated row keys.
pub const ROW_ORDINAL_WIDTH: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    #[default]
    Csv,
    Tsv,
    Jsonl,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(InputFormat::Csv),
            "tsv" => Ok(InputFormat::Tsv),
            "jsonl" => Ok(InputFormat::Jsonl),
            other => Err(format!("unknown input format {other:?} (expected csv, tsv or jsonl)")),
        }
    }
}

/// What to do with a record that fails to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorPolicy {
    #[default]
    Abort,
    Skip,
}

impl FromStr for ErrorPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abort" => Ok(ErrorPolicy::Abort),
            "skip" => Ok(ErrorPolicy::Skip),
            other => Err(format!("unknown error policy {other:?} (expected abort or skip)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub format: InputFormat,
    /// Field whose value becomes the row key. The field itself is not
    /// exploded into an entity.
    pub id_field: Option<String>,
    pub row_key_prefix: String,
    /// Splits non-tokenized fields into several values.
    pub multi_value_delimiter: Option<String>,
    /// Fields split on whitespace into several values.
    pub tokenized_fields: BTreeSet<String>,
    pub key_separator: String,
    /// Field name → entity name.
    pub entity_renames: BTreeMap<String, String>,
    pub on_error: ErrorPolicy,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            format: InputFormat::Csv,
            id_field: None,
            row_key_prefix: "row|".into(),
            multi_value_delimiter: None,
            tokenized_fields: BTreeSet::new(),
            key_separator: "|".into(),
            entity_renames: BTreeMap::new(),
            on_error: ErrorPolicy::Abort,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.key_separator.is_empty() {
            return Err(IngestError::Config("key separator must not be empty".into()));
        }
        if let Some(id) = &self.id_field {
            if self.tokenized_fields.contains(id) {
                return Err(IngestError::Config(format!(
                    "id field {id:?} cannot also be tokenized"
                )));
            }
        }
        if matches!(&self.multi_value_delimiter, Some(d) if d.is_empty()) {
            return Err(IngestError::Config("multi-value delimiter must not be empty".into()));
        }
        for entity in self.entity_renames.values() {
            check_entity_name(entity, &self.key_separator)?;
        }
        Ok(())
    }

    fn entity_for<'a>(&'a self, field: &'a str) -> &'a str {
        self.entity_renames.get(field).map(String::as_str).unwrap_or(field)
    }

    fn ordinal_key(&self, ordinal: usize) -> String {
        format!("{}{:0width$}", self.row_key_prefix, ordinal, width = ROW_ORDINAL_WIDTH)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("invalid ingest configuration: {0}")]
    Config(String),
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: duplicate row key {key:?}")]
    DuplicateKey { line: u64, key: String },
    #[error("invalid entity name {name:?}: {reason}")]
    EntityName { name: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IngestError {
    /// Source line number for record-level errors.
    pub fn line(&self) -> Option<u64> {
        match self {
            IngestError::Malformed { line, .. } | IngestError::DuplicateKey { line, .. } => Some(*line),
            _ => None,
        }
    }
}

fn check_entity_name(name: &str, separator: &str) -> Result<(), IngestError> {
    let reason = if name.is_empty() {
        "entity names must not be empty"
    } else if name.contains(separator) {
        "entity names must not contain the key separator"
    } else {
        return Ok(());
    };
    Err(IngestError::EntityName {
        name: name.to_owned(),
        reason: reason.to_owned(),
    })
}

/// One source record: a row key plus the raw values of each entity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Record {
    pub row_key: String,
    pub values: IndexMap<String, Vec<String>>,
}

/// Entities observed during ingest, in first-seen order.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityRegistry {
    separator: String,
    entities: Vec<String>,
}

impl EntityRegistry {
    pub fn new(separator: impl Into<String>) -> Self {
        EntityRegistry {
            separator: separator.into(),
            entities: Vec::new(),
        }
    }

    pub fn from_names<I, S>(separator: &str, names: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut registry = EntityRegistry::new(separator);
        for name in names {
            registry.register(name.as_ref())?;
        }
        Ok(registry)
    }

    /// Adds `name` if it is new. Returns its position.
    pub fn register(&mut self, name: &str) -> Result<usize, IngestError> {
        if let Some(i) = self.position(name) {
            return Ok(i);
        }
        check_entity_name(name, &self.separator)?;
        self.entities.push(name.to_owned());
        Ok(self.entities.len() - 1)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entities.iter().position(|e| e == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn names(&self) -> &[String] {
        &self.entities
    }

    pub fn separator(&self) -> &str {
        &self.separator
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Column-key prefix of an entity: `<entity><separator>`.
    pub fn prefix_of(&self, name: &str) -> String {
        format!("{name}{}", self.separator)
    }

    pub fn prefixes(&self) -> impl Iterator<Item = (&str, String)> + '_ {
        self.entities.iter().map(|e| (e.as_str(), self.prefix_of(e)))
    }
}

/// Result of parsing a stream: the records plus any skipped lines.
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub records: Vec<Record>,
    pub skipped: Vec<IngestError>,
}

struct RecordSink<'a> {
    config: &'a IngestConfig,
    outcome: ParseOutcome,
    seen_ids: HashSet<String>,
}

impl<'a> RecordSink<'a> {
    fn new(config: &'a IngestConfig) -> Self {
        RecordSink {
            config,
            outcome: ParseOutcome::default(),
            seen_ids: HashSet::new(),
        }
    }

    fn fail(&mut self, err: IngestError) -> Result<(), IngestError> {
        match self.config.on_error {
            ErrorPolicy::Abort => Err(err),
            ErrorPolicy::Skip => {
                self.outcome.skipped.push(err);
                Ok(())
            }
        }
    }

    /// Turns raw `(field, values)` pairs into a record and keeps it.
    fn accept(
        &mut self,
        line: u64,
        ordinal: usize,
        fields: Vec<(String, Vec<String>)>,
    ) -> Result<(), IngestError> {
        let config = self.config;
        let mut row_key = None;
        let mut values: IndexMap<String, Vec<String>> = IndexMap::new();
        for (field, raw) in fields {
            if config.id_field.as_deref() == Some(field.as_str()) {
                row_key = raw.into_iter().find(|v| !v.is_empty());
                if row_key.is_none() {
                    return self.fail(IngestError::Malformed {
                        line,
                        message: format!("id field {field:?} is blank"),
                    });
                }
                continue;
            }
            let split: Vec<String> = if config.tokenized_fields.contains(&field) {
                raw.iter()
                    .flat_map(|v| v.split_whitespace().map(str::to_owned))
                    .collect()
            } else if let Some(delim) = &config.multi_value_delimiter {
                raw.iter()
                    .flat_map(|v| v.split(delim.as_str()).map(str::to_owned))
                    .collect()
            } else {
                raw
            };
            values
                .entry(config.entity_for(&field).to_owned())
                .or_default()
                .extend(split);
        }
        let row_key = match (row_key, &config.id_field) {
            (Some(k), _) => k,
            (None, Some(id)) => {
                return self.fail(IngestError::Malformed {
                    line,
                    message: format!("missing id field {id:?}"),
                })
            }
            (None, None) => config.ordinal_key(ordinal),
        };
        if config.id_field.is_some() && !self.seen_ids.insert(row_key.clone()) {
            return self.fail(IngestError::DuplicateKey { line, key: row_key });
        }
        self.outcome.records.push(Record { row_key, values });
        Ok(())
    }
}

/// Parses a byte stream into records according to `config`.
///
/// Row keys are the id field's value when one is configured, otherwise the
/// 1-based record ordinal zero-padded to [`ROW_ORDINAL_WIDTH`] digits after
/// the row key prefix. Skipped records still consume an ordinal.
pub fn parse_records<R: Read>(input: R, config: &IngestConfig) -> Result<ParseOutcome, IngestError> {
    config.validate()?;
    match config.format {
        InputFormat::Csv => parse_delimited(input, config, b',', true),
        InputFormat::Tsv => parse_delimited(input, config, b'\t', false),
        InputFormat::Jsonl => parse_jsonl(input, config),
    }
}

fn parse_delimited<R: Read>(
    input: R,
    config: &IngestConfig,
    delimiter: u8,
    quoting: bool,
) -> Result<ParseOutcome, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .quoting(quoting)
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let headers: Vec<String> = match reader.headers() {
        Ok(h) => h.iter().map(str::to_owned).collect(),
        Err(e) => return Err(csv_error(e, 1)),
    };
    if let Some(id) = &config.id_field {
        if !headers.contains(id) {
            return Err(IngestError::Config(format!("id field {id:?} not found in header")));
        }
    }
    let mut sink = RecordSink::new(config);
    let mut record = csv::StringRecord::new();
    let mut ordinal = 0;
    loop {
        let line = reader.position().line();
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                ordinal += 1;
                let line = record.position().map_or(line, |p| p.line());
                let fields = headers
                    .iter()
                    .zip(record.iter())
                    .map(|(h, v)| (h.clone(), vec![v.to_owned()]))
                    .collect();
                sink.accept(line, ordinal, fields)?;
            }
            Err(e) => {
                ordinal += 1;
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    return Err(csv_error(e, line));
                }
                sink.fail(csv_error(e, line))?;
            }
        }
    }
    Ok(sink.outcome)
}

fn csv_error(err: csv::Error, fallback_line: u64) -> IngestError {
    let line = err.position().map_or(fallback_line, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => IngestError::Io(e),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => IngestError::Malformed {
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        csv::ErrorKind::Utf8 { err, .. } => IngestError::Malformed {
            line,
            message: format!("invalid UTF-8: {err}"),
        },
        other => IngestError::Malformed {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn json_field_values(field: &str, value: Value) -> Result<Option<Vec<String>>, String> {
    Ok(Some(match value {
        Value::Null => return Ok(None),
        Value::String(s) => vec![s],
        Value::Number(n) => vec![n.to_string()],
        Value::Bool(b) => vec![b.to_string()],
        Value::Array(items) => items
            .into_iter()
            .filter_map(|item| match item {
                Value::Null => None,
                Value::String(s) => Some(Ok(s)),
                Value::Number(n) => Some(Ok(n.to_string())),
                Value::Bool(b) => Some(Ok(b.to_string())),
                _ => Some(Err(format!("field {field:?} holds a nested value"))),
            })
            .collect::<Result<_, _>>()?,
        Value::Object(_) => return Err(format!("field {field:?} holds a nested object")),
    }))
}

fn parse_jsonl<R: Read>(input: R, config: &IngestConfig) -> Result<ParseOutcome, IngestError> {
    let reader = std::io::BufReader::new(input);
    let mut sink = RecordSink::new(config);
    let mut ordinal = 0;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) if e.kind() == std::io::ErrorKind::InvalidData => {
                ordinal += 1;
                sink.fail(IngestError::Malformed {
                    line: line_no,
                    message: "invalid UTF-8".into(),
                })?;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        if line.trim().is_empty() {
            continue;
        }
        ordinal += 1;
        let object = match serde_json::from_str::<Value>(&line) {
            Ok(Value::Object(map)) => map,
            Ok(_) => {
                sink.fail(IngestError::Malformed {
                    line: line_no,
                    message: "expected a JSON object".into(),
                })?;
                continue;
            }
            Err(e) => {
                sink.fail(IngestError::Malformed {
                    line: line_no,
                    message: format!("invalid JSON: {e}"),
                })?;
                continue;
            }
        };
        let mut fields = Vec::with_capacity(object.len());
        let mut bad = None;
        for (field, value) in object {
            match json_field_values(&field, value) {
                Ok(Some(values)) => fields.push((field, values)),
                Ok(None) => {}
                Err(message) => {
                    bad = Some(message);
                    break;
                }
            }
        }
        match bad {
            Some(message) => sink.fail(IngestError::Malformed { line: line_no, message })?,
            None => sink.accept(line_no, ordinal, fields)?,
        }
    }
    Ok(sink.outcome)
}

/// Escapes occurrences of the separator inside a value as `\<separator>`.
pub fn escape_value(value: &str, separator: &str) -> String {
    if value.contains(separator) {
        value.replace(separator, &format!("\\{separator}"))
    } else {
        value.to_owned()
    }
}

/// Reverses [`escape_value`] for display.
pub fn unescape_value(value: &str, separator: &str) -> String {
    value.replace(&format!("\\{separator}"), separator)
}

/// Emits one presence triple per distinct non-blank `(entity, value)` pair.
pub fn explode(record: &Record, config: &IngestConfig) -> Vec<Triple> {
    let sep = &config.key_separator;
    let mut seen: HashSet<String> = HashSet::new();
    let mut out = Vec::new();
    for (entity, values) in &record.values {
        for value in values.iter().filter(|v| !v.is_empty()) {
            let col = format!("{entity}{sep}{}", escape_value(value, sep));
            if seen.insert(col.clone()) {
                out.push(Triple::new(record.row_key.clone(), col, 1.0));
            }
        }
    }
    out
}

/// Explodes every record into one store and records the entities seen.
///
/// Entities are registered in first-seen order, including those whose
/// values are all blank; they show up later as skipped entities.
pub fn build_store(
    records: &[Record],
    config: &IngestConfig,
) -> Result<(AssocArray, EntityRegistry), IngestError> {
    config.validate()?;
    let mut registry = EntityRegistry::new(config.key_separator.clone());
    let mut triples = Vec::new();
    for record in records {
        for entity in record.values.keys() {
            registry.register(entity)?;
        }
        triples.extend(explode(record, config));
    }
    let store = AssocArray::from_triples(&triples).map_err(|e| IngestError::Malformed {
        line: 0,
        message: e.to_string(),
    })?;
    Ok((store, registry))
}

/// Parses and builds in one step.
pub fn ingest<R: Read>(
    input: R,
    config: &IngestConfig,
) -> Result<(AssocArray, EntityRegistry, ParseOutcome), IngestError> {
    let outcome = parse_records(input, config)?;
    let (store, registry) = build_store(&outcome.records, config)?;
    Ok((store, registry, outcome))
}

/// Reads the entity names from a registry sidecar. Only the first
/// tab-separated column of each line is used.
pub fn read_registry<R: BufRead>(input: R, separator: &str) -> Result<EntityRegistry, IngestError> {
    let mut registry = EntityRegistry::new(separator);
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let name = line.split('\t').next().unwrap_or_default();
        if registry.contains(name) {
            return Err(IngestError::Malformed {
                line: i as u64 + 1,
                message: format!("entity {name:?} listed twice"),
            });
        }
        registry.register(name)?;
    }
    Ok(registry)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_config() -> IngestConfig {
        IngestConfig::default()
    }

    #[test]
    fn empty_stream_gives_no_records() {
        for format in [InputFormat::Csv, InputFormat::Tsv, InputFormat::Jsonl] {
            let config = IngestConfig { format, ..Default::default() };
            let out = parse_records(&b""[..], &config).unwrap();
            assert!(out.records.is_empty());
        }
    }

    #[test]
    fn csv_line_maps_fields_directly() {
        let out = parse_records("user,city\nalice,Boston\n".as_bytes(), &csv_config()).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!(r.row_key, "row|0000000001");
        assert_eq!(r.values["user"], vec!["alice"]);
        assert_eq!(r.values["city"], vec!["Boston"]);
    }

    #[test]
    fn jsonl_tokenized_text_keeps_duplicates_until_explode() {
        let mut config = IngestConfig {
            format: InputFormat::Jsonl,
            ..Default::default()
        };
        config.tokenized_fields.insert("text".into());
        config.entity_renames.insert("text".into(), "word".into());
        let out = parse_records(r#"{"text": "hello hello world"}"#.as_bytes(), &config).unwrap();
        let record = &out.records[0];
        assert_eq!(record.values["word"], vec!["hello", "hello", "world"]);
        let triples = explode(record, &config);
        let cols: Vec<_> = triples.iter().map(|t| t.col.as_str()).collect();
        assert_eq!(cols, ["word|hello", "word|world"]);
        assert!(triples.iter().all(|t| t.val == 1.0));
    }

    #[test]
    fn jsonl_arrays_numbers_and_nulls() {
        let config = IngestConfig {
            format: InputFormat::Jsonl,
            ..Default::default()
        };
        let input = "{\"tag\": [\"a\", \"b\"], \"n\": 3, \"gone\": null}\n\n{\"tag\": \"c\"}\n";
        let out = parse_records(input.as_bytes(), &config).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].values["tag"], vec!["a", "b"]);
        assert_eq!(out.records[0].values["n"], vec!["3"]);
        assert!(!out.records[0].values.contains_key("gone"));
        assert_eq!(out.records[1].row_key, "row|0000000002");
    }

    #[test]
    fn malformed_csv_aborts_with_line_number() {
        let err = parse_records("a,b\n1,2\n3\n".as_bytes(), &csv_config()).unwrap_err();
        assert_eq!(err.line(), Some(3));
    }

    #[test]
    fn malformed_csv_skip_policy_keeps_going() {
        let config = IngestConfig {
            on_error: ErrorPolicy::Skip,
            ..Default::default()
        };
        let out = parse_records("a,b\n1,2\n3\n4,5\n".as_bytes(), &config).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.skipped.len(), 1);
        assert_eq!(out.skipped[0].line(), Some(3));
        assert_eq!(out.records[1].row_key, "row|0000000003");
    }

    #[test]
    fn malformed_json_reports_line() {
        let config = IngestConfig {
            format: InputFormat::Jsonl,
            ..Default::default()
        };
        let err = parse_records("{\"a\":\"x\"}\n{oops\n".as_bytes(), &config).unwrap_err();
        assert_eq!(err.line(), Some(2));
        let err = parse_records("[1]\n".as_bytes(), &config).unwrap_err();
        assert_eq!(err.line(), Some(1));
        let err = parse_records("{\"a\": {\"b\": 1}}\n".as_bytes(), &config).unwrap_err();
        assert_eq!(err.line(), Some(1));
    }

    #[test]
    fn id_field_becomes_row_key_and_duplicates_fail() {
        let config = IngestConfig {
            id_field: Some("id".into()),
            ..Default::default()
        };
        let out = parse_records("id,user\nt1,alice\nt2,bob\n".as_bytes(), &config).unwrap();
        assert_eq!(out.records[0].row_key, "t1");
        assert!(!out.records[0].values.contains_key("id"));
        let err = parse_records("id,user\nt1,alice\nt1,bob\n".as_bytes(), &config).unwrap_err();
        match err {
            IngestError::DuplicateKey { key, line } => {
                assert_eq!(key, "t1");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tsv_has_no_quoting() {
        let config = IngestConfig {
            format: InputFormat::Tsv,
            ..Default::default()
        };
        let out = parse_records("q\tr\n\"x\ty\n".as_bytes(), &config).unwrap();
        assert_eq!(out.records[0].values["q"], vec!["\"x"]);
    }

    #[test]
    fn csv_quoting_follows_rfc4180() {
        let out = parse_records("a,b\n\"x,1\",\"say \"\"hi\"\"\"\n".as_bytes(), &csv_config()).unwrap();
        assert_eq!(out.records[0].values["a"], vec!["x,1"]);
        assert_eq!(out.records[0].values["b"], vec!["say \"hi\""]);
    }

    #[test]
    fn multi_value_delimiter_splits_untokenized_fields() {
        let config = IngestConfig {
            multi_value_delimiter: Some(";".into()),
            ..Default::default()
        };
        let out = parse_records("lat,user\n1;2,a\n".as_bytes(), &config).unwrap();
        assert_eq!(out.records[0].values["lat"], vec!["1", "2"]);
    }

    #[test]
    fn explode_empty_and_blank() {
        let config = csv_config();
        let record = Record {
            row_key: "row|1".into(),
            values: IndexMap::new(),
        };
        assert!(explode(&record, &config).is_empty());
        let mut values = IndexMap::new();
        values.insert("user".to_owned(), vec![String::new()]);
        let record = Record {
            row_key: "row|1".into(),
            values,
        };
        assert!(explode(&record, &config).is_empty());
    }

    #[test]
    fn explode_single_user() {
        let mut values = IndexMap::new();
        values.insert("user".to_owned(), vec!["SFBayRoadAlerts".to_owned()]);
        let record = Record {
            row_key: "row|0000000001".into(),
            values,
        };
        assert_eq!(
            explode(&record, &csv_config()),
            vec![Triple::new("row|0000000001", "user|SFBayRoadAlerts", 1.0)]
        );
    }

    #[test]
    fn separator_inside_values_is_escaped() {
        let mut values = IndexMap::new();
        values.insert("path".to_owned(), vec!["a|b".to_owned()]);
        let record = Record {
            row_key: "r".into(),
            values,
        };
        let triples = explode(&record, &csv_config());
        assert_eq!(triples[0].col, "path|a\\|b");
        assert_eq!(unescape_value("a\\|b", "|"), "a|b");
    }

    #[test]
    fn build_store_registers_entities_in_first_seen_order() {
        let input = "user,time,blank\nalice,t1,\nbob,t1,\n";
        let (store, registry, _) = ingest(input.as_bytes(), &csv_config()).unwrap();
        assert_eq!(registry.names(), ["user", "time", "blank"]);
        assert_eq!(store.nnz(), 4);
        assert_eq!(store.ncols(), 3);
        assert_eq!(store.get("row|0000000002", "time|t1"), Some(1.0));
    }

    #[test]
    fn entity_names_must_not_contain_separator() {
        let err = ingest("a|b,c\n1,2\n".as_bytes(), &csv_config()).unwrap_err();
        assert!(matches!(err, IngestError::EntityName { .. }));
    }

    #[test]
    fn config_validation() {
        let mut config = IngestConfig {
            id_field: Some("id".into()),
            ..Default::default()
        };
        config.tokenized_fields.insert("id".into());
        assert!(matches!(config.validate(), Err(IngestError::Config(_))));
        let config = IngestConfig {
            key_separator: String::new(),
            ..Default::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn registry_sidecar_reads_first_column() {
        let reg = read_registry("user\t3\t2\t3\ntime\n".as_bytes(), "|").unwrap();
        assert_eq!(reg.names(), ["user", "time"]);
        assert_eq!(reg.prefix_of("user"), "user|");
        assert!(read_registry("a\na\n".as_bytes(), "|").is_err());
    }
}

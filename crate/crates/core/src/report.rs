//! Text, CSV and JSON rendering of DDA reports, findings and timings.
//!
//! Text tables are drawn with ASCII `+`, `-` and `|`. Numbers are plain
//! decimals without grouping, so the output diffs cleanly. Stats tables
//! list `Entity | N_i | V_i | M_i | Structure Type`:
//!
//! ```text
//! +--------+-----+-----+-----+----------------+
//! | Entity | N_i | V_i | M_i | Structure Type |
//! +--------+-----+-----+-----+----------------+
//! | time   | 300 | 300 |   5 | Organizational |
//! +--------+-----+-----+-----+----------------+
//! ```

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::anomaly::AnomalyFinding;
use crate::dda::{DdaReport, GlobalSums};
use crate::ingest::unescape_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputMode {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for OutputMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(OutputMode::Text),
            "json" => Ok(OutputMode::Json),
            "csv" => Ok(OutputMode::Csv),
            other => Err(format!("unknown output mode {other:?}")),
        }
    }
}

#[derive(Clone, Copy)]
enum Align {
    Left,
    Right,
}

fn draw_table(headers: &[&str], align: &[Align], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let rule: String = {
        let mut s = String::from("+");
        for w in &widths {
            s.push_str(&"-".repeat(w + 2));
            s.push('+');
        }
        s.push('\n');
        s
    };
    let line = |cells: &[String]| {
        let mut s = String::from("|");
        for ((cell, w), a) in cells.iter().zip(&widths).zip(align) {
            let pad = w - cell.chars().count();
            match a {
                Align::Left => s.push_str(&format!(" {cell}{} |", " ".repeat(pad))),
                Align::Right => s.push_str(&format!(" {}{cell} |", " ".repeat(pad))),
            }
        }
        s.push('\n');
        s
    };
    let mut out = rule.clone();
    out.push_str(&line(&headers.iter().map(|h| h.to_string()).collect::<Vec<_>>()));
    out.push_str(&rule);
    if !rows.is_empty() {
        for row in rows {
            out.push_str(&line(row));
        }
        out.push_str(&rule);
    }
    out
}

const STATS_HEADERS: [&str; 5] = ["Entity", "N_i", "V_i", "M_i", "Structure Type"];

fn stats_rows(report: &DdaReport) -> Vec<Vec<String>> {
    report
        .entities
        .iter()
        .map(|e| {
            vec![
                e.stats.entity.clone(),
                e.stats.rows.to_string(),
                e.stats.entries.to_string(),
                e.stats.columns.to_string(),
                e.class.to_string(),
            ]
        })
        .collect()
}

fn csv_string(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

/// Renders the per-entity table. JSON mode emits the whole report.
pub fn render_stats_table(report: &DdaReport, mode: OutputMode) -> String {
    match mode {
        OutputMode::Text => {
            use Align::*;
            draw_table(&STATS_HEADERS, &[Left, Right, Right, Right, Left], &stats_rows(report))
        }
        OutputMode::Csv => csv_string(&STATS_HEADERS, &stats_rows(report)),
        OutputMode::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

pub fn parse_report_json(json: &str) -> serde_json::Result<DdaReport> {
    serde_json::from_str(json)
}

/// One line per relation, e.g. `PASS  M = sum(M_i)  12 = 12`.
pub fn render_global_sums(sums: &GlobalSums) -> String {
    let mut out = String::new();
    for check in &sums.checks {
        let (status, op) = match (check.passed, check.relation) {
            (true, crate::dda::Relation::RowsBounded) => ("PASS", "<="),
            (false, crate::dda::Relation::RowsBounded) => ("FAIL", ">"),
            (true, _) => ("PASS", "="),
            (false, _) => ("FAIL", "!="),
        };
        out.push_str(&format!(
            "{status}  {}  {} {op} {}\n",
            check.relation, check.lhs, check.rhs
        ));
    }
    out
}

/// Renders findings as JSON lines, CSV, or a text table. Text and CSV modes
/// show separator-escaped values unescaped.
pub fn render_findings(findings: &[AnomalyFinding], mode: OutputMode, separator: &str) -> String {
    const HEADERS: [&str; 4] = ["Kind", "Entity", "Subject", "Count"];
    let rows = || -> Vec<Vec<String>> {
        findings
            .iter()
            .map(|f| {
                vec![
                    format!("{:?}", f.kind),
                    f.entity.to_string(),
                    unescape_value(&f.subject.to_string(), separator),
                    f.count_text(),
                ]
            })
            .collect()
    };
    match mode {
        OutputMode::Json => findings
            .iter()
            .map(|f| serde_json::to_string(f).expect("finding serializes") + "\n")
            .collect(),
        OutputMode::Csv => csv_string(&HEADERS, &rows()),
        OutputMode::Text => {
            use Align::*;
            draw_table(&HEADERS, &[Left, Left, Left, Right], &rows())
        }
    }
}

pub fn parse_findings_jsonl(text: &str) -> serde_json::Result<Vec<AnomalyFinding>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Wall-clock comparison of the ingest and DDA phases.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub record_count: u64,
    pub triple_count: u64,
    /// Parse, explode, build and store serialization.
    pub ingest_seconds: f64,
    pub dda_seconds: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TimingJson {
    record_count: u64,
    triple_count: u64,
    ingest_seconds: f64,
    dda_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ingest_records_per_second: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dda_records_per_second: Option<f64>,
}

fn millis(s: f64) -> f64 {
    (s * 1000.0).round() / 1000.0
}

impl TimingReport {
    /// `dda_seconds / ingest_seconds`; undefined for an empty corpus or a
    /// zero ingest duration.
    pub fn ratio(&self) -> Option<f64> {
        (self.record_count > 0 && self.ingest_seconds > 0.0).then(|| self.dda_seconds / self.ingest_seconds)
    }

    fn throughput(&self, seconds: f64) -> Option<f64> {
        (self.record_count > 0 && seconds > 0.0).then(|| (self.record_count as f64 / seconds).round())
    }

    pub fn ingest_throughput(&self) -> Option<f64> {
        self.throughput(self.ingest_seconds)
    }

    pub fn dda_throughput(&self) -> Option<f64> {
        self.throughput(self.dda_seconds)
    }
}

/// Renders timings. Durations are shown at millisecond resolution; the ratio
/// and throughputs are omitted when undefined.
pub fn render_timings(t: &TimingReport, mode: OutputMode) -> String {
    let ratio = t.ratio().map(|r| (r * 10_000.0).round() / 10_000.0);
    match mode {
        OutputMode::Json => {
            let json = TimingJson {
                record_count: t.record_count,
                triple_count: t.triple_count,
                ingest_seconds: millis(t.ingest_seconds),
                dda_seconds: millis(t.dda_seconds),
                ratio,
                ingest_records_per_second: t.ingest_throughput(),
                dda_records_per_second: t.dda_throughput(),
            };
            serde_json::to_string_pretty(&json).expect("timings serialize") + "\n"
        }
        OutputMode::Text | OutputMode::Csv => {
            let mut pairs = vec![
                ("records", t.record_count.to_string()),
                ("triples", t.triple_count.to_string()),
                ("ingest_seconds", format!("{:.3}", t.ingest_seconds)),
                ("dda_seconds", format!("{:.3}", t.dda_seconds)),
            ];
            if let Some(r) = ratio {
                pairs.push(("dda_over_ingest", format!("{r}")));
            }
            if let Some(v) = t.ingest_throughput() {
                pairs.push(("ingest_records_per_second", format!("{v}")));
            }
            if let Some(v) = t.dda_throughput() {
                pairs.push(("dda_records_per_second", format!("{v}")));
            }
            if mode == OutputMode::Csv {
                let headers: Vec<&str> = pairs.iter().map(|p| p.0).collect();
                let row = vec![pairs.iter().map(|p| p.1.clone()).collect()];
                csv_string(&headers, &row)
            } else {
                let width = pairs.iter().map(|p| p.0.len()).max().unwrap_or(0);
                pairs
                    .iter()
                    .map(|(k, v)| format!("{k:<width$}  {v}\n"))
                    .collect()
            }
        }
    }
}

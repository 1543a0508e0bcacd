//! Tab-separated triple interchange format.
//!
//! One entry per line, `row<TAB>col<TAB>value`, lines in `(row, col)` order.
//! Integral values are written as plain decimal integers. Keys are written
//! verbatim except that backslash, tab, newline and carriage return are
//! escaped as `\\`, `\t`, `\n` and `\r`.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{AssocArray, Triple};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Renders a value as an integer when it is integral, otherwise with the
/// shortest representation that parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 9.007_199_254_740_992e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn escape_key(key: &str, out: &mut String) {
    for ch in key.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
}

fn unescape_key(raw: &str, line: usize) -> Result<String, FormatError> {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => {
                return Err(FormatError::Malformed {
                    line,
                    reason: format!("invalid escape sequence \\{}", other.map(String::from).unwrap_or_default()),
                })
            }
        }
    }
    Ok(out)
}

pub fn write_triples<W: Write>(array: &AssocArray, mut w: W) -> io::Result<()> {
    let mut line = String::new();
    for (r, c, v) in array.iter() {
        line.clear();
        escape_key(r, &mut line);
        line.push('\t');
        escape_key(c, &mut line);
        line.push('\t');
        line.push_str(&format_value(v));
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

/// Loads an array from the triple format. Input order is not required;
/// duplicate pairs are summed as in [`AssocArray::from_triples`].
pub fn read_triples<R: BufRead>(r: R) -> Result<AssocArray, FormatError> {
    let mut triples = Vec::new();
    let mut line_of = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(row), Some(col), Some(val), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(FormatError::Malformed {
                line: line_no,
                reason: "expected three tab-separated fields".into(),
            });
        };
        let val: f64 = val.parse().map_err(|_| FormatError::Malformed {
            line: line_no,
            reason: format!("invalid value {val:?}"),
        })?;
        triples.push(Triple::new(unescape_key(row, line_no)?, unescape_key(col, line_no)?, val));
        line_of.push(line_no);
    }
    AssocArray::from_triples(&triples).map_err(|e| {
        let index = match &e {
            super::ArrayError::EmptyRowKey { index }
            | super::ArrayError::EmptyColKey { index }
            | super::ArrayError::InvalidValue { index, .. } => *index,
        };
        FormatError::Malformed {
            line: line_of[index],
            reason: e.to_string(),
        }
    })
}

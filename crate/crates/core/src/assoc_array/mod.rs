//! Sparse associative arrays keyed by string row and column keys.
//!
//! An [`AssocArray`] is an immutable compressed-sparse-row matrix whose row and
//! column indices are sorted, de-duplicated string keys. Every operation
//! returns a new array in canonical form:
//!
//! * row and column keys are sorted by byte value and contain no phantom keys
//!   (every key owns at least one stored entry),
//! * within a row, entries are sorted by column index,
//! * only strictly positive values are stored; absence encodes zero.
//!
//! Because the form is canonical, structural equality (`==`) is entry-wise
//! equality.

mod io;

pub use io::{format_value, read_triples, write_triples, FormatError};

use std::collections::HashMap;
use std::ops::Range;

use thiserror::Error;

/// Key used for the collapsed dimension of [`AssocArray::row_sums`] and
/// [`AssocArray::col_sums`].
pub const SUM_KEY: &str = "1";

/// One `(row, col, val)` entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub row: String,
    pub col: String,
    pub val: f64,
}

impl Triple {
    pub fn new(row: impl Into<String>, col: impl Into<String>, val: f64) -> Self {
        Triple {
            row: row.into(),
            col: col.into(),
            val,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ArrayError {
    #[error("triple {index} has an empty row key")]
    EmptyRowKey { index: usize },
    #[error("triple {index} has an empty column key")]
    EmptyColKey { index: usize },
    #[error("triple {index} has invalid value {value} (values must be finite and non-negative)")]
    InvalidValue { index: usize, value: f64 },
}

/// Immutable sparse associative array.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssocArray {
    rows: Vec<String>,
    cols: Vec<String>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl AssocArray {
    pub fn empty() -> Self {
        AssocArray {
            row_ptr: vec![0],
            ..Default::default()
        }
    }

    /// Builds an array from triples, summing duplicate `(row, col)` pairs.
    ///
    /// Zero-valued triples are accepted and dropped. Empty keys and negative
    /// or non-finite values are rejected with the index of the offending
    /// triple.
    pub fn from_triples<'a, I>(triples: I) -> Result<Self, ArrayError>
    where
        I: IntoIterator<Item = &'a Triple>,
    {
        let mut borrowed = Vec::new();
        for (index, t) in triples.into_iter().enumerate() {
            if t.row.is_empty() {
                return Err(ArrayError::EmptyRowKey { index });
            }
            if t.col.is_empty() {
                return Err(ArrayError::EmptyColKey { index });
            }
            if !t.val.is_finite() || t.val < 0.0 {
                return Err(ArrayError::InvalidValue {
                    index,
                    value: t.val,
                });
            }
            borrowed.push((t.row.as_str(), t.col.as_str(), t.val));
        }
        Ok(Self::from_key_triples(borrowed))
    }

    /// Canonicalizing constructor over borrowed keys. Callers guarantee
    /// non-empty keys and non-negative finite values.
    pub(crate) fn from_key_triples<'a>(triples: Vec<(&'a str, &'a str, f64)>) -> Self {
        let mut row_keys: Vec<&str> = triples.iter().map(|t| t.0).collect();
        row_keys.sort_unstable();
        row_keys.dedup();
        let mut col_keys: Vec<&str> = triples.iter().map(|t| t.1).collect();
        col_keys.sort_unstable();
        col_keys.dedup();

        let row_index: HashMap<&str, usize> =
            row_keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let col_index: HashMap<&str, usize> =
            col_keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();

        let mut coords: Vec<(usize, usize, f64)> = triples
            .iter()
            .map(|(r, c, v)| (row_index[r], col_index[c], *v))
            .collect();
        coords.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0; row_keys.len() + 1];
        let mut col_idx = Vec::with_capacity(coords.len());
        let mut vals: Vec<f64> = Vec::with_capacity(coords.len());
        let mut last: Option<(usize, usize)> = None;
        let mut entry_rows = Vec::with_capacity(coords.len());
        for (r, c, v) in coords {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                entry_rows.push(r);
                last = Some((r, c));
            }
        }
        for &r in &entry_rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..row_keys.len() {
            row_ptr[i + 1] += row_ptr[i];
        }

        AssocArray {
            rows: row_keys.into_iter().map(str::to_owned).collect(),
            cols: col_keys.into_iter().map(str::to_owned).collect(),
            row_ptr,
            col_idx,
            vals,
        }
        .compact()
    }

    /// Drops non-positive values, then removes rows and columns left without
    /// entries.
    fn compact(mut self) -> Self {
        let nrows = self.rows.len();
        let mut keep_col = vec![false; self.cols.len()];
        let mut new_ptr = Vec::with_capacity(nrows + 1);
        new_ptr.push(0);
        let mut kept_rows = Vec::with_capacity(nrows);
        let mut w = 0;
        for r in 0..nrows {
            let (start, end) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let row_start = w;
            for k in start..end {
                if self.vals[k] > 0.0 {
                    self.col_idx[w] = self.col_idx[k];
                    self.vals[w] = self.vals[k];
                    keep_col[self.col_idx[k]] = true;
                    w += 1;
                }
            }
            if w > row_start {
                kept_rows.push(r);
                new_ptr.push(w);
            }
        }
        self.col_idx.truncate(w);
        self.vals.truncate(w);

        if kept_rows.len() != nrows {
            let mut old_rows = std::mem::take(&mut self.rows).into_iter().map(Some).collect::<Vec<_>>();
            self.rows = kept_rows
                .iter()
                .map(|&r| old_rows[r].take().unwrap())
                .collect();
        }
        self.row_ptr = new_ptr;

        if keep_col.iter().any(|k| !k) {
            let mut remap = vec![usize::MAX; self.cols.len()];
            let mut cols = Vec::new();
            for (i, col) in std::mem::take(&mut self.cols).into_iter().enumerate() {
                if keep_col[i] {
                    remap[i] = cols.len();
                    cols.push(col);
                }
            }
            for c in &mut self.col_idx {
                *c = remap[*c];
            }
            self.cols = cols;
        }
        self
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn row_keys(&self) -> &[String] {
        &self.rows
    }

    pub fn col_keys(&self) -> &[String] {
        &self.cols
    }

    /// Sum of all stored values.
    pub fn total(&self) -> f64 {
        self.vals.iter().sum()
    }

    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let r = self.rows.binary_search_by(|k| k.as_str().cmp(row)).ok()?;
        let c = self.cols.binary_search_by(|k| k.as_str().cmp(col)).ok()?;
        let (idx, vals) = self.row_slice(r);
        idx.binary_search(&c).ok().map(|k| vals[k])
    }

    /// Column indices and values stored in row `r`.
    pub fn row_slice(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[range.clone()], &self.vals[range])
    }

    /// Iterates entries in `(row, col)` order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        (0..self.rows.len()).flat_map(move |r| {
            let (idx, vals) = self.row_slice(r);
            idx.iter()
                .zip(vals)
                .map(move |(&c, &v)| (self.rows[r].as_str(), self.cols[c].as_str(), v))
        })
    }

    pub fn to_triples(&self) -> Vec<Triple> {
        self.iter().map(|(r, c, v)| Triple::new(r, c, v)).collect()
    }

    /// Range of column indices whose keys start with `prefix`.
    ///
    /// Column keys are sorted, so every key sharing a prefix sits in one
    /// contiguous block.
    pub fn col_prefix_range(&self, prefix: &str) -> Range<usize> {
        let start = self.cols.partition_point(|k| k.as_str() < prefix);
        let len = self.cols[start..].partition_point(|k| k.starts_with(prefix));
        start..start + len
    }

    /// Entry-wise sum over the union of keys. Arrays with no common row or
    /// column key are concatenated.
    pub fn add(&self, other: &AssocArray) -> AssocArray {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let merged: Vec<_> = self.iter().chain(other.iter()).collect();
        Self::from_key_triples(merged)
    }

    pub fn transpose(&self) -> AssocArray {
        let ncols = self.cols.len();
        let mut ptr = vec![0usize; ncols + 1];
        for &c in &self.col_idx {
            ptr[c + 1] += 1;
        }
        for i in 0..ncols {
            ptr[i + 1] += ptr[i];
        }
        let mut next = ptr.clone();
        let mut idx = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for r in 0..self.rows.len() {
            let (cs, vs) = self.row_slice(r);
            for (&c, &v) in cs.iter().zip(vs) {
                let slot = next[c];
                idx[slot] = r;
                vals[slot] = v;
                next[c] += 1;
            }
        }
        AssocArray {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            row_ptr: ptr,
            col_idx: idx,
            vals,
        }
    }

    /// Matrix product, matching the column keys of `self` against the row
    /// keys of `other` by exact string equality.
    pub fn multiply(&self, other: &AssocArray) -> AssocArray {
        if self.is_empty() || other.is_empty() {
            return AssocArray::empty();
        }
        let inner: Vec<Option<usize>> = self
            .cols
            .iter()
            .map(|k| other.rows.binary_search(k).ok())
            .collect();

        let width = other.cols.len();
        let mut acc = vec![0.0f64; width];
        let mut touched = vec![false; width];
        let mut pattern: Vec<usize> = Vec::new();

        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.rows.len() {
            let (cs, vs) = self.row_slice(r);
            for (&c, &a) in cs.iter().zip(vs) {
                let Some(k) = inner[c] else { continue };
                let (bcs, bvs) = other.row_slice(k);
                for (&j, &b) in bcs.iter().zip(bvs) {
                    if !touched[j] {
                        touched[j] = true;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                col_idx.push(j);
                vals.push(acc[j]);
                acc[j] = 0.0;
                touched[j] = false;
            }
            pattern.clear();
            row_ptr.push(col_idx.len());
        }
        AssocArray {
            rows: self.rows.clone(),
            cols: other.cols.clone(),
            row_ptr,
            col_idx,
            vals,
        }
        .compact()
    }

    /// Single-column array holding the sum of each row, keyed by row.
    pub fn row_sums(&self) -> AssocArray {
        let sums = (0..self.rows.len())
            .map(|r| (self.rows[r].as_str(), SUM_KEY, self.row_slice(r).1.iter().sum()))
            .collect();
        Self::from_key_triples(sums)
    }

    /// Single-row array holding the sum of each column, keyed by column.
    pub fn col_sums(&self) -> AssocArray {
        let mut sums = vec![0.0; self.cols.len()];
        for (&c, &v) in self.col_idx.iter().zip(&self.vals) {
            sums[c] += v;
        }
        let triples = self
            .cols
            .iter()
            .zip(sums)
            .map(|(c, v)| (SUM_KEY, c.as_str(), v))
            .collect();
        Self::from_key_triples(triples)
    }

    /// Number of stored entries in each column, in column-key order.
    pub fn col_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.cols.len()];
        for &c in &self.col_idx {
            deg[c] += 1;
        }
        deg
    }

    /// Sub-array of the entries whose column key starts with `prefix`.
    pub fn select_by_col_prefix(&self, prefix: &str) -> AssocArray {
        let range = self.col_prefix_range(prefix);
        if range.is_empty() {
            return AssocArray::empty();
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.rows.len() {
            let (cs, vs) = self.row_slice(r);
            let lo = cs.partition_point(|&c| c < range.start);
            let hi = cs.partition_point(|&c| c < range.end);
            col_idx.extend(cs[lo..hi].iter().map(|&c| c - range.start));
            vals.extend_from_slice(&vs[lo..hi]);
            row_ptr.push(col_idx.len());
        }
        AssocArray {
            rows: self.rows.clone(),
            cols: self.cols[range].to_vec(),
            row_ptr,
            col_idx,
            vals,
        }
        .compact()
    }

    /// Keeps exactly the entries with value strictly greater than `t`.
    pub fn threshold(&self, t: f64) -> AssocArray {
        let mut out = self.clone();
        for v in &mut out.vals {
            if *v <= t {
                *v = 0.0;
            }
        }
        out.compact()
    }

    /// Checks every structural invariant of the canonical form.
    pub fn validate(&self) -> Result<(), String> {
        if self.row_ptr.len() != self.rows.len() + 1 || self.row_ptr[0] != 0 {
            return Err("row pointer length mismatch".into());
        }
        if *self.row_ptr.last().unwrap() != self.vals.len() || self.col_idx.len() != self.vals.len() {
            return Err("entry count mismatch".into());
        }
        for keys in [&self.rows, &self.cols] {
            if keys.iter().any(|k| k.is_empty()) {
                return Err("empty key".into());
            }
            if keys.windows(2).any(|w| w[0] >= w[1]) {
                return Err("keys not strictly sorted".into());
            }
        }
        let mut col_used = vec![false; self.cols.len()];
        for r in 0..self.rows.len() {
            let (cs, vs) = self.row_slice(r);
            if cs.is_empty() {
                return Err(format!("phantom row key {:?}", self.rows[r]));
            }
            if cs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("row {:?} has unsorted or duplicate columns", self.rows[r]));
            }
            for (&c, &v) in cs.iter().zip(vs) {
                if c >= self.cols.len() {
                    return Err("column index out of range".into());
                }
                if !v.is_finite() || v <= 0.0 {
                    return Err(format!("non-positive value {v}"));
                }
                col_used[c] = true;
            }
        }
        if let Some(c) = col_used.iter().position(|u| !u) {
            return Err(format!("phantom column key {:?}", self.cols[c]));
        }
        Ok(())
    }
}

//! Brute-force oracles shared by the integration suites. None of these go
//! through `AssocArray` operations other than construction and iteration.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use dda_core::{AssocArray, Triple};
use proptest::prelude::*;

pub type Dense = BTreeMap<(String, String), f64>;

pub fn dense(a: &AssocArray) -> Dense {
    a.iter().map(|(r, c, v)| ((r.to_owned(), c.to_owned()), v)).collect()
}

pub fn dense_from_triples(triples: &[Triple]) -> Dense {
    let mut out = Dense::new();
    for t in triples {
        *out.entry((t.row.clone(), t.col.clone())).or_default() += t.val;
    }
    out.retain(|_, v| *v > 0.0);
    out
}

pub fn dense_add(a: &Dense, b: &Dense) -> Dense {
    let mut out = a.clone();
    for (k, v) in b {
        *out.entry(k.clone()).or_default() += v;
    }
    out
}

/// Textbook triple loop over every (row, inner key, col) combination.
pub fn dense_multiply(a: &Dense, b: &Dense) -> Dense {
    let rows: BTreeSet<&String> = a.keys().map(|k| &k.0).collect();
    let inner: BTreeSet<&String> = a.keys().map(|k| &k.1).collect();
    let cols: BTreeSet<&String> = b.keys().map(|k| &k.1).collect();
    let mut out = Dense::new();
    for r in &rows {
        for c in &cols {
            let mut sum = 0.0;
            for k in &inner {
                let av = a.get(&((*r).clone(), (*k).clone())).copied().unwrap_or(0.0);
                let bv = b.get(&((*k).clone(), (*c).clone())).copied().unwrap_or(0.0);
                sum += av * bv;
            }
            if sum != 0.0 {
                out.insert(((*r).clone(), (*c).clone()), sum);
            }
        }
    }
    out
}

pub fn dense_transpose(a: &Dense) -> Dense {
    a.iter().map(|((r, c), v)| ((c.clone(), r.clone()), *v)).collect()
}

/// Random triples over `rows × cols` keys with small integer values, so all
/// sums and products are exact in `f64`.
pub fn triples_strategy(rows: usize, cols: usize, max_len: usize) -> impl Strategy<Value = Vec<Triple>> {
    prop::collection::vec((0..rows, 0..cols, 1u32..5), 0..max_len).prop_map(|v| {
        v.into_iter()
            .map(|(r, c, x)| Triple::new(format!("r{r:02}"), format!("c{c:02}"), x as f64))
            .collect()
    })
}

pub fn array(triples: &[Triple]) -> AssocArray {
    AssocArray::from_triples(triples).unwrap()
}

/// Per-entity `(N_i, M_i, V_i)` counted with hash sets straight from triples.
pub fn entity_counts(triples: &[Triple], entity: &str, sep: &str) -> (u64, u64, u64) {
    let prefix = format!("{entity}{sep}");
    let mut rows = HashSet::new();
    let mut cols = HashSet::new();
    let mut pairs = HashSet::new();
    for t in triples.iter().filter(|t| t.col.starts_with(&prefix)) {
        rows.insert(t.row.as_str());
        cols.insert(t.col.as_str());
        pairs.insert((t.row.as_str(), t.col.as_str()));
    }
    (rows.len() as u64, cols.len() as u64, pairs.len() as u64)
}

/// Column totals by scanning triples.
pub fn col_totals(a: &AssocArray) -> HashMap<String, f64> {
    let mut out = HashMap::new();
    for (_, c, v) in a.iter() {
        *out.entry(c.to_owned()).or_default() += v;
    }
    out
}

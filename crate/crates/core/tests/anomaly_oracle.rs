mod common;

use std::collections::{BTreeMap, HashMap};

use common::*;
use dda_core::anomaly::{correlate_entities, identity_deviations, popular_values, vestigial_summary, FindingKind, KeyRef};
use dda_core::{AssocArray, Triple};
use proptest::prelude::*;

/// Two-entity store: rows pick 0..3 user values and 0..3 job values.
fn store_strategy() -> impl Strategy<Value = AssocArray> {
    let row = (
        prop::collection::vec(0u8..6, 0..3),
        prop::collection::vec(0u8..4, 0..3),
    );
    prop::collection::vec(row, 0..40).prop_map(|rows| {
        let mut t = Vec::new();
        for (i, (users, jobs)) in rows.iter().enumerate() {
            for u in users {
                t.push(Triple::new(format!("row|{i:03}"), format!("user|u{u}"), 1.0));
            }
            for j in jobs {
                t.push(Triple::new(format!("row|{i:03}"), format!("job|j{j}"), 1.0));
            }
        }
        // Presence semantics: collapse repeats back to 1.
        let a = AssocArray::from_triples(&t).unwrap();
        let ones: Vec<Triple> = a.iter().map(|(r, c, _)| Triple::new(r, c, 1.0)).collect();
        AssocArray::from_triples(&ones).unwrap()
    })
}

fn row_sets(a: &AssocArray) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (r, c, _) in a.iter() {
        out.entry(r.to_owned()).or_default().push(c.to_owned());
    }
    out
}

#[test]
fn user_listing_fixture() {
    let popular = [("verkehr_bw", 300), ("SFBayRoadAlerts", 258), ("akhbarhurra", 177), ("attir_midzi", 159)];
    let mut t = Vec::new();
    let mut row = 0;
    let mut push = |name: String, n: usize, t: &mut Vec<Triple>| {
        for _ in 0..n {
            row += 1;
            t.push(Triple::new(format!("row|{row:010}"), format!("user|{name}"), 1.0));
        }
    };
    for (name, n) in popular {
        push(name.to_owned(), n, &mut t);
    }
    for i in 0..100 {
        push(format!("quiet{i}"), 1 + (i * 37) % 150, &mut t);
    }
    let users = AssocArray::from_triples(&t).unwrap();
    let found = popular_values("user", &users, 150.0);
    let got: Vec<(String, f64)> = found.iter().map(|f| (f.subject.to_string(), f.count)).collect();
    let want: Vec<(String, f64)> = popular.iter().map(|(n, c)| (format!("user|{n}"), *c as f64)).collect();
    assert_eq!(got, want);
}

#[test]
fn job_name_listing_counts() {
    let jobs = [("rolling_pipeline.sh", 2762791.0), ("run_blast.sh", 1256422.0), ("run_blast_parser.sh", 1162522.0), ("small.sh", 999999.0)];
    // Column sums only depend on totals, so one weighted entry per job stands
    // in for millions of rows.
    let t: Vec<Triple> = jobs.iter().map(|(n, c)| Triple::new("row|1", format!("job_name|{n}"), *c)).collect();
    let a = AssocArray::from_triples(&t).unwrap();
    let found = popular_values("job_name", &a, 1_000_000.0);
    assert_eq!(found.len(), 3);
    assert_eq!(found[0].subject, KeyRef::One("job_name|rolling_pipeline.sh".into()));
    assert_eq!(found[0].count, 2762791.0);
}

#[test]
fn vestigial_default_department() {
    let t: Vec<Triple> = (0..250).map(|i| Triple::new(format!("row|{i:04}"), "department|default", 1.0)).collect();
    let a = AssocArray::from_triples(&t).unwrap();
    let found = vestigial_summary("department", &a);
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].count, 250.0);
    assert_eq!(found[0].kind, FindingKind::VestigialValue);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn popular_values_equal_full_scan(store in store_strategy(), min in 1u32..5) {
        let users = store.select_by_col_prefix("user|");
        let found = popular_values("user", &users, min as f64);
        let mut counts: HashMap<&str, f64> = HashMap::new();
        for (_, c, v) in store.iter().filter(|e| e.1.starts_with("user|")) {
            *counts.entry(c).or_default() += v;
        }
        let mut expect: Vec<(String, f64)> = counts.into_iter().filter(|(_, v)| *v > min as f64).map(|(k, v)| (k.to_owned(), v)).collect();
        expect.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let got: Vec<(String, f64)> = found.iter().map(|f| (f.subject.to_string(), f.count)).collect();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn identity_deviations_empty_iff_one_to_one(store in store_strategy()) {
        let users = store.select_by_col_prefix("user|");
        let found = identity_deviations("user", &users);
        let rows = row_sets(&users);
        let mut col_deg: HashMap<String, usize> = HashMap::new();
        for cols in rows.values() {
            for c in cols {
                *col_deg.entry(c.clone()).or_default() += 1;
            }
        }
        let one_to_one = rows.values().all(|c| c.len() <= 1) && col_deg.values().all(|&d| d <= 1);
        prop_assert_eq!(found.is_empty(), one_to_one);

        let dup: usize = col_deg.values().filter(|&&d| d > 1).count();
        let multi: usize = rows.values().filter(|c| c.len() > 1).count();
        prop_assert_eq!(found.iter().filter(|f| f.kind == FindingKind::DuplicateValueAcrossRows).count(), dup);
        prop_assert_eq!(found.iter().filter(|f| f.kind == FindingKind::MultiValuedRow).count(), multi);
        for f in &found {
            let expect = match (&f.kind, &f.subject) {
                (FindingKind::DuplicateValueAcrossRows, KeyRef::One(k)) => col_deg[k],
                (FindingKind::MultiValuedRow, KeyRef::One(k)) => rows[k].len(),
                _ => unreachable!(),
            };
            prop_assert_eq!(f.count, expect as f64);
        }
    }

    #[test]
    fn correlation_counts_equal_row_scan(store in store_strategy(), min in 0u32..3) {
        let users = store.select_by_col_prefix("user|");
        let jobs = store.select_by_col_prefix("job|");
        let found = correlate_entities("user", &users, "job", &jobs, min as f64);
        let mut expect: HashMap<(String, String), usize> = HashMap::new();
        for cols in row_sets(&store).values() {
            for u in cols.iter().filter(|c| c.starts_with("user|")) {
                for j in cols.iter().filter(|c| c.starts_with("job|")) {
                    *expect.entry((u.clone(), j.clone())).or_default() += 1;
                }
            }
        }
        expect.retain(|_, n| *n as f64 > min as f64);
        prop_assert_eq!(found.len(), expect.len());
        for f in &found {
            let KeyRef::Pair(u, j) = &f.subject else { unreachable!() };
            prop_assert_eq!(f.count, expect[&(u.clone(), j.clone())] as f64);
        }

        // Swapping the operands mirrors every pair.
        let swapped = correlate_entities("job", &jobs, "user", &users, min as f64);
        let mirrored: HashMap<(String, String), f64> = swapped.iter().map(|f| {
            let KeyRef::Pair(j, u) = &f.subject else { unreachable!() };
            ((u.clone(), j.clone()), f.count)
        }).collect();
        let direct: HashMap<(String, String), f64> = found.iter().map(|f| {
            let KeyRef::Pair(u, j) = &f.subject else { unreachable!() };
            ((u.clone(), j.clone()), f.count)
        }).collect();
        prop_assert_eq!(direct, mirrored);
    }

    #[test]
    fn census_sums_to_entry_count(store in store_strategy()) {
        let users = store.select_by_col_prefix("user|");
        let found = vestigial_summary("user", &users);
        let total: f64 = found.iter().map(|f| f.count).sum();
        prop_assert_eq!(total, users.nnz() as f64);
        prop_assert_eq!(found.len(), users.ncols());
        let totals = col_totals(&users);
        for f in &found {
            prop_assert_eq!(f.count, totals[&f.subject.to_string()]);
        }
    }
}

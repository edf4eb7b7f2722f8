//! Brute-force oracles for the matrix and entropy pipeline: survivor counts
//! recomputed by direct scans that share no code with the queried paths.

use std::collections::BTreeSet;

use mutent::entropy::{entropy_curve, entropy_loss, LogBase};
use mutent::matrix::{CellStatus, KillMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

/// Survivors of a prefix by raw row scan over the status table.
fn scan_survivors(rows: &[(String, Vec<CellStatus>)], prefix: usize) -> (u64, u64) {
    let mut confirmed = 0;
    let mut uncertain = 0;
    for (_, statuses) in rows {
        let window = &statuses[..prefix];
        if window.contains(&CellStatus::Fail) {
            continue;
        }
        if window.contains(&CellStatus::Timeout) {
            uncertain += 1;
        } else {
            confirmed += 1;
        }
    }
    (confirmed, confirmed + uncertain)
}

fn build(rows: &[(String, Vec<CellStatus>)], tests: &[String]) -> KillMatrix {
    let mut matrix = KillMatrix::new(
        tests.to_vec(),
        rows.iter().map(|(id, _)| id.clone()).collect(),
    );
    for (id, statuses) in rows {
        for (t, s) in tests.iter().zip(statuses) {
            matrix.set_cell(id, t, *s).unwrap();
        }
    }
    matrix
}

#[test]
fn synthetic_matrix_curve_equals_direct_scan() {
    // the 4-test, 10-mutant synthetic case, with timeouts in the mix
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let tests: Vec<String> = (0..4).map(|i| format!("t{i}")).collect();
    let rows: Vec<(String, Vec<CellStatus>)> = (0..10)
        .map(|i| {
            let statuses = (0..4)
                .map(|_| match rng.random_range(0..10) {
                    0..=5 => CellStatus::Pass,
                    6..=8 => CellStatus::Fail,
                    _ => CellStatus::Timeout,
                })
                .collect();
            (format!("m{i}"), statuses)
        })
        .collect();
    let matrix = build(&rows, &tests);
    let curve = entropy_curve(&matrix, &tests, LogBase::E).unwrap();
    for point in &curve.points {
        let (w_lower, w_upper) = scan_survivors(&rows, point.index);
        assert_eq!(point.w_lower, w_lower, "prefix {}", point.index);
        assert_eq!(point.w_upper, w_upper, "prefix {}", point.index);
        match point.s_point {
            Some(s) => assert!((s - (w_lower as f64).ln()).abs() <= TOL),
            None => assert_eq!(w_lower, 0),
        }
    }
}

#[test]
fn unique_kills_equal_direct_scan_and_stay_disjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let m = rng.random_range(1..=8usize);
        let n = rng.random_range(1..=40usize);
        let tests: Vec<String> = (0..m).map(|i| format!("t{i}")).collect();
        let rows: Vec<(String, Vec<CellStatus>)> = (0..n)
            .map(|i| {
                let statuses = (0..m)
                    .map(|_| {
                        if rng.random::<f64>() < 0.25 {
                            CellStatus::Fail
                        } else {
                            CellStatus::Pass
                        }
                    })
                    .collect();
                (format!("m{i}"), statuses)
            })
            .collect();
        let matrix = build(&rows, &tests);

        let mut all_unique: Vec<BTreeSet<String>> = Vec::new();
        for (ti, t) in tests.iter().enumerate() {
            let got = matrix.uniquely_killed(t).unwrap();
            let want: BTreeSet<String> = rows
                .iter()
                .filter(|(_, st)| {
                    st[ti] == CellStatus::Fail
                        && st.iter()
                            .enumerate()
                            .all(|(j, s)| j == ti || *s == CellStatus::Pass)
                })
                .map(|(id, _)| id.clone())
                .collect();
            assert_eq!(got, want);

            let alone = matrix.killed_alone(t).unwrap();
            let alone_want: BTreeSet<String> = rows
                .iter()
                .filter(|(_, st)| st[ti] == CellStatus::Fail)
                .map(|(id, _)| id.clone())
                .collect();
            assert_eq!(alone, alone_want);
            assert!(got.is_subset(&alone));
            all_unique.push(got);
        }
        for (i, a) in all_unique.iter().enumerate() {
            for b in &all_unique[i + 1..] {
                assert!(a.is_disjoint(b), "K sets overlap");
            }
        }
    }
}

#[test]
fn partition_killed_confirmed_uncertain_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let m = rng.random_range(1..=6usize);
        let n = rng.random_range(1..=30usize);
        let tests: Vec<String> = (0..m).map(|i| format!("t{i}")).collect();
        let rows: Vec<(String, Vec<CellStatus>)> = (0..n)
            .map(|i| {
                let statuses = (0..m)
                    .map(|_| match rng.random_range(0..6) {
                        0..=3 => CellStatus::Pass,
                        4 => CellStatus::Fail,
                        _ => CellStatus::Timeout,
                    })
                    .collect();
                (format!("m{i}"), statuses)
            })
            .collect();
        let matrix = build(&rows, &tests);
        let survivors = matrix.survivors(&tests).unwrap();
        let killed = n - survivors.confirmed.len() - survivors.uncertain.len();
        let scan_killed = rows
            .iter()
            .filter(|(_, st)| st.contains(&CellStatus::Fail))
            .count();
        assert_eq!(killed, scan_killed);
        assert!(survivors.confirmed.is_disjoint(&survivors.uncertain));
    }
}

#[test]
fn curve_endpoint_equals_entropy_upper_bound_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let tests: Vec<String> = (0..5).map(|i| format!("t{i}")).collect();
    let rows: Vec<(String, Vec<CellStatus>)> = (0..40)
        .map(|i| {
            let statuses = (0..5)
                .map(|_| {
                    if rng.random::<f64>() < 0.2 {
                        CellStatus::Fail
                    } else {
                        CellStatus::Pass
                    }
                })
                .collect();
            (format!("m{i}"), statuses)
        })
        .collect();
    let matrix = build(&rows, &tests);
    let curve = entropy_curve(&matrix, &tests, LogBase::E).unwrap();
    let endpoint = curve.points.last().unwrap();
    let survivors = matrix.survivors(&tests).unwrap();
    assert_eq!(endpoint.w_lower, survivors.w_lower());
    if survivors.w_lower() >= 1 {
        let direct = mutent::entropy::entropy_upper_bound(survivors.w_lower(), LogBase::E)
            .unwrap()
            .value;
        // bitwise equality: same count, same log call
        assert_eq!(endpoint.s_point.unwrap(), direct);
    }
}

#[test]
fn telescoping_matches_total_loss_exactly() {
    let counts = [463u64, 300, 211, 211, 97, 41, 8, 3, 1];
    let stepwise: f64 = counts
        .windows(2)
        .map(|w| entropy_loss(w[0], w[1], LogBase::E).unwrap().value)
        .sum();
    let total = entropy_loss(counts[0], *counts.last().unwrap(), LogBase::E)
        .unwrap()
        .value;
    assert!((stepwise - total).abs() <= TOL);
}

//! Fixture-level oracles: independent site counting, the frozen audit
//! table, harness behavior on hand-patched sources, and CLI contracts that
//! don't need a full session run.

mod common;

use std::collections::BTreeSet;

use common::*;
use mutent::mutagen::{enumerate_mutations, OperatorRegistry, SourceUnit};

/// Strip `#` comments, then count operator sites with regexes that know
/// nothing about the lexer: word-boundary `and|or|true|false`, standalone
/// digit runs, exact relational/arithmetic operator tokens.
fn regex_site_expectations(src: &str) -> usize {
    let decommented: String = src
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n");
    let word = regex::Regex::new(r"\b(and|or|true|false)\b").unwrap();
    let number = regex::Regex::new(r"\b\d+\b").unwrap();
    let op = regex::Regex::new(r"(<=|>=|==|!=|[+*/<>-])").unwrap();

    let mut mutations = 0usize;
    mutations += word.find_iter(&decommented).count(); // one swap/flip each
    for m in number.find_iter(&decommented) {
        let value: u128 = m.as_str().parse().unwrap();
        mutations += if value == 0 { 1 } else { 2 }; // increment (+ zero unless self-map)
    }
    // relational and arithmetic single swaps; `-` that begins a number or
    // follows an operator would be unary (none in the fixture source)
    for m in op.find_iter(&decommented) {
        match m.as_str() {
            "<" | "<=" | ">" | ">=" | "==" | "!=" | "+" | "-" | "*" | "/" => mutations += 1,
            _ => {}
        }
    }
    mutations
}

#[test]
fn site_count_matches_regex_oracle_and_frozen_value() {
    let src = std::fs::read_to_string(fixture_dir().join(SRC_UNIT)).unwrap();
    let unit = SourceUnit::new(SRC_UNIT, src.clone(), "toy");
    let enumerated =
        enumerate_mutations(&unit, &OperatorRegistry::default_registry()).unwrap();
    let by_oracle = regex_site_expectations(&src);
    assert_eq!(enumerated.len(), by_oracle, "engine vs regex oracle");
    // frozen when the fixture was written; a drift means the fixture or the
    // operator set changed and the audit table must be regenerated
    assert_eq!(enumerated.len(), 41);
}

#[test]
fn discovery_lists_the_eight_declared_tests() {
    let tests_file = fixture_dir().join(TESTS_UNIT);
    let out = mutent_ok(&["toy", "discover", "--tests", tests_file.to_str().unwrap()]);
    let ids: Vec<&str> = out.lines().collect();
    assert_eq!(
        ids,
        vec![
            "t_equilateral",
            "t_isosceles",
            "t_scalene",
            "t_degenerate",
            "t_order",
            "t_perimeter_scale",
            "t_interface",
            "t_gauss"
        ]
    );
}

#[test]
fn selector_soundness_single_include_runs_one_test() {
    let scratch = tempfile::tempdir().unwrap();
    copy_fixture(scratch.path());
    let out = mutent_ok(&[
        "toy",
        "test",
        "--src",
        scratch.path().join(SRC_UNIT).to_str().unwrap(),
        "--tests",
        scratch.path().join(TESTS_UNIT).to_str().unwrap(),
        "--only",
        "t_order",
    ]);
    let result_lines: Vec<&str> = out
        .lines()
        .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
        .collect();
    assert_eq!(result_lines, vec!["PASS t_order"]);
}

/// Patch the loop guard by hand: `i < n` → `i <= n` makes only the loop
/// test fail, everything else keeps passing.
#[test]
fn boundary_mutant_fails_exactly_the_loop_test() {
    let scratch = tempfile::tempdir().unwrap();
    copy_fixture(scratch.path());
    let src_path = scratch.path().join(SRC_UNIT);
    let src = std::fs::read_to_string(&src_path).unwrap();
    let patched = src.replace("while i < n", "while i <= n");
    assert_ne!(src, patched);
    std::fs::write(&src_path, patched).unwrap();

    let out = mutent(&[
        "toy",
        "test",
        "--src",
        src_path.to_str().unwrap(),
        "--tests",
        scratch.path().join(TESTS_UNIT).to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for line in stdout.lines() {
        if line.contains("t_gauss") {
            assert!(line.starts_with("FAIL"), "{line}");
        } else if line.starts_with("PASS") || line.starts_with("FAIL") {
            assert!(line.starts_with("PASS"), "{line}");
        }
    }
}

#[test]
fn unknown_selector_is_a_usage_error_not_a_kill() {
    let scratch = tempfile::tempdir().unwrap();
    copy_fixture(scratch.path());
    let out = mutent(&[
        "toy",
        "test",
        "--src",
        scratch.path().join(SRC_UNIT).to_str().unwrap(),
        "--tests",
        scratch.path().join(TESTS_UNIT).to_str().unwrap(),
        "--only",
        "t_ghost",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

/// Regenerates fixtures/toyproj/audit_expected.json from the in-process
/// oracle. Run explicitly after changing the fixture or the operator set:
/// `REGEN_AUDIT=1 cargo test -p mutent-cli --test fixture_oracle -- --ignored regen`
#[test]
#[ignore]
fn regen_audit_table() {
    if std::env::var("REGEN_AUDIT").is_err() {
        eprintln!("set REGEN_AUDIT=1 to rewrite the frozen table");
        return;
    }
    let mutants = fixture_mutants();
    let (tests, cells) = audit_cells(&mutants);
    let mut killed = 0usize;
    let mut timeouts = 0usize;
    let mut survivors: Vec<String> = Vec::new();
    for (id, row) in &cells {
        let statuses: Vec<&str> = tests.iter().map(|t| row[t].as_str()).collect();
        if statuses.contains(&"fail") {
            killed += 1;
        } else if statuses.contains(&"timeout") {
            timeouts += 1;
        } else {
            survivors.push(id.clone());
        }
    }
    let doc = serde_json::json!({
        "settings": {"order": FIXTURE_ORDER, "cap": FIXTURE_CAP, "seed": FIXTURE_SEED},
        "tests": tests,
        "cells": cells,
        "score": {"total": mutants.len(), "killed": killed, "timeout_unresolved": timeouts},
        "survivors": survivors,
    });
    std::fs::write(
        audit_path(),
        serde_json::to_string_pretty(&doc).unwrap() + "\n",
    )
    .unwrap();
    eprintln!(
        "wrote {} ({} mutants, {} killed, {} timeouts)",
        audit_path().display(),
        mutants.len(),
        killed,
        timeouts
    );
}

/// The frozen table must stay reproducible from the in-process oracle.
#[test]
fn frozen_audit_table_matches_oracle_recomputation() {
    let frozen: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(audit_path()).unwrap()).unwrap();
    let mutants = fixture_mutants();
    let (tests, cells) = audit_cells(&mutants);

    let frozen_tests: Vec<String> = frozen["tests"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_str().unwrap().to_string())
        .collect();
    assert_eq!(tests, frozen_tests);

    let frozen_cells = frozen["cells"].as_object().unwrap();
    assert_eq!(cells.len(), frozen_cells.len());
    for (mutant_id, row) in &cells {
        let frozen_row = frozen_cells[mutant_id].as_object().unwrap();
        for (test_id, status) in row {
            assert_eq!(
                frozen_row[test_id].as_str().unwrap(),
                status,
                "cell ({mutant_id}, {test_id})"
            );
        }
    }

    let survivors: BTreeSet<String> = frozen["survivors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().to_string())
        .collect();
    assert_eq!(survivors.len(), 7);
    assert_eq!(frozen["score"]["total"], 41);
    assert_eq!(frozen["score"]["killed"], 32);
    assert_eq!(frozen["score"]["timeout_unresolved"], 2);
}

/// Coverage import enables the contrast table, which reproduces the shape
/// the weights are for: tests with comparable coverage and wildly different
/// unique-kill power.
#[test]
fn coverage_contrast_structural_analogue() {
    let scratch = tempfile::tempdir().unwrap();
    copy_fixture(scratch.path());
    let db = scratch.path().join("session.db");
    mutent_ok(&[
        "run",
        "--project",
        scratch.path().to_str().unwrap(),
        "--db",
        db.to_str().unwrap(),
        "--jobs",
        "4",
    ]);
    let cov = mutent_ok(&[
        "toy",
        "cover",
        "--src",
        scratch.path().join(SRC_UNIT).to_str().unwrap(),
        "--tests",
        scratch.path().join(TESTS_UNIT).to_str().unwrap(),
    ]);
    let cov_file = scratch.path().join("coverage.json");
    std::fs::write(&cov_file, cov).unwrap();
    mutent_ok(&[
        "import",
        "--file",
        cov_file.to_str().unwrap(),
        "--db",
        db.to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&mutent_ok(&["metrics", "--db", db.to_str().unwrap()])).unwrap();
    let rows = report["coverage_contrast"].as_array().unwrap();
    let get = |id: &str| {
        rows.iter()
            .find(|r| r["test_id"] == id)
            .unwrap_or_else(|| panic!("row for {id}"))
    };
    // a zero-weight test whose coverage is at least that of some
    // positive-weight test, flagged by the contrast report
    let interface = get("t_interface");
    assert_eq!(interface["alpha"], 0.0);
    assert_eq!(interface["flagged"], true);
    let isosceles = get("t_isosceles");
    assert!(isosceles["alpha"].as_f64().unwrap() > 0.2);
    assert!(
        interface["coverage"].as_f64().unwrap() >= isosceles["coverage"].as_f64().unwrap(),
        "the redundant test covers as much as a top-weight test"
    );
    // and the loop test: modest coverage, top-tier weight
    let gauss = get("t_gauss");
    assert!(gauss["alpha"].as_f64().unwrap() > 0.2);
}

#[test]
fn exit_codes_contract() {
    // usage error
    let out = mutent(&["curve"]);
    assert_eq!(out.status.code(), Some(1));
    // incomplete data: asking for metrics without a store
    let scratch = tempfile::tempdir().unwrap();
    copy_fixture(scratch.path());
    let db = scratch.path().join("fresh.db");
    let export = mutent(&["metrics", "--db", db.to_str().unwrap()]);
    assert_eq!(export.status.code(), Some(2)); // no such store yet
    // fingerprint failure: run, then edit the tree, then rerun
    mutent_ok(&[
        "run",
        "--project",
        scratch.path().to_str().unwrap(),
        "--db",
        db.to_str().unwrap(),
        "--jobs",
        "4",
    ]);
    std::fs::write(
        scratch.path().join(SRC_UNIT),
        std::fs::read_to_string(scratch.path().join(SRC_UNIT)).unwrap() + "\n# touched\n",
    )
    .unwrap();
    let out = mutent(&[
        "run",
        "--project",
        scratch.path().to_str().unwrap(),
        "--db",
        db.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn analysis_works_from_document_without_project() {
    let scratch = tempfile::tempdir().unwrap();
    copy_fixture(scratch.path());
    let db = scratch.path().join("session.db");
    mutent_ok(&[
        "run",
        "--project",
        scratch.path().to_str().unwrap(),
        "--db",
        db.to_str().unwrap(),
        "--jobs",
        "4",
    ]);
    let export_file = scratch.path().join("export.json");
    mutent_ok(&[
        "export",
        "--db",
        db.to_str().unwrap(),
        "--out",
        export_file.to_str().unwrap(),
    ]);
    // move the document away from any project tree
    let elsewhere = tempfile::tempdir().unwrap();
    let doc_path = elsewhere.path().join("doc.json");
    std::fs::copy(&export_file, &doc_path).unwrap();

    let report = mutent_ok(&["metrics", "--from", doc_path.to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["mutation_score"]["total"], 41);
    let curve = mutent_ok(&["curve", "--from", doc_path.to_str().unwrap()]);
    assert!(curve.starts_with("i,w_lower,w_upper"));

    // import → export round-trips byte-identically
    let imported_db = elsewhere.path().join("imported.db");
    mutent_ok(&[
        "import",
        "--file",
        doc_path.to_str().unwrap(),
        "--db",
        imported_db.to_str().unwrap(),
    ]);
    let reexport = mutent_ok(&["export", "--db", imported_db.to_str().unwrap()]);
    let original = std::fs::read_to_string(&export_file).unwrap();
    assert_eq!(reexport.trim_end(), original.trim_end());
}

#[test]
fn metrics_determinism_two_invocations_identical_bytes() {
    let scratch = tempfile::tempdir().unwrap();
    copy_fixture(scratch.path());
    let db = scratch.path().join("session.db");
    mutent_ok(&[
        "run",
        "--project",
        scratch.path().to_str().unwrap(),
        "--db",
        db.to_str().unwrap(),
        "--jobs",
        "4",
    ]);
    let a = mutent_ok(&["metrics", "--db", db.to_str().unwrap()]);
    let b = mutent_ok(&["metrics", "--db", db.to_str().unwrap()]);
    assert_eq!(a, b);
    // rerun after completion executes nothing and changes nothing
    let rerun = mutent_ok(&[
        "run",
        "--project",
        scratch.path().to_str().unwrap(),
        "--db",
        db.to_str().unwrap(),
    ]);
    assert!(rerun.contains("nothing pending"));
    let c = mutent_ok(&["metrics", "--db", db.to_str().unwrap()]);
    assert_eq!(a, c);
}

#[test]
fn flag_overrides_config_file_cap() {
    let scratch = tempfile::tempdir().unwrap();
    copy_fixture(scratch.path());
    let db = scratch.path().join("capped.db");
    mutent_ok(&[
        "run",
        "--project",
        scratch.path().to_str().unwrap(),
        "--db",
        db.to_str().unwrap(),
        "--cap",
        "10",
        "--jobs",
        "4",
    ]);
    let export: serde_json::Value =
        serde_json::from_str(&mutent_ok(&["export", "--db", db.to_str().unwrap()])).unwrap();
    assert_eq!(export["mutants"].as_array().unwrap().len(), 10);
}

#[test]
fn broken_baseline_exits_with_code_3() {
    let scratch = tempfile::tempdir().unwrap();
    copy_fixture(scratch.path());
    let tests_path = scratch.path().join(TESTS_UNIT);
    let tests = std::fs::read_to_string(&tests_path).unwrap();
    std::fs::write(
        &tests_path,
        tests + "\ntest t_broken {\n    assert 1 == 2\n}\n",
    )
    .unwrap();
    let out = mutent(&[
        "run",
        "--project",
        scratch.path().to_str().unwrap(),
        "--db",
        scratch.path().join("broken.db").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("t_broken"), "{stderr}");
}

#[test]
fn incomplete_matrix_exits_with_code_2_and_pending_count() {
    // an imported document with a hole in the matrix
    let scratch = tempfile::tempdir().unwrap();
    let doc = serde_json::json!({
        "schema_version": 1,
        "provenance": {"tool": "other-tool", "version": "0"},
        "tests": [{"id": "t1"}, {"id": "t2"}],
        "mutants": [{"id": "m1", "order": 1, "mutations": []}],
        "outcomes": [{"mutant_id": "m1", "test_id": "t1", "status": "pass"}],
    });
    let doc_path = scratch.path().join("partial.json");
    std::fs::write(&doc_path, doc.to_string()).unwrap();
    let out = mutent(&["metrics", "--from", doc_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("1 pending"), "{stderr}");
}

#[test]
fn custom_operator_registry_restricts_mutants() {
    let scratch = tempfile::tempdir().unwrap();
    copy_fixture(scratch.path());
    let registry = serde_json::json!({
        "language_tags": {"toy": "grammar"},
        "operators": [
            {"name": "rel-only", "pattern_class": "relational-op",
             "rule": {"kind": "table", "map": {"<": "<=", "<=": "<"}}}
        ]
    });
    let registry_path = scratch.path().join("ops.json");
    std::fs::write(&registry_path, registry.to_string()).unwrap();
    let db = scratch.path().join("rel.db");
    mutent_ok(&[
        "run",
        "--project",
        scratch.path().to_str().unwrap(),
        "--db",
        db.to_str().unwrap(),
        "--operators",
        registry_path.to_str().unwrap(),
        "--jobs",
        "4",
    ]);
    let export: serde_json::Value =
        serde_json::from_str(&mutent_ok(&["export", "--db", db.to_str().unwrap()])).unwrap();
    let mutants = export["mutants"].as_array().unwrap();
    // the fixture has 5 `<` and 3 `<=` sites
    assert_eq!(mutants.len(), 8);
    for m in mutants {
        let original = m["mutations"][0]["original_fragment"].as_str().unwrap();
        assert!(original == "<" || original == "<=");
    }
}

#[test]
fn graph_export_star_over_survivors() {
    let scratch = tempfile::tempdir().unwrap();
    copy_fixture(scratch.path());
    let db = scratch.path().join("graph.db");
    mutent_ok(&[
        "run",
        "--project",
        scratch.path().to_str().unwrap(),
        "--db",
        db.to_str().unwrap(),
        "--jobs",
        "4",
    ]);
    let edges = mutent_ok(&["graph", "--db", db.to_str().unwrap()]);
    // 7 confirmed order-1 survivors around the impl node: 7 edges, no
    // isolated nodes
    let lines: Vec<&str> = edges.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines.iter().all(|l| l.contains("impl")));
    // with the impl node dropped, the survivors fall apart into singletons
    let isolated = mutent_ok(&["graph", "--db", db.to_str().unwrap(), "--exclude-impl"]);
    let lines: Vec<&str> = isolated.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines.iter().all(|l| l.split_whitespace().count() == 1));
}

#[test]
fn lab_mu_table_respects_the_upper_bound() {
    // demo space ends with W = 16; load it, attach a skewed μ, rerun
    let base: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(demo_space_path()).unwrap()).unwrap();
    let mut config = base.clone();
    let w_final = 16usize;
    let mut mu = vec![0.5 / (w_final as f64 - 1.0); w_final];
    mu[0] = 0.5;
    config["mu"] = serde_json::json!(mu);
    let scratch = tempfile::tempdir().unwrap();
    let path = scratch.path().join("mu_space.json");
    std::fs::write(&path, config.to_string()).unwrap();
    let report: serde_json::Value = serde_json::from_str(&mutent_ok(&[
        "lab",
        "--space",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]))
    .unwrap();
    assert_eq!(report["agree"], true);
    assert_eq!(report["w_final"], 16);
    assert_eq!(report["mu_entropy"]["within_bound"], true);
    let h = report["mu_entropy"]["h"].as_f64().unwrap();
    let log_w = report["mu_entropy"]["log_w"].as_f64().unwrap();
    assert!(h > 0.0 && h < log_w);
}

#[test]
fn sigint_exits_with_code_4_and_resumes() {
    let scratch = tempfile::tempdir().unwrap();
    let project = scratch.path().join("proj-sigint");
    copy_fixture(&project);
    let db = scratch.path().join("sigint.db");
    let bin = bin_path();
    let path_env = format!(
        "{}:{}",
        bin.parent().unwrap().display(),
        std::env::var("PATH").unwrap_or_default()
    );
    let mut child = std::process::Command::new(&bin)
        .args([
            "run",
            "--project",
            project.to_str().unwrap(),
            "--db",
            db.to_str().unwrap(),
            "--jobs",
            "1",
        ])
        .env("PATH", &path_env)
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    // wait until some cells (but not all) are recorded, then interrupt
    let deadline = std::time::Instant::now() + std::time::Duration::from_secs(120);
    loop {
        std::thread::sleep(std::time::Duration::from_millis(25));
        let recorded = std::fs::read_to_string(&db)
            .map(|c| c.matches("\"t\":\"outcome\"").count())
            .unwrap_or(0);
        if recorded >= 40 {
            break;
        }
        if child.try_wait().unwrap().is_some() {
            panic!("run finished before SIGINT");
        }
        assert!(std::time::Instant::now() < deadline);
    }
    std::process::Command::new("kill")
        .args(["-INT", &child.id().to_string()])
        .status()
        .unwrap();
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(4), "SIGINT must exit with code 4");
    // and the session resumes to completion
    mutent_ok(&[
        "run",
        "--project",
        project.to_str().unwrap(),
        "--db",
        db.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    let export: serde_json::Value =
        serde_json::from_str(&mutent_ok(&["export", "--db", db.to_str().unwrap()])).unwrap();
    assert_eq!(export_cells(&export).values().map(|r| r.len()).sum::<usize>(), 328);
}

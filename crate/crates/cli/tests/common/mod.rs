#![allow(dead_code)]

//! Shared helpers for the integration and acceptance suites.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mutent::mutagen::{apply_mutant_to_texts, Mutant};
use mutent::toylang::{load_program, Interpreter, TestResult};

pub const SRC_UNIT: &str = "triangle.toy";
pub const TESTS_UNIT: &str = "triangle_tests.toy";
/// Composition settings pinned in the fixture's mutent.conf.
pub const FIXTURE_ORDER: usize = 1;
pub const FIXTURE_CAP: usize = 500;
pub const FIXTURE_SEED: u64 = 7;
/// Statement budget that separates a divergent loop from any terminating
/// fixture run (the whole suite needs well under ten thousand statements).
pub const AUDIT_FUEL: u64 = 2_000_000;

pub fn bin_path() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_mutent"))
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toyproj")
}

pub fn demo_space_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo_space.json")
}

pub fn audit_path() -> PathBuf {
    fixture_dir().join("audit_expected.json")
}

/// Copy the fixture project into a scratch dir.
pub fn copy_fixture(to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for name in [SRC_UNIT, TESTS_UNIT, "mutent.conf"] {
        std::fs::copy(fixture_dir().join(name), to.join(name)).unwrap();
    }
}

/// Run the mutent binary with the target dir on PATH (the fixture's
/// discover/run commands invoke plain `mutent`).
pub fn mutent(args: &[&str]) -> Output {
    let bin = bin_path();
    let bin_dir = bin.parent().unwrap();
    let path = format!(
        "{}:{}",
        bin_dir.display(),
        std::env::var("PATH").unwrap_or_default()
    );
    Command::new(&bin)
        .args(args)
        .env("PATH", path)
        .output()
        .expect("spawn mutent")
}

pub fn mutent_ok(args: &[&str]) -> String {
    let out = mutent(args);
    assert!(
        out.status.success(),
        "mutent {args:?} failed ({:?}):\n{}{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// The fixture's mutant set, computed through the library exactly as the
/// run command computes it.
pub fn fixture_mutants() -> Vec<Mutant> {
    let src = std::fs::read_to_string(fixture_dir().join(SRC_UNIT)).unwrap();
    let unit = mutent::mutagen::SourceUnit::new(SRC_UNIT, src, "toy");
    let registry = mutent::mutagen::OperatorRegistry::default_registry();
    let mutations = mutent::mutagen::enumerate_mutations(&unit, &registry).unwrap();
    mutent::mutagen::compose_mutants(&mutations, FIXTURE_ORDER, FIXTURE_CAP, FIXTURE_SEED)
}

/// Independent in-process execution oracle: apply the mutant to the source
/// text, reload, and interpret every test under a fuel budget. No shell, no
/// harness, no deadline clock.
pub fn audit_cells(mutants: &[Mutant]) -> (Vec<String>, BTreeMap<String, BTreeMap<String, String>>) {
    let src = std::fs::read_to_string(fixture_dir().join(SRC_UNIT)).unwrap();
    let tests_text = std::fs::read_to_string(fixture_dir().join(TESTS_UNIT)).unwrap();
    let pristine: BTreeMap<String, String> =
        BTreeMap::from([(SRC_UNIT.to_string(), src.clone())]);

    let baseline = load_program(&[(SRC_UNIT, &src), (TESTS_UNIT, &tests_text)]).unwrap();
    let test_names = baseline.test_names();

    let mut cells = BTreeMap::new();
    for mutant in mutants {
        let patched = apply_mutant_to_texts(&pristine, mutant).unwrap();
        let mut row = BTreeMap::new();
        match load_program(&[(SRC_UNIT, &patched[SRC_UNIT]), (TESTS_UNIT, &tests_text)]) {
            Err(_) => {
                // an unparsable mutant fails every test run (the process
                // runner exits nonzero before running anything)
                for name in &test_names {
                    row.insert(name.clone(), "fail".to_string());
                }
            }
            Ok(program) => {
                for name in &test_names {
                    let result = Interpreter::new(&program)
                        .with_fuel(AUDIT_FUEL)
                        .run_test(name)
                        .expect("test exists");
                    let status = match result {
                        TestResult::Pass => "pass",
                        TestResult::Fail(_) => "fail",
                        TestResult::FuelExhausted => "timeout",
                    };
                    row.insert(name.clone(), status.to_string());
                }
            }
        }
        cells.insert(mutant.id.clone(), row);
    }
    (test_names, cells)
}

/// Statuses per (mutant, test) from an exported interchange document.
pub fn export_cells(doc: &serde_json::Value) -> BTreeMap<String, BTreeMap<String, String>> {
    let mut cells: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for o in doc["outcomes"].as_array().unwrap() {
        if o.get("config").map(|c| !c.is_null()).unwrap_or(false) {
            continue; // group outcome
        }
        cells
            .entry(o["mutant_id"].as_str().unwrap().to_string())
            .or_default()
            .insert(
                o["test_id"].as_str().unwrap().to_string(),
                o["status"].as_str().unwrap().to_string(),
            );
    }
    cells
}

//! Test runner for the bundled toy language: discovery, selective
//! execution, and per-test line coverage emission.
//!
//! Exit codes follow the harness contract: 0 all selected tests passed,
//! 1 at least one failed (or the program does not parse), 2 usage problems
//! such as unknown test names.

use std::path::{Path, PathBuf};

use mutent::interchange::{
    to_canonical_json, tool_provenance, CoverageEntry, InterchangeDocument, TestEntry, UnitEntry,
    SCHEMA_VERSION,
};
use mutent::toylang::{load_program, Interpreter, LoadedProgram, TestResult};

use crate::CmdError;

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}

fn load(src: Option<&PathBuf>, tests: &PathBuf) -> Result<(LoadedProgram, Vec<String>), CmdError> {
    let mut units: Vec<(String, String)> = Vec::new();
    if let Some(src) = src {
        let text = std::fs::read_to_string(src)
            .map_err(|e| CmdError::new(2, format!("cannot read {}: {e}", src.display())))?;
        units.push((file_label(src), text));
    }
    let text = std::fs::read_to_string(tests)
        .map_err(|e| CmdError::new(2, format!("cannot read {}: {e}", tests.display())))?;
    units.push((file_label(tests), text));
    let unit_refs: Vec<(&str, &str)> = units
        .iter()
        .map(|(n, t)| (n.as_str(), t.as_str()))
        .collect();
    let names: Vec<String> = units.iter().map(|(n, _)| n.clone()).collect();
    let program = load_program(&unit_refs)
        .map_err(|e| CmdError::new(1, format!("program does not parse: {e}")))?;
    Ok((program, names))
}

pub fn discover(tests: &PathBuf) -> Result<(), CmdError> {
    let (program, _) = load(None, tests)?;
    for name in program.test_names() {
        println!("{name}");
    }
    Ok(())
}

fn split_selectors(s: &Option<String>) -> Vec<String> {
    s.as_deref()
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(String::from)
        .collect()
}

pub fn run_tests(
    src: &PathBuf,
    tests: &PathBuf,
    only: &Option<String>,
    skip: &Option<String>,
    fuel: Option<u64>,
) -> Result<(), CmdError> {
    let (program, _) = load(Some(src), tests)?;
    let declared = program.test_names();
    let only_list = split_selectors(only);
    let skip_list = split_selectors(skip);
    for name in only_list.iter().chain(skip_list.iter()) {
        if !declared.contains(name) {
            return Err(CmdError::new(2, format!("unknown test `{name}`")));
        }
    }
    let selected: Vec<&String> = declared
        .iter()
        .filter(|name| only_list.is_empty() || only_list.contains(name))
        .filter(|name| !skip_list.contains(name))
        .collect();

    let mut failed = 0usize;
    for name in selected {
        let mut interp = Interpreter::new(&program);
        if let Some(fuel) = fuel {
            interp = interp.with_fuel(fuel);
        }
        match interp.run_test(name).expect("selected test exists") {
            TestResult::Pass => println!("PASS {name}"),
            TestResult::Fail(reason) => {
                println!("FAIL {name}: {reason}");
                failed += 1;
            }
            TestResult::FuelExhausted => {
                println!("FAIL {name}: fuel exhausted");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        Err(CmdError::silent(1))
    } else {
        Ok(())
    }
}

/// Run every test with line coverage and print a coverage-only interchange
/// document, importable into an existing session.
pub fn cover(src: &PathBuf, tests: &PathBuf) -> Result<(), CmdError> {
    let (program, unit_names) = load(Some(src), tests)?;
    let src_text = std::fs::read_to_string(src)
        .map_err(|e| CmdError::new(2, format!("cannot read {}: {e}", src.display())))?;

    let mut test_entries = Vec::new();
    let mut coverage_entries = Vec::new();
    for name in program.test_names() {
        let mut interp = Interpreter::new(&program)
            .with_fuel(10_000_000)
            .with_coverage();
        let result = interp.run_test(&name).expect("test exists");
        if !matches!(result, TestResult::Pass) {
            return Err(CmdError::new(
                1,
                format!("cannot measure coverage on a failing suite: {name}"),
            ));
        }
        let covered = interp.coverage().expect("coverage enabled");
        // report coverage of the implementation unit (index 0) only
        let lines: Vec<u32> = covered
            .iter()
            .filter(|(unit, _)| *unit == 0)
            .map(|(_, line)| *line)
            .collect();
        coverage_entries.push(CoverageEntry {
            test_id: name.clone(),
            unit_path: unit_names[0].clone(),
            covered_lines: lines,
        });
        test_entries.push(TestEntry {
            id: name,
            baseline_duration: None,
        });
    }

    let doc = InterchangeDocument {
        schema_version: SCHEMA_VERSION,
        provenance: tool_provenance(None),
        tests: test_entries,
        units: vec![UnitEntry {
            path: unit_names[0].clone(),
            char_count: src_text.chars().count() as u64,
        }],
        mutants: vec![],
        outcomes: vec![],
        coverage: Some(coverage_entries),
    };
    println!("{}", to_canonical_json(&doc));
    Ok(())
}

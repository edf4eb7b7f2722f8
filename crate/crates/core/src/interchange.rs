//! Versioned JSON interchange documents.
//!
//! The document is the tool's decoupling seam: exports round-trip the matrix
//! content of a session, and results produced by any external mutation tool
//! can be imported and analyzed with no project tree or harness present.
//!
//! Exports are canonical JSON. Wall-clock fields (durations, timestamps) are
//! omitted unless explicitly requested: matrix content is deterministic,
//! clocks are not, and deterministic byte-identical exports are what make
//! resumed runs verifiable against uninterrupted ones.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon;
use crate::matrix::CellStatus;
use crate::mutagen::{Mutant, Mutation};
use crate::store::{GroupConfig, Store};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_duration: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MutantEntry {
    pub id: String,
    pub order: usize,
    pub mutations: Vec<Mutation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeEntry {
    pub mutant_id: String,
    pub test_id: String,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Present on group-mode outcomes only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<GroupConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub test_id: String,
    pub unit_path: String,
    pub covered_lines: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitEntry {
    pub path: String,
    pub char_count: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterchangeDocument {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub tests: Vec<TestEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub units: Vec<UnitEntry>,
    pub mutants: Vec<MutantEntry>,
    pub outcomes: Vec<OutcomeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<Vec<CoverageEntry>>,
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("unrecognized schema version {0}")]
    BadVersion(u32),
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
    #[error("malformed document: {0}")]
    Malformed(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExportOptions {
    pub include_durations: bool,
    /// Provenance timestamp; omitted (deterministic export) when `None`.
    pub timestamp: Option<u64>,
}


pub fn tool_provenance(timestamp: Option<u64>) -> Provenance {
    Provenance {
        tool: "mutent".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp,
    }
}

/// Build a document from a store. Outcome order is (mutant, test) sorted;
/// group outcomes follow matrix outcomes, sorted the same way.
pub fn export_document(store: &Store, opts: ExportOptions) -> InterchangeDocument {
    let tests = store
        .tests()
        .iter()
        .map(|(id, _)| TestEntry {
            id: id.clone(),
            baseline_duration: opts
                .include_durations
                .then(|| store.baselines().get(id).copied())
                .flatten(),
        })
        .collect();
    let units = store
        .units()
        .iter()
        .map(|(path, chars)| UnitEntry {
            path: path.clone(),
            char_count: *chars,
        })
        .collect();
    let mutants = store
        .mutants()
        .iter()
        .map(|m| MutantEntry {
            id: m.id.clone(),
            order: m.order,
            mutations: m.mutations.clone(),
        })
        .collect();
    let mut outcomes: Vec<OutcomeEntry> = store
        .outcomes()
        .iter()
        .map(|((mutant_id, test_id), (status, duration))| OutcomeEntry {
            mutant_id: mutant_id.clone(),
            test_id: test_id.clone(),
            status: *status,
            duration: opts.include_durations.then_some(*duration),
            config: None,
        })
        .collect();
    outcomes.extend(store.group_outcomes().iter().map(
        |((mutant_id, config, test_id), (status, duration))| OutcomeEntry {
            mutant_id: mutant_id.clone(),
            test_id: test_id.clone(),
            status: *status,
            duration: opts.include_durations.then_some(*duration),
            config: Some(*config),
        },
    ));
    let coverage: Vec<CoverageEntry> = store
        .coverage()
        .iter()
        .map(|((test_id, unit_path), lines)| CoverageEntry {
            test_id: test_id.clone(),
            unit_path: unit_path.clone(),
            covered_lines: lines.clone(),
        })
        .collect();
    InterchangeDocument {
        schema_version: SCHEMA_VERSION,
        provenance: tool_provenance(opts.timestamp),
        tests,
        units,
        mutants,
        outcomes,
        coverage: (!coverage.is_empty()).then_some(coverage),
    }
}

/// Canonical JSON bytes of a document.
pub fn to_canonical_json(doc: &InterchangeDocument) -> String {
    let value = serde_json::to_value(doc).expect("document serializes");
    canon::to_canonical_string(&value)
}

pub fn parse_document(json: &str) -> Result<InterchangeDocument, SchemaError> {
    let doc: InterchangeDocument = serde_json::from_str(json)?;
    validate(&doc)?;
    Ok(doc)
}

/// Referential-integrity validation with error locations.
pub fn validate(doc: &InterchangeDocument) -> Result<(), SchemaError> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(SchemaError::BadVersion(doc.schema_version));
    }
    let invalid = |location: String, message: String| SchemaError::Invalid { location, message };

    let mut test_ids = std::collections::BTreeSet::new();
    for (i, t) in doc.tests.iter().enumerate() {
        if !test_ids.insert(t.id.as_str()) {
            return Err(invalid(
                format!("tests[{i}].id"),
                format!("duplicate test id `{}`", t.id),
            ));
        }
    }
    let mut mutant_ids = std::collections::BTreeSet::new();
    for (i, m) in doc.mutants.iter().enumerate() {
        if !mutant_ids.insert(m.id.as_str()) {
            return Err(invalid(
                format!("mutants[{i}].id"),
                format!("duplicate mutant id `{}`", m.id),
            ));
        }
        if m.order == 0 {
            return Err(invalid(
                format!("mutants[{i}].order"),
                "order must be at least 1".to_string(),
            ));
        }
        // an empty mutation list means the producing tool did not report
        // edit details; otherwise the count must match the order
        if !m.mutations.is_empty() && m.order != m.mutations.len() {
            return Err(invalid(
                format!("mutants[{i}].order"),
                format!("order {} but {} mutations", m.order, m.mutations.len()),
            ));
        }
    }
    for (i, o) in doc.outcomes.iter().enumerate() {
        if !mutant_ids.contains(o.mutant_id.as_str()) {
            return Err(invalid(
                format!("outcomes[{i}].mutant_id"),
                format!("unknown mutant id `{}`", o.mutant_id),
            ));
        }
        if !test_ids.contains(o.test_id.as_str()) {
            return Err(invalid(
                format!("outcomes[{i}].test_id"),
                format!("unknown test id `{}`", o.test_id),
            ));
        }
        if o.status == CellStatus::Missing {
            return Err(invalid(
                format!("outcomes[{i}].status"),
                "`missing` is not a recordable status".to_string(),
            ));
        }
    }
    if let Some(coverage) = &doc.coverage {
        for (i, c) in coverage.iter().enumerate() {
            if !test_ids.contains(c.test_id.as_str()) {
                return Err(invalid(
                    format!("coverage[{i}].test_id"),
                    format!("unknown test id `{}`", c.test_id),
                ));
            }
        }
    }
    Ok(())
}

/// Write a validated document's content into a store (idempotently, so an
/// import can be re-run).
pub fn import_into_store(doc: &InterchangeDocument, store: &mut Store) -> Result<(), crate::store::StoreError> {
    for t in &doc.tests {
        store.record_test(&t.id, &t.id)?;
        if let Some(secs) = t.baseline_duration {
            store.record_baseline(&t.id, secs)?;
        }
    }
    for u in &doc.units {
        store.record_unit(&u.path, u.char_count)?;
    }
    for m in &doc.mutants {
        let mutant = Mutant {
            id: m.id.clone(),
            order: m.order,
            mutations: m.mutations.clone(),
        };
        store.record_mutant(&mutant)?;
    }
    for o in &doc.outcomes {
        match o.config {
            None => store.record_outcome(crate::store::OutcomeRecord {
                mutant_id: o.mutant_id.clone(),
                test_id: o.test_id.clone(),
                status: o.status,
                duration: o.duration.unwrap_or(0.0),
            })?,
            Some(config) => store.record_group_outcome(crate::store::GroupOutcomeRecord {
                mutant_id: o.mutant_id.clone(),
                config,
                test_id: o.test_id.clone(),
                status: o.status,
                duration: o.duration.unwrap_or(0.0),
            })?,
        }
    }
    if let Some(coverage) = &doc.coverage {
        for c in coverage {
            store.record_coverage(crate::store::CoverageRecord {
                test_id: c.test_id.clone(),
                unit_path: c.unit_path.clone(),
                covered_lines: c.covered_lines.clone(),
            })?;
        }
    }
    store.sync()
}

//! Single-file session store.
//!
//! One append-only log holds everything a session produces: tests, baseline
//! durations, source units, mutants, per-cell outcomes, group outcomes, and
//! imported coverage. Each record is one JSON line, flushed before the write
//! is acknowledged, so a hard-killed run loses at most a torn final line,
//! which reopening detects and truncates. Copying the file relocates the
//! session.
//!
//! Writes are serialized through the single `Store` value; parallel workers
//! funnel their records through one writer. A session is bound to a source
//! tree by fingerprint: reopening against a modified tree is refused.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::matrix::CellStatus;
use crate::mutagen::Mutant;

const MAGIC: &str = "mutentdb";
const FORMAT_VERSION: u32 = 1;
/// fsync cadence; every record is flushed, syncs are batched.
const SYNC_EVERY: u64 = 64;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("fingerprint mismatch: store has {stored}, tree has {actual}")]
    FingerprintMismatch { stored: String, actual: String },
    #[error("corrupt store at line {line}: {message}")]
    CorruptStore { line: usize, message: String },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    magic: String,
    version: u32,
    session_id: String,
    fingerprint: String,
    created_at: u64,
    config: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupConfig {
    Only,
    Except,
}

impl GroupConfig {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupConfig::Only => "only",
            GroupConfig::Except => "except",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub mutant_id: String,
    pub test_id: String,
    pub status: CellStatus,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupOutcomeRecord {
    pub mutant_id: String,
    pub config: GroupConfig,
    pub test_id: String,
    pub status: CellStatus,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRecord {
    pub test_id: String,
    pub unit_path: String,
    pub covered_lines: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "snake_case")]
enum Record {
    Test { id: String, selector: String },
    Baseline { id: String, secs: f64 },
    Unit { path: String, chars: u64 },
    Mutant { mutant: Mutant },
    Outcome(OutcomeRecord),
    Group(GroupOutcomeRecord),
    Coverage(CoverageRecord),
}

/// Session metadata from the header line. `updated_at` is the store file's
/// modification time; the header itself is immutable once written.
#[derive(Debug, Clone)]
pub struct SessionMeta {
    pub session_id: String,
    pub fingerprint: String,
    pub created_at: u64,
    pub updated_at: u64,
    pub config: serde_json::Value,
}

pub struct Store {
    path: PathBuf,
    writer: BufWriter<File>,
    meta: SessionMeta,
    writes_since_sync: u64,

    tests: Vec<(String, String)>,
    test_set: BTreeMap<String, String>,
    baselines: BTreeMap<String, f64>,
    units: Vec<(String, u64)>,
    mutants: Vec<Mutant>,
    mutant_ids: BTreeMap<String, usize>,
    outcomes: BTreeMap<(String, String), (CellStatus, f64)>,
    group_outcomes: BTreeMap<(String, GroupConfig, String), (CellStatus, f64)>,
    coverage: BTreeMap<(String, String), Vec<u32>>,
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn file_mtime(path: &Path) -> Option<u64> {
    std::fs::metadata(path)
        .and_then(|m| m.modified())
        .ok()
        .and_then(|t| t.duration_since(std::time::UNIX_EPOCH).ok())
        .map(|d| d.as_secs())
}

fn new_session_id(fingerprint: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(fingerprint.as_bytes());
    hasher.update(now_unix().to_le_bytes());
    hasher.update(std::process::id().to_le_bytes());
    hasher.update(
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.subsec_nanos())
            .unwrap_or(0)
            .to_le_bytes(),
    );
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

impl Store {
    /// Create a new session file or resume an existing one, refusing to
    /// resume when the tree fingerprint changed.
    pub fn open_or_create(
        path: impl Into<PathBuf>,
        fingerprint: &str,
        config: serde_json::Value,
    ) -> Result<Store, StoreError> {
        let path = path.into();
        if path.exists() {
            let store = Store::open(&path)?;
            if store.meta.fingerprint != fingerprint {
                return Err(StoreError::FingerprintMismatch {
                    stored: store.meta.fingerprint.clone(),
                    actual: fingerprint.to_string(),
                });
            }
            Ok(store)
        } else {
            Store::create(path, fingerprint, config)
        }
    }

    pub fn create(
        path: impl Into<PathBuf>,
        fingerprint: &str,
        config: serde_json::Value,
    ) -> Result<Store, StoreError> {
        let path = path.into();
        let header = Header {
            magic: MAGIC.to_string(),
            version: FORMAT_VERSION,
            session_id: new_session_id(fingerprint),
            fingerprint: fingerprint.to_string(),
            created_at: now_unix(),
            config,
        };
        let file = OpenOptions::new()
            .create_new(true)
            .write(true)
            .open(&path)?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer(&mut writer, &header)
            .map_err(|e| StoreError::Integrity(e.to_string()))?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        writer.get_ref().sync_data()?;
        let meta = SessionMeta {
            session_id: header.session_id,
            fingerprint: header.fingerprint,
            created_at: header.created_at,
            updated_at: header.created_at,
            config: header.config,
        };
        Ok(Store {
            path,
            writer,
            meta,
            writes_since_sync: 0,
            tests: Vec::new(),
            test_set: BTreeMap::new(),
            baselines: BTreeMap::new(),
            units: Vec::new(),
            mutants: Vec::new(),
            mutant_ids: BTreeMap::new(),
            outcomes: BTreeMap::new(),
            group_outcomes: BTreeMap::new(),
            coverage: BTreeMap::new(),
        })
    }

    /// Open an existing store, replaying the log. A torn final line (from a
    /// killed writer) is truncated away; corruption anywhere else is fatal.
    pub fn open(path: impl Into<PathBuf>) -> Result<Store, StoreError> {
        let path = path.into();
        let mut file = File::open(&path)?;
        let mut content = String::new();
        file.read_to_string(&mut content)?;
        drop(file);

        let mut good_bytes = 0usize;
        let mut lines: Vec<&str> = Vec::new();
        let mut torn = false;
        let mut offset = 0usize;
        while offset < content.len() {
            match content[offset..].find('\n') {
                Some(rel) => {
                    lines.push(&content[offset..offset + rel]);
                    offset += rel + 1;
                    good_bytes = offset;
                }
                None => {
                    torn = true; // no trailing newline: the writer died mid-line
                    break;
                }
            }
        }

        if lines.is_empty() {
            return Err(StoreError::CorruptStore {
                line: 1,
                message: "missing header".to_string(),
            });
        }
        let header: Header =
            serde_json::from_str(lines[0]).map_err(|e| StoreError::CorruptStore {
                line: 1,
                message: format!("bad header: {e}"),
            })?;
        if header.magic != MAGIC {
            return Err(StoreError::CorruptStore {
                line: 1,
                message: format!("bad magic `{}`", header.magic),
            });
        }
        if header.version != FORMAT_VERSION {
            return Err(StoreError::CorruptStore {
                line: 1,
                message: format!("unsupported format version {}", header.version),
            });
        }

        let mut store = Store {
            path: path.clone(),
            // placeholder; replaced after replay so we can reuse the
            // in-memory application methods
            writer: BufWriter::new(OpenOptions::new().append(true).open(&path)?),
            meta: SessionMeta {
                session_id: header.session_id,
                fingerprint: header.fingerprint,
                created_at: header.created_at,
                updated_at: file_mtime(&path).unwrap_or(header.created_at),
                config: header.config,
            },
            writes_since_sync: 0,
            tests: Vec::new(),
            test_set: BTreeMap::new(),
            baselines: BTreeMap::new(),
            units: Vec::new(),
            mutants: Vec::new(),
            mutant_ids: BTreeMap::new(),
            outcomes: BTreeMap::new(),
            group_outcomes: BTreeMap::new(),
            coverage: BTreeMap::new(),
        };

        for (i, line) in lines.iter().enumerate().skip(1) {
            let is_last = i == lines.len() - 1;
            let record: Record = match serde_json::from_str(line) {
                Ok(r) => r,
                Err(e) if is_last => {
                    // a fully written but unparsable final line is treated
                    // like a torn write from a killed process
                    let _ = e;
                    good_bytes -= line.len() + 1;
                    torn = true;
                    break;
                }
                Err(e) => {
                    return Err(StoreError::CorruptStore {
                        line: i + 1,
                        message: e.to_string(),
                    })
                }
            };
            store.apply(record, i + 1)?;
        }

        if torn {
            let file = OpenOptions::new().write(true).open(&path)?;
            file.set_len(good_bytes as u64)?;
            file.sync_data()?;
        }
        let mut file = OpenOptions::new().append(true).open(&path)?;
        file.seek(SeekFrom::End(0))?;
        store.writer = BufWriter::new(file);
        Ok(store)
    }

    fn apply(&mut self, record: Record, line: usize) -> Result<bool, StoreError> {
        let conflict = |message: String| -> StoreError {
            if line > 0 {
                StoreError::CorruptStore { line, message }
            } else {
                StoreError::Integrity(message)
            }
        };
        match record {
            Record::Test { id, selector } => match self.test_set.get(&id) {
                Some(existing) if *existing == selector => Ok(false),
                Some(existing) => Err(conflict(format!(
                    "test `{id}` re-declared with selector `{selector}` (was `{existing}`)"
                ))),
                None => {
                    self.test_set.insert(id.clone(), selector.clone());
                    self.tests.push((id, selector));
                    Ok(true)
                }
            },
            Record::Baseline { id, secs } => {
                if let std::collections::btree_map::Entry::Vacant(e) = self.baselines.entry(id) {
                    e.insert(secs);
                    Ok(true)
                } else {
                    Ok(false) // keep the first measurement
                }
            }
            Record::Unit { path, chars } => {
                if self.units.iter().any(|(p, _)| *p == path) {
                    Ok(false)
                } else {
                    self.units.push((path, chars));
                    Ok(true)
                }
            }
            Record::Mutant { mutant } => {
                if self.mutant_ids.contains_key(&mutant.id) {
                    Ok(false)
                } else {
                    self.mutant_ids.insert(mutant.id.clone(), self.mutants.len());
                    self.mutants.push(mutant);
                    Ok(true)
                }
            }
            Record::Outcome(r) => {
                let key = (r.mutant_id.clone(), r.test_id.clone());
                match self.outcomes.get(&key) {
                    Some((status, _)) if *status == r.status => Ok(false),
                    Some((status, _)) => Err(conflict(format!(
                        "cell ({}, {}) already recorded as {:?}, refusing {:?}",
                        r.mutant_id, r.test_id, status, r.status
                    ))),
                    None => {
                        self.outcomes.insert(key, (r.status, r.duration));
                        Ok(true)
                    }
                }
            }
            Record::Group(r) => {
                let key = (r.mutant_id.clone(), r.config, r.test_id.clone());
                match self.group_outcomes.get(&key) {
                    Some((status, _)) if *status == r.status => Ok(false),
                    Some((status, _)) => Err(conflict(format!(
                        "group cell ({}, {}, {}) already recorded as {:?}, refusing {:?}",
                        r.mutant_id,
                        r.config.as_str(),
                        r.test_id,
                        status,
                        r.status
                    ))),
                    None => {
                        self.group_outcomes.insert(key, (r.status, r.duration));
                        Ok(true)
                    }
                }
            }
            Record::Coverage(r) => {
                let key = (r.test_id.clone(), r.unit_path.clone());
                let mut lines_sorted = r.covered_lines.clone();
                lines_sorted.sort_unstable();
                lines_sorted.dedup();
                match self.coverage.get(&key) {
                    Some(existing) if *existing == lines_sorted => Ok(false),
                    Some(_) => Err(conflict(format!(
                        "coverage for ({}, {}) already recorded with different lines",
                        r.test_id, r.unit_path
                    ))),
                    None => {
                        self.coverage.insert(key, lines_sorted);
                        Ok(true)
                    }
                }
            }
        }
    }

    /// Apply to memory, then append and flush. Durable (to the OS) before
    /// returning; identical duplicates are acknowledged without a write.
    fn commit(&mut self, record: Record) -> Result<(), StoreError> {
        let is_new = self.apply(record.clone(), 0)?;
        if !is_new {
            return Ok(());
        }
        serde_json::to_writer(&mut self.writer, &record)
            .map_err(|e| StoreError::Integrity(e.to_string()))?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        self.writes_since_sync += 1;
        if self.writes_since_sync >= SYNC_EVERY {
            self.writer.get_ref().sync_data()?;
            self.writes_since_sync = 0;
        }
        Ok(())
    }

    pub fn sync(&mut self) -> Result<(), StoreError> {
        self.writer.flush()?;
        self.writer.get_ref().sync_data()?;
        self.writes_since_sync = 0;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn meta(&self) -> &SessionMeta {
        &self.meta
    }

    pub fn record_test(&mut self, id: &str, selector: &str) -> Result<(), StoreError> {
        self.commit(Record::Test {
            id: id.to_string(),
            selector: selector.to_string(),
        })
    }

    pub fn record_baseline(&mut self, id: &str, secs: f64) -> Result<(), StoreError> {
        self.commit(Record::Baseline {
            id: id.to_string(),
            secs,
        })
    }

    pub fn record_unit(&mut self, path: &str, chars: u64) -> Result<(), StoreError> {
        self.commit(Record::Unit {
            path: path.to_string(),
            chars,
        })
    }

    pub fn record_mutant(&mut self, mutant: &Mutant) -> Result<(), StoreError> {
        self.commit(Record::Mutant {
            mutant: mutant.clone(),
        })
    }

    pub fn record_outcome(&mut self, record: OutcomeRecord) -> Result<(), StoreError> {
        self.commit(Record::Outcome(record))
    }

    pub fn record_group_outcome(&mut self, record: GroupOutcomeRecord) -> Result<(), StoreError> {
        self.commit(Record::Group(record))
    }

    pub fn record_coverage(&mut self, record: CoverageRecord) -> Result<(), StoreError> {
        self.commit(Record::Coverage(record))
    }

    pub fn tests(&self) -> &[(String, String)] {
        &self.tests
    }

    pub fn baselines(&self) -> &BTreeMap<String, f64> {
        &self.baselines
    }

    pub fn units(&self) -> &[(String, u64)] {
        &self.units
    }

    pub fn mutants(&self) -> &[Mutant] {
        &self.mutants
    }

    pub fn outcomes(&self) -> &BTreeMap<(String, String), (CellStatus, f64)> {
        &self.outcomes
    }

    pub fn group_outcomes(&self) -> &BTreeMap<(String, GroupConfig, String), (CellStatus, f64)> {
        &self.group_outcomes
    }

    pub fn coverage(&self) -> &BTreeMap<(String, String), Vec<u32>> {
        &self.coverage
    }

    /// Plan cells not yet recorded, in plan order.
    pub fn pending_cells(&self, plan: &[(String, String)]) -> Vec<(String, String)> {
        plan.iter()
            .filter(|cell| !self.outcomes.contains_key(*cell))
            .cloned()
            .collect()
    }

    pub fn pending_group_cells(
        &self,
        plan: &[(String, GroupConfig, String)],
    ) -> Vec<(String, GroupConfig, String)> {
        plan.iter()
            .filter(|cell| !self.group_outcomes.contains_key(*cell))
            .cloned()
            .collect()
    }
}

/// Deterministic content hash of a source tree: every regular file below
/// `root` (skipping `.git`, `target`, and the explicitly excluded paths),
/// ordered by relative path.
pub fn tree_fingerprint(root: &Path, exclude: &[PathBuf]) -> std::io::Result<String> {
    fn walk(dir: &Path, exclude: &[PathBuf], files: &mut Vec<PathBuf>) -> std::io::Result<()> {
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            let path = entry.path();
            let name = entry.file_name();
            if name == ".git" || name == "target" {
                continue;
            }
            if exclude.contains(&path) {
                continue;
            }
            if path.is_dir() {
                walk(&path, exclude, files)?;
            } else if path.is_file() {
                files.push(path);
            }
        }
        Ok(())
    }

    let mut files = Vec::new();
    walk(root, exclude, &mut files)?;
    let mut rel: Vec<(String, PathBuf)> = files
        .into_iter()
        .map(|p| {
            let r = p
                .strip_prefix(root)
                .unwrap_or(&p)
                .to_string_lossy()
                .into_owned();
            (r, p)
        })
        .collect();
    rel.sort();

    let mut hasher = Sha256::new();
    for (rel_path, abs_path) in rel {
        let bytes = std::fs::read(&abs_path)?;
        hasher.update(rel_path.as_bytes());
        hasher.update([0]);
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(32);
    for byte in digest.iter().take(16) {
        let _ = write!(hex, "{byte:02x}");
    }
    Ok(hex)
}

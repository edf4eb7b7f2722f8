//! Deterministic mutant enumeration, composition, and application.
//!
//! Given the same source tree, operator registry, order, cap, and seed, the
//! engine emits the same mutant ids in the same order on every platform;
//! session resume and cross-run diffing depend on it.
//!
//! Two matching modes exist per language tag: grammar mode lexes the bundled
//! toy language exactly (comments never match), while token-level mode runs a
//! word-boundary-safe scanner over arbitrary text and may touch comments or
//! string literals (accepted noise for languages the engine cannot parse).

mod compose;
mod enumerate;
mod operators;

pub use compose::compose_mutants;
pub use enumerate::enumerate_mutations;
pub use operators::{MatchMode, MutationOperator, OperatorRegistry, PatternClass, ReplacementRule};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Half-open byte interval into a unit's original text.
///
/// Matched fragments are ASCII tokens, so byte offsets and character offsets
/// coincide on every site the engine can produce; code-length accounting
/// (L_code) stays character-based regardless.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn disjoint(&self, other: &Span) -> bool {
        self.end <= other.start || other.end <= self.start
    }
}

/// One source file under mutation.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
    pub language_tag: String,
}

impl SourceUnit {
    pub fn new(path: impl Into<String>, text: impl Into<String>, language_tag: impl Into<String>) -> Self {
        SourceUnit {
            path: path.into(),
            text: text.into(),
            language_tag: language_tag.into(),
        }
    }

    /// Character count; contributes to the project's L_code.
    pub fn char_count(&self) -> u64 {
        self.text.chars().count() as u64
    }
}

/// A single replacement at a single site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutation {
    pub operator_name: String,
    pub unit_path: String,
    pub span: Span,
    pub original_fragment: String,
    pub replacement_fragment: String,
}

/// An identified set of non-overlapping edits of order k ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutant {
    /// First 16 hex chars of the content hash of the canonical edit list.
    pub id: String,
    pub order: usize,
    /// Sorted by (unit_path, span start).
    pub mutations: Vec<Mutation>,
}

#[derive(Debug, Error)]
pub enum MutagenError {
    #[error("unknown language tag `{0}`")]
    UnknownLanguageTag(String),
    #[error("unparsable source `{path}`: {message}")]
    UnparsableSource { path: String, message: String },
    #[error("stale workspace: `{path}` does not contain {expected:?} at {start}..{end} (found {found:?})")]
    StaleWorkspace {
        path: String,
        start: usize,
        end: usize,
        expected: String,
        found: String,
    },
    #[error("invalid operator registry: {0}")]
    InvalidRegistry(String),
    #[error("unknown unit `{0}` in workspace")]
    UnknownUnit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Canonical digest id over the sorted (unit_path, span, replacement) list.
/// Operator names and original fragments are derived data and stay out of
/// the hash.
pub fn mutant_id(mutations: &[Mutation]) -> String {
    let mut canonical: Vec<&Mutation> = mutations.iter().collect();
    canonical.sort_by(|a, b| {
        (&a.unit_path, a.span.start, a.span.end, &a.replacement_fragment).cmp(&(
            &b.unit_path,
            b.span.start,
            b.span.end,
            &b.replacement_fragment,
        ))
    });
    let mut hasher = Sha256::new();
    for m in canonical {
        hasher.update(m.unit_path.as_bytes());
        hasher.update([0]);
        hasher.update(m.span.start.to_le_bytes());
        hasher.update(m.span.end.to_le_bytes());
        hasher.update(m.replacement_fragment.as_bytes());
        hasher.update([1]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

impl Mutant {
    pub fn from_mutations(mut mutations: Vec<Mutation>) -> Mutant {
        mutations.sort_by(|a, b| {
            (&a.unit_path, a.span.start).cmp(&(&b.unit_path, b.span.start))
        });
        Mutant {
            id: mutant_id(&mutations),
            order: mutations.len(),
            mutations,
        }
    }

    /// Per-unit spans must be pairwise disjoint.
    pub fn spans_disjoint(&self) -> bool {
        for (i, a) in self.mutations.iter().enumerate() {
            for b in &self.mutations[i + 1..] {
                if a.unit_path == b.unit_path && !a.span.disjoint(&b.span) {
                    return false;
                }
            }
        }
        true
    }
}

/// Apply a mutant's edits for one unit to its original text. Edits are
/// applied in descending start order so earlier offsets never shift.
pub fn apply_to_text(text: &str, mutations: &[&Mutation]) -> Result<String, MutagenError> {
    let mut edits: Vec<&Mutation> = mutations.to_vec();
    edits.sort_by_key(|m| std::cmp::Reverse(m.span.start));
    let mut out = text.to_string();
    for m in edits {
        let found = out
            .get(m.span.start..m.span.end)
            .unwrap_or("<out of bounds>");
        if found != m.original_fragment {
            return Err(MutagenError::StaleWorkspace {
                path: m.unit_path.clone(),
                start: m.span.start,
                end: m.span.end,
                expected: m.original_fragment.clone(),
                found: found.to_string(),
            });
        }
        out.replace_range(m.span.start..m.span.end, &m.replacement_fragment);
    }
    Ok(out)
}

/// Apply a mutant to an in-memory tree of unit texts.
pub fn apply_mutant_to_texts(
    texts: &BTreeMap<String, String>,
    mutant: &Mutant,
) -> Result<BTreeMap<String, String>, MutagenError> {
    let mut out = texts.clone();
    let mut by_unit: BTreeMap<&str, Vec<&Mutation>> = BTreeMap::new();
    for m in &mutant.mutations {
        by_unit.entry(m.unit_path.as_str()).or_default().push(m);
    }
    for (unit, edits) in by_unit {
        let text = out
            .get(unit)
            .ok_or_else(|| MutagenError::UnknownUnit(unit.to_string()))?;
        let patched = apply_to_text(text, &edits)?;
        out.insert(unit.to_string(), patched);
    }
    Ok(out)
}

/// An on-disk working copy that can apply a mutant and restore itself
/// byte-identically. Each runner worker owns one copy exclusively.
#[derive(Debug)]
pub struct Workspace {
    root: PathBuf,
    pristine: BTreeMap<String, String>,
}

impl Workspace {
    /// Capture pristine texts for the listed units under `root`.
    pub fn open(root: impl Into<PathBuf>, unit_paths: &[String]) -> Result<Workspace, MutagenError> {
        let root = root.into();
        let mut pristine = BTreeMap::new();
        for path in unit_paths {
            let text = fs::read_to_string(root.join(path))?;
            pristine.insert(path.clone(), text);
        }
        Ok(Workspace { root, pristine })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn pristine_text(&self, unit_path: &str) -> Option<&str> {
        self.pristine.get(unit_path).map(String::as_str)
    }

    /// Patch the on-disk tree. Verifies every span against the current disk
    /// contents first, so an externally modified tree fails loudly instead
    /// of producing a mismatched mutant.
    pub fn apply_mutant(&self, mutant: &Mutant) -> Result<(), MutagenError> {
        let mut by_unit: BTreeMap<&str, Vec<&Mutation>> = BTreeMap::new();
        for m in &mutant.mutations {
            if !self.pristine.contains_key(&m.unit_path) {
                return Err(MutagenError::UnknownUnit(m.unit_path.clone()));
            }
            by_unit.entry(m.unit_path.as_str()).or_default().push(m);
        }
        // Validate everything before writing anything.
        let mut patched: Vec<(PathBuf, String)> = Vec::new();
        for (unit, edits) in by_unit {
            let disk_path = self.root.join(unit);
            let current = fs::read_to_string(&disk_path)?;
            patched.push((disk_path, apply_to_text(&current, &edits)?));
        }
        for (disk_path, text) in patched {
            fs::write(disk_path, text)?;
        }
        Ok(())
    }

    /// Restore the pristine bytes of every unit the mutant touched.
    pub fn revert_mutant(&self, mutant: &Mutant) -> Result<(), MutagenError> {
        let mut touched: Vec<&str> = mutant
            .mutations
            .iter()
            .map(|m| m.unit_path.as_str())
            .collect();
        touched.sort_unstable();
        touched.dedup();
        for unit in touched {
            let text = self
                .pristine
                .get(unit)
                .ok_or_else(|| MutagenError::UnknownUnit(unit.to_string()))?;
            fs::write(self.root.join(unit), text)?;
        }
        Ok(())
    }

    /// True when every tracked unit matches its pristine text on disk.
    pub fn is_pristine(&self) -> Result<bool, MutagenError> {
        for (unit, text) in &self.pristine {
            if fs::read_to_string(self.root.join(unit))? != *text {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

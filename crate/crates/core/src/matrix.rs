//! Kill-matrix model and survivor-set queries.
//!
//! The matrix holds one outcome per (mutant, test) cell. Per-test cells are
//! the source of truth: any subset query, including the two per-test group
//! configurations, derives from them under the deterministic-tests
//! assumption. Queries refuse to guess: unpopulated cells and exec-error
//! cells inside the queried region are hard errors.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Outcome of one (mutant, test) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Pass,
    Fail,
    Timeout,
    ExecError,
    Missing,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Pass => "pass",
            CellStatus::Fail => "fail",
            CellStatus::Timeout => "timeout",
            CellStatus::ExecError => "exec_error",
            CellStatus::Missing => "missing",
        }
    }

    pub fn parse(s: &str) -> Option<CellStatus> {
        Some(match s {
            "pass" => CellStatus::Pass,
            "fail" => CellStatus::Fail,
            "timeout" => CellStatus::Timeout,
            "exec_error" => CellStatus::ExecError,
            "missing" => CellStatus::Missing,
            _ => return None,
        })
    }
}

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("unknown test id `{0}`")]
    UnknownTest(String),
    #[error("unknown mutant id `{0}`")]
    UnknownMutant(String),
    #[error("matrix incomplete: {} unpopulated cells (first: {} / {})", .cells.len(), .cells[0].0, .cells[0].1)]
    Incomplete { cells: Vec<(String, String)> },
    #[error("{} exec-error cells poison the query (first: {} / {})", .cells.len(), .cells[0].0, .cells[0].1)]
    Poisoned { cells: Vec<(String, String)> },
    #[error("ordering is not a permutation of the matrix tests")]
    BadOrdering,
    #[error("conflicting statuses for cell ({mutant}, {test}): {existing:?} vs {incoming:?}")]
    Conflict {
        mutant: String,
        test: String,
        existing: CellStatus,
        incoming: CellStatus,
    },
}

/// Survivors of a test subset, split by certainty.
///
/// `confirmed` passed every test in the subset; `uncertain` had no failure
/// but at least one timeout, so their kill status is unresolved. The true
/// survivor count W lies in `[w_lower, w_upper]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SurvivorSet {
    pub confirmed: BTreeSet<String>,
    pub uncertain: BTreeSet<String>,
}

impl SurvivorSet {
    pub fn w_lower(&self) -> u64 {
        self.confirmed.len() as u64
    }

    pub fn w_upper(&self) -> u64 {
        (self.confirmed.len() + self.uncertain.len()) as u64
    }
}

/// Per-test pair of derived group views: survivors of `{t_i}` alone and of
/// the complement `all \ {t_i}`.
#[derive(Debug, Clone)]
pub struct GroupView {
    pub test_id: String,
    pub only: SurvivorSet,
    pub except: SurvivorSet,
}

#[derive(Debug, Clone)]
pub struct KillMatrix {
    tests: Vec<String>,
    mutants: Vec<String>,
    test_index: HashMap<String, usize>,
    mutant_index: HashMap<String, usize>,
    cells: Vec<CellStatus>, // row-major: mutants x tests
}

impl KillMatrix {
    pub fn new(tests: Vec<String>, mutants: Vec<String>) -> Self {
        let test_index = tests
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let mutant_index = mutants
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let cells = vec![CellStatus::Missing; tests.len() * mutants.len()];
        KillMatrix {
            tests,
            mutants,
            test_index,
            mutant_index,
            cells,
        }
    }

    pub fn tests(&self) -> &[String] {
        &self.tests
    }

    pub fn mutants(&self) -> &[String] {
        &self.mutants
    }

    pub fn set_cell(&mut self, mutant: &str, test: &str, status: CellStatus) -> Result<(), MatrixError> {
        let mi = *self
            .mutant_index
            .get(mutant)
            .ok_or_else(|| MatrixError::UnknownMutant(mutant.to_string()))?;
        let ti = *self
            .test_index
            .get(test)
            .ok_or_else(|| MatrixError::UnknownTest(test.to_string()))?;
        let existing = self.cells[mi * self.tests.len() + ti];
        if existing != CellStatus::Missing && existing != status {
            return Err(MatrixError::Conflict {
                mutant: mutant.to_string(),
                test: test.to_string(),
                existing,
                incoming: status,
            });
        }
        self.cells[mi * self.tests.len() + ti] = status;
        Ok(())
    }

    pub fn cell(&self, mutant: &str, test: &str) -> Option<CellStatus> {
        let mi = *self.mutant_index.get(mutant)?;
        let ti = *self.test_index.get(test)?;
        Some(self.cells[mi * self.tests.len() + ti])
    }

    fn cell_at(&self, mi: usize, ti: usize) -> CellStatus {
        self.cells[mi * self.tests.len() + ti]
    }

    fn resolve_subset(&self, subset: &[String]) -> Result<Vec<usize>, MatrixError> {
        subset
            .iter()
            .map(|t| {
                self.test_index
                    .get(t)
                    .copied()
                    .ok_or_else(|| MatrixError::UnknownTest(t.clone()))
            })
            .collect()
    }

    /// Check that every cell in the given (mutant-row, test-column) region is
    /// populated with Pass/Fail/Timeout; collect offenders otherwise.
    fn validate_region(&self, test_cols: &[usize]) -> Result<(), MatrixError> {
        let mut missing = Vec::new();
        let mut poisoned = Vec::new();
        for mi in 0..self.mutants.len() {
            for &ti in test_cols {
                match self.cell_at(mi, ti) {
                    CellStatus::Missing => {
                        missing.push((self.mutants[mi].clone(), self.tests[ti].clone()))
                    }
                    CellStatus::ExecError => {
                        poisoned.push((self.mutants[mi].clone(), self.tests[ti].clone()))
                    }
                    _ => {}
                }
            }
        }
        if !missing.is_empty() {
            return Err(MatrixError::Incomplete { cells: missing });
        }
        if !poisoned.is_empty() {
            return Err(MatrixError::Poisoned { cells: poisoned });
        }
        Ok(())
    }

    fn validate_full(&self) -> Result<(), MatrixError> {
        let all: Vec<usize> = (0..self.tests.len()).collect();
        self.validate_region(&all)
    }

    /// Survivors of an arbitrary test subset.
    ///
    /// A mutant is killed iff any subset test failed it; confirmed iff every
    /// subset test passed; uncertain otherwise (no failure, some timeout).
    /// The empty subset confirms every mutant: an empty conjunction holds.
    pub fn survivors(&self, subset: &[String]) -> Result<SurvivorSet, MatrixError> {
        let cols = self.resolve_subset(subset)?;
        self.validate_region(&cols)?;
        let mut out = SurvivorSet::default();
        for (mi, mutant) in self.mutants.iter().enumerate() {
            let mut failed = false;
            let mut timed_out = false;
            for &ti in &cols {
                match self.cell_at(mi, ti) {
                    CellStatus::Fail => failed = true,
                    CellStatus::Timeout => timed_out = true,
                    _ => {}
                }
            }
            if failed {
                continue;
            }
            if timed_out {
                out.uncertain.insert(mutant.clone());
            } else {
                out.confirmed.insert(mutant.clone());
            }
        }
        Ok(out)
    }

    /// Mutants killed only by `test_id` (K_i).
    ///
    /// A timeout on any other test removes the mutant from every K_i: its
    /// "only by t_i" status cannot be verified.
    pub fn uniquely_killed(&self, test_id: &str) -> Result<BTreeSet<String>, MatrixError> {
        let ti = *self
            .test_index
            .get(test_id)
            .ok_or_else(|| MatrixError::UnknownTest(test_id.to_string()))?;
        self.validate_full()?;
        let mut out = BTreeSet::new();
        for (mi, mutant) in self.mutants.iter().enumerate() {
            if self.cell_at(mi, ti) != CellStatus::Fail {
                continue;
            }
            let exclusive = (0..self.tests.len())
                .filter(|&tj| tj != ti)
                .all(|tj| self.cell_at(mi, tj) == CellStatus::Pass);
            if exclusive {
                out.insert(mutant.clone());
            }
        }
        Ok(out)
    }

    /// Mutants killed by `test_id` when run alone (K'_i), regardless of what
    /// other tests do. The overlap fallback variant.
    pub fn killed_alone(&self, test_id: &str) -> Result<BTreeSet<String>, MatrixError> {
        let ti = *self
            .test_index
            .get(test_id)
            .ok_or_else(|| MatrixError::UnknownTest(test_id.to_string()))?;
        self.validate_full()?;
        let mut out = BTreeSet::new();
        for (mi, mutant) in self.mutants.iter().enumerate() {
            if self.cell_at(mi, ti) == CellStatus::Fail {
                out.insert(mutant.clone());
            }
        }
        Ok(out)
    }

    /// For every test: survivors of `{t_i}` and of `all \ {t_i}`.
    pub fn group_views(&self) -> Result<Vec<GroupView>, MatrixError> {
        self.validate_full()?;
        let mut views = Vec::with_capacity(self.tests.len());
        for t in &self.tests {
            let only = self.survivors(std::slice::from_ref(t))?;
            let rest: Vec<String> = self.tests.iter().filter(|x| *x != t).cloned().collect();
            let except = self.survivors(&rest)?;
            views.push(GroupView {
                test_id: t.clone(),
                only,
                except,
            });
        }
        Ok(views)
    }

    /// Validate that `ordering` is a permutation of the declared tests.
    pub fn check_ordering(&self, ordering: &[String]) -> Result<(), MatrixError> {
        if ordering.len() != self.tests.len() {
            return Err(MatrixError::BadOrdering);
        }
        let mut seen = BTreeSet::new();
        for t in ordering {
            if !self.test_index.contains_key(t) || !seen.insert(t.clone()) {
                return Err(MatrixError::BadOrdering);
            }
        }
        Ok(())
    }
}

//! Test discovery and execution against a (possibly mutated) workspace.
//!
//! The harness knows nothing about test frameworks: discovery and runs go
//! through user-supplied shell command templates with `{include}` /
//! `{exclude}` selector placeholders, so any runner that can filter tests by
//! name plugs in. Every run happens on a private workspace copy, which is
//! reverted before the outcome is returned.

mod process;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::CellStatus;
use crate::mutagen::{Mutant, MutagenError, Workspace};

use process::{run_with_deadline, ExecRequest};

pub const INCLUDE_PLACEHOLDER: &str = "{include}";
pub const EXCLUDE_PLACEHOLDER: &str = "{exclude}";

/// Upper bound used while measuring baselines, before any baseline exists.
const BASELINE_LIMIT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    /// Opaque token substituted into the run command template.
    pub selector: String,
    /// Seconds on the unmutated tree; filled by `measure_baseline`.
    pub baseline_duration: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub workdir: PathBuf,
    /// Emits one test id per line on stdout.
    pub discover_command: String,
    /// Must contain `{include}` or `{exclude}`; selectors are joined with
    /// commas.
    pub run_command_template: String,
    /// Per-run limit multiplier over the baseline duration; must exceed 1.
    pub timeout_factor: f64,
    /// Floor for computed limits, so millisecond baselines don't turn clock
    /// jitter into timeouts.
    pub min_timeout_secs: f64,
    pub env_allowlist: Vec<String>,
    pub capture_limit: usize,
}

impl SuiteConfig {
    pub fn new(workdir: impl Into<PathBuf>, discover: impl Into<String>, run: impl Into<String>) -> Self {
        SuiteConfig {
            workdir: workdir.into(),
            discover_command: discover.into(),
            run_command_template: run.into(),
            timeout_factor: 5.0,
            min_timeout_secs: 0.25,
            env_allowlist: Vec::new(),
            capture_limit: 8 * 1024,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.timeout_factor <= 1.0 {
            return Err(HarnessError::BadConfig(
                "timeout_factor must be greater than 1".into(),
            ));
        }
        if !self.run_command_template.contains(INCLUDE_PLACEHOLDER)
            && !self.run_command_template.contains(EXCLUDE_PLACEHOLDER)
        {
            return Err(HarnessError::BadConfig(format!(
                "run command template needs `{INCLUDE_PLACEHOLDER}` or `{EXCLUDE_PLACEHOLDER}`"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Pass,
    Fail,
    Timeout,
    ExecError,
}

impl From<RunStatus> for CellStatus {
    fn from(s: RunStatus) -> CellStatus {
        match s {
            RunStatus::Pass => CellStatus::Pass,
            RunStatus::Fail => CellStatus::Fail,
            RunStatus::Timeout => CellStatus::Timeout,
            RunStatus::ExecError => CellStatus::ExecError,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub duration: f64,
    pub detail: String,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid suite config: {0}")]
    BadConfig(String),
    #[error("test discovery failed (exit status {status:?}):\n{output}")]
    DiscoveryFailed { status: Option<i32>, output: String },
    #[error("baseline broken; failing tests: {0:?}")]
    BrokenBaseline(Vec<String>),
    #[error("unknown test id `{0}`")]
    UnknownTest(String),
    #[error("include set is empty")]
    EmptyInclude,
    #[error("test `{0}` has no measured baseline")]
    MissingBaseline(String),
    #[error(transparent)]
    Mutagen(#[from] MutagenError),
}

/// Run the discovery command and parse one test id per line.
///
/// Order of first appearance is the canonical ordering used for curves; the
/// empty list is valid (a trivial macrostate).
pub fn discover_tests(config: &SuiteConfig) -> Result<Vec<TestCase>, HarnessError> {
    config.validate()?;
    let output = std::process::Command::new("sh")
        .arg("-c")
        .arg(&config.discover_command)
        .current_dir(&config.workdir)
        .output()
        .map_err(|e| HarnessError::DiscoveryFailed {
            status: None,
            output: e.to_string(),
        })?;
    if !output.status.success() {
        return Err(HarnessError::DiscoveryFailed {
            status: output.status.code(),
            output: String::from_utf8_lossy(&output.stderr).into_owned(),
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut tests = Vec::new();
    for line in String::from_utf8_lossy(&output.stdout).lines() {
        let id = line.trim();
        if id.is_empty() || !seen.insert(id.to_string()) {
            continue;
        }
        tests.push(TestCase {
            id: id.to_string(),
            selector: id.to_string(),
            baseline_duration: None,
        });
    }
    Ok(tests)
}

fn substitute(template: &str, include: &[&str], exclude: &[&str]) -> String {
    template
        .replace(INCLUDE_PLACEHOLDER, &include.join(","))
        .replace(EXCLUDE_PLACEHOLDER, &exclude.join(","))
}

fn limit_for(config: &SuiteConfig, baseline_sum: f64) -> Duration {
    Duration::from_secs_f64((config.timeout_factor * baseline_sum).max(config.min_timeout_secs))
}

pub struct TestHarness {
    config: SuiteConfig,
    tests: Vec<TestCase>,
}

impl TestHarness {
    pub fn new(config: SuiteConfig, tests: Vec<TestCase>) -> Result<TestHarness, HarnessError> {
        config.validate()?;
        Ok(TestHarness { config, tests })
    }

    pub fn tests(&self) -> &[TestCase] {
        &self.tests
    }

    pub fn config(&self) -> &SuiteConfig {
        &self.config
    }

    fn test(&self, id: &str) -> Result<&TestCase, HarnessError> {
        self.tests
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| HarnessError::UnknownTest(id.to_string()))
    }

    fn baseline(&self, id: &str) -> Result<f64, HarnessError> {
        self.test(id)?
            .baseline_duration
            .ok_or_else(|| HarnessError::MissingBaseline(id.to_string()))
    }

    fn exec(&self, workdir: &std::path::Path, include: &[&str], limit: Duration) -> RunOutcome {
        let exclude: Vec<&str> = self
            .tests
            .iter()
            .map(|t| t.selector.as_str())
            .filter(|s| !include.contains(s))
            .collect();
        let command = substitute(&self.config.run_command_template, include, &exclude);
        run_with_deadline(ExecRequest {
            command,
            workdir,
            limit,
            env_allowlist: &self.config.env_allowlist,
            capture_limit: self.config.capture_limit,
        })
    }

    /// Measure each test alone on the pristine tree. Every test must pass:
    /// the implemented program is supposed to satisfy its own suite.
    pub fn measure_baseline(&mut self) -> Result<(), HarnessError> {
        let mut failures = Vec::new();
        let ids: Vec<String> = self.tests.iter().map(|t| t.id.clone()).collect();
        for id in &ids {
            let selector = self.test(id)?.selector.clone();
            let outcome = self.exec(
                &self.config.workdir.clone(),
                &[selector.as_str()],
                BASELINE_LIMIT,
            );
            if outcome.status != RunStatus::Pass {
                failures.push(id.clone());
                continue;
            }
            let test = self
                .tests
                .iter_mut()
                .find(|t| t.id == *id)
                .expect("test exists");
            // clamp away zero readings from coarse clocks
            test.baseline_duration = Some(outcome.duration.max(1e-6));
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::BrokenBaseline(failures))
        }
    }

    /// Execute the included tests one by one against `workspace` with
    /// `mutant` applied (when given). The workspace is reverted before
    /// returning, success or not.
    ///
    /// With no mutant, this is a baseline replay: a failing outcome is
    /// reported as an exec error (flaky-test quarantine), never as a kill.
    pub fn run_cell(
        &self,
        workspace: &Workspace,
        mutant: Option<&Mutant>,
        include: &[String],
    ) -> Result<BTreeMap<String, RunOutcome>, HarnessError> {
        if include.is_empty() {
            return Err(HarnessError::EmptyInclude);
        }
        for id in include {
            self.baseline(id)?; // validate ids and baselines upfront
        }
        if let Some(mutant) = mutant {
            workspace.apply_mutant(mutant)?;
        }
        let mut outcomes = BTreeMap::new();
        for id in include {
            let test = self.test(id)?;
            let limit = limit_for(&self.config, self.baseline(id)?);
            let mut outcome = self.exec(workspace.root(), &[test.selector.as_str()], limit);
            if mutant.is_none() && outcome.status == RunStatus::Fail {
                outcome.status = RunStatus::ExecError;
                outcome.detail = format!("baseline disagreement (flaky?): {}", outcome.detail);
            }
            outcomes.insert(id.clone(), outcome);
        }
        if let Some(mutant) = mutant {
            workspace.revert_mutant(mutant)?;
        }
        Ok(outcomes)
    }

    /// Execute the included tests as one process with a group deadline of
    /// factor × Σ baselines; one outcome for the whole group.
    pub fn run_group(
        &self,
        workspace: &Workspace,
        mutant: Option<&Mutant>,
        include: &[String],
    ) -> Result<RunOutcome, HarnessError> {
        if include.is_empty() {
            return Err(HarnessError::EmptyInclude);
        }
        let mut baseline_sum = 0.0;
        let mut selectors = Vec::with_capacity(include.len());
        for id in include {
            baseline_sum += self.baseline(id)?;
            selectors.push(self.test(id)?.selector.clone());
        }
        if let Some(mutant) = mutant {
            workspace.apply_mutant(mutant)?;
        }
        let selector_refs: Vec<&str> = selectors.iter().map(String::as_str).collect();
        let limit = limit_for(&self.config, baseline_sum);
        let mut outcome = self.exec(workspace.root(), &selector_refs, limit);
        if mutant.is_none() && outcome.status == RunStatus::Fail {
            outcome.status = RunStatus::ExecError;
            outcome.detail = format!("baseline disagreement (flaky?): {}", outcome.detail);
        }
        if let Some(mutant) = mutant {
            workspace.revert_mutant(mutant)?;
        }
        Ok(outcome)
    }
}

//! The run command: discover, baseline, enumerate, and execute all pending
//! cells against worker-private workspace copies, with resume.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use mutent::harness::{discover_tests, SuiteConfig, TestCase, TestHarness};
use mutent::matrix::CellStatus;
use mutent::mutagen::{
    compose_mutants, enumerate_mutations, Mutant, Mutation, OperatorRegistry, SourceUnit,
    Workspace,
};
use mutent::store::{
    tree_fingerprint, GroupConfig, GroupOutcomeRecord, OutcomeRecord, Store,
};

use crate::config::{RunMode, RunSettings};
use crate::util::copy_tree;
use crate::{exit_codes, CmdError};

pub struct RunArgs {
    pub project: PathBuf,
    pub db: PathBuf,
    pub config: Option<PathBuf>,
    pub operators: Option<PathBuf>,
    pub overrides: std::collections::BTreeMap<String, String>,
}

fn load_registry(path: Option<&Path>) -> Result<OperatorRegistry, CmdError> {
    match path {
        None => Ok(OperatorRegistry::default_registry()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CmdError::new(1, format!("cannot read {}: {e}", path.display())))?;
            OperatorRegistry::from_json_str(&text).map_err(|e| CmdError::new(1, e.to_string()))
        }
    }
}

fn suite_config(project: &Path, settings: &RunSettings) -> SuiteConfig {
    let mut config = SuiteConfig::new(project, &settings.discover, &settings.run);
    config.timeout_factor = settings.timeout_factor;
    config.min_timeout_secs = settings.min_timeout;
    config.env_allowlist = settings.env_allow.clone();
    config.capture_limit = settings.capture_limit;
    config
}

/// Tests come from the store on resume, from discovery on a fresh session.
fn resolve_tests(
    store: &mut Store,
    suite: &SuiteConfig,
) -> Result<Vec<TestCase>, CmdError> {
    if store.tests().is_empty() {
        let tests = discover_tests(suite)
            .map_err(|e| CmdError::new(exit_codes::BASELINE, e.to_string()))?;
        for t in &tests {
            store
                .record_test(&t.id, &t.selector)
                .map_err(|e| CmdError::new(2, e.to_string()))?;
        }
        Ok(tests)
    } else {
        Ok(store
            .tests()
            .iter()
            .map(|(id, selector)| TestCase {
                id: id.clone(),
                selector: selector.clone(),
                baseline_duration: store.baselines().get(id).copied(),
            })
            .collect())
    }
}

fn ensure_baselines(
    store: &mut Store,
    suite: &SuiteConfig,
    tests: Vec<TestCase>,
) -> Result<Vec<TestCase>, CmdError> {
    if tests.iter().all(|t| t.baseline_duration.is_some()) {
        return Ok(tests);
    }
    let mut harness = TestHarness::new(suite.clone(), tests)
        .map_err(|e| CmdError::new(1, e.to_string()))?;
    harness
        .measure_baseline()
        .map_err(|e| CmdError::new(exit_codes::BASELINE, e.to_string()))?;
    let tests: Vec<TestCase> = harness.tests().to_vec();
    for t in &tests {
        store
            .record_baseline(&t.id, t.baseline_duration.expect("measured"))
            .map_err(|e| CmdError::new(2, e.to_string()))?;
    }
    Ok(tests)
}

fn load_units(project: &Path, settings: &RunSettings) -> Result<Vec<SourceUnit>, CmdError> {
    if settings.sources.is_empty() {
        return Err(CmdError::new(1, "no `sources` configured".to_string()));
    }
    let mut units = Vec::new();
    for rel in &settings.sources {
        let text = std::fs::read_to_string(project.join(rel))
            .map_err(|e| CmdError::new(1, format!("cannot read source `{rel}`: {e}")))?;
        units.push(SourceUnit::new(rel.clone(), text, settings.language.clone()));
    }
    Ok(units)
}

type MatrixBatch = (Mutant, Vec<String>);
type GroupBatch = (Mutant, Vec<(GroupConfig, String)>);

enum WorkPlan {
    Matrix(VecDeque<MatrixBatch>),
    Group(VecDeque<GroupBatch>),
}

struct Shared<'a> {
    store: Mutex<&'a mut Store>,
    queue: Mutex<WorkPlan>,
    interrupted: Arc<AtomicBool>,
    failure: Mutex<Option<String>>,
    executed: Mutex<usize>,
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CmdError> {
    let project = args
        .project
        .canonicalize()
        .map_err(|e| CmdError::new(1, format!("bad project dir: {e}")))?;
    let mut settings = RunSettings::load(&project, args.config.as_deref())
        .map_err(|e| CmdError::new(1, e))?;
    settings
        .apply(&args.overrides)
        .map_err(|e| CmdError::new(1, e))?;
    if settings.discover.is_empty() || settings.run.is_empty() {
        return Err(CmdError::new(
            1,
            "both `discover` and `run` commands must be configured".to_string(),
        ));
    }
    let registry = load_registry(args.operators.as_deref())?;

    // absolute db path for tree-walk exclusion (the file may not exist yet,
    // so only its parent directory can be canonicalized)
    let db_abs = {
        let p = if args.db.is_absolute() {
            args.db.clone()
        } else {
            std::env::current_dir()
                .unwrap_or_default()
                .join(&args.db)
        };
        match (p.parent(), p.file_name()) {
            (Some(dir), Some(name)) if !dir.as_os_str().is_empty() => dir
                .canonicalize()
                .map(|d| d.join(name))
                .unwrap_or_else(|_| p.clone()),
            _ => p,
        }
    };
    let fingerprint = tree_fingerprint(&project, std::slice::from_ref(&db_abs))
        .map_err(|e| CmdError::new(1, format!("cannot fingerprint project: {e}")))?;

    let snapshot = settings.session_snapshot();
    let mut store = Store::open_or_create(&args.db, &fingerprint, snapshot.clone())
        .map_err(|e| CmdError::new(exit_codes::BASELINE, e.to_string()))?;
    if store.meta().config != snapshot {
        return Err(CmdError::new(
            exit_codes::BASELINE,
            "session was created with different settings; use a fresh --db or the original settings"
                .to_string(),
        ));
    }

    let suite = suite_config(&project, &settings);
    let tests = resolve_tests(&mut store, &suite)?;
    let tests = ensure_baselines(&mut store, &suite, tests)?;
    let test_ids: Vec<String> = tests.iter().map(|t| t.id.clone()).collect();

    let units = load_units(&project, &settings)?;
    for unit in &units {
        store
            .record_unit(&unit.path, unit.char_count())
            .map_err(|e| CmdError::new(2, e.to_string()))?;
    }
    let mut mutations: Vec<Mutation> = Vec::new();
    for unit in &units {
        let mut unit_mutations = enumerate_mutations(unit, &registry)
            .map_err(|e| CmdError::new(1, e.to_string()))?;
        mutations.append(&mut unit_mutations);
    }
    let mutants = compose_mutants(&mutations, settings.order, settings.cap, settings.seed);
    for mutant in &mutants {
        store
            .record_mutant(mutant)
            .map_err(|e| CmdError::new(2, e.to_string()))?;
    }

    let interrupted = Arc::new(AtomicBool::new(false));
    {
        let flag = interrupted.clone();
        let _ = ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst));
    }

    let plan = match settings.mode {
        RunMode::Matrix => {
            let full: Vec<(String, String)> = mutants
                .iter()
                .flat_map(|m| test_ids.iter().map(move |t| (m.id.clone(), t.clone())))
                .collect();
            let pending = store.pending_cells(&full);
            let mut batches: VecDeque<MatrixBatch> = VecDeque::new();
            for mutant in &mutants {
                let cells: Vec<String> = pending
                    .iter()
                    .filter(|(m, _)| *m == mutant.id)
                    .map(|(_, t)| t.clone())
                    .collect();
                if !cells.is_empty() {
                    batches.push_back((mutant.clone(), cells));
                }
            }
            WorkPlan::Matrix(batches)
        }
        RunMode::Group => {
            let full: Vec<(String, GroupConfig, String)> = mutants
                .iter()
                .flat_map(|m| {
                    test_ids.iter().flat_map(move |t| {
                        [
                            (m.id.clone(), GroupConfig::Only, t.clone()),
                            (m.id.clone(), GroupConfig::Except, t.clone()),
                        ]
                    })
                })
                .collect();
            let pending = store.pending_group_cells(&full);
            let mut batches: VecDeque<GroupBatch> = VecDeque::new();
            for mutant in &mutants {
                let cells: Vec<(GroupConfig, String)> = pending
                    .iter()
                    .filter(|(m, _, _)| *m == mutant.id)
                    .map(|(_, c, t)| (*c, t.clone()))
                    .collect();
                if !cells.is_empty() {
                    batches.push_back((mutant.clone(), cells));
                }
            }
            WorkPlan::Group(batches)
        }
    };

    let pending_count = match &plan {
        WorkPlan::Matrix(b) => b.iter().map(|(_, c)| c.len()).sum::<usize>(),
        WorkPlan::Group(b) => b.iter().map(|(_, c)| c.len()).sum::<usize>(),
    };
    eprintln!(
        "session {}: {} tests, {} mutants, {} pending cells ({} mode)",
        store.meta().session_id,
        test_ids.len(),
        mutants.len(),
        pending_count,
        settings.mode.as_str()
    );
    if pending_count == 0 {
        println!("nothing pending; session already complete");
        return Ok(());
    }

    let shared = Shared {
        store: Mutex::new(&mut store),
        queue: Mutex::new(plan),
        interrupted: interrupted.clone(),
        failure: Mutex::new(None),
        executed: Mutex::new(0),
    };
    let jobs = settings.jobs.max(1);

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| worker_loop(&shared, &project, &db_abs, &suite, &tests, &test_ids));
        }
    });

    {
        let mut guard = shared.store.lock().expect("store lock");
        guard.sync().map_err(|e| CmdError::new(2, e.to_string()))?;
    }
    if let Some(message) = shared.failure.lock().expect("failure lock").take() {
        return Err(CmdError::new(2, message));
    }
    if interrupted.load(Ordering::SeqCst) {
        return Err(CmdError::new(
            exit_codes::INTERRUPTED,
            "interrupted; rerun the same command to resume".to_string(),
        ));
    }
    println!(
        "executed {} cells; session complete",
        shared.executed.lock().map(|g| *g).unwrap_or(0)
    );
    Ok(())
}

fn worker_loop(
    shared: &Shared<'_>,
    project: &Path,
    db_abs: &Path,
    suite: &SuiteConfig,
    tests: &[TestCase],
    test_ids: &[String],
) {
    let fail = |message: String| {
        let mut slot = shared.failure.lock().expect("failure lock");
        if slot.is_none() {
            *slot = Some(message);
        }
        shared.interrupted.store(true, Ordering::SeqCst);
    };

    let scratch = match tempfile::tempdir() {
        Ok(dir) => dir,
        Err(e) => return fail(format!("cannot create workspace copy: {e}")),
    };
    if let Err(e) = copy_tree(project, scratch.path(), &[db_abs.to_path_buf()]) {
        return fail(format!("cannot copy project: {e}"));
    }
    let unit_paths: Vec<String> = {
        let guard = shared.store.lock().expect("store lock");
        guard.units().iter().map(|(p, _)| p.clone()).collect()
    };
    let workspace = match Workspace::open(scratch.path(), &unit_paths) {
        Ok(ws) => ws,
        Err(e) => return fail(format!("cannot open workspace: {e}")),
    };
    let mut worker_suite = suite.clone();
    worker_suite.workdir = scratch.path().to_path_buf();
    let harness = match TestHarness::new(worker_suite, tests.to_vec()) {
        Ok(h) => h,
        Err(e) => return fail(e.to_string()),
    };

    loop {
        if shared.interrupted.load(Ordering::SeqCst) {
            return;
        }
        let batch = {
            let mut queue = shared.queue.lock().expect("queue lock");
            match &mut *queue {
                WorkPlan::Matrix(batches) => batches.pop_front().map(WorkItem::Matrix),
                WorkPlan::Group(batches) => batches.pop_front().map(WorkItem::Group),
            }
        };
        let Some(item) = batch else { return };
        match item {
            WorkItem::Matrix((mutant, include)) => {
                let outcomes = match harness.run_cell(&workspace, Some(&mutant), &include) {
                    Ok(o) => o,
                    Err(e) => return fail(format!("cell ({}, …): {e}", mutant.id)),
                };
                let mut guard = shared.store.lock().expect("store lock");
                for (test_id, outcome) in outcomes {
                    let record = OutcomeRecord {
                        mutant_id: mutant.id.clone(),
                        test_id,
                        status: outcome.status.into(),
                        duration: outcome.duration,
                    };
                    if let Err(e) = guard.record_outcome(record) {
                        drop(guard);
                        return fail(e.to_string());
                    }
                    *shared.executed.lock().expect("executed lock") += 1;
                }
            }
            WorkItem::Group((mutant, cells)) => {
                for (config, test_id) in cells {
                    if shared.interrupted.load(Ordering::SeqCst) {
                        return;
                    }
                    let include: Vec<String> = match config {
                        GroupConfig::Only => vec![test_id.clone()],
                        GroupConfig::Except => test_ids
                            .iter()
                            .filter(|t| **t != test_id)
                            .cloned()
                            .collect(),
                    };
                    // all-except-t on a single-test suite is the empty
                    // constraint set: every mutant survives it vacuously
                    let (status, duration) = if include.is_empty() {
                        (CellStatus::Pass, 0.0)
                    } else {
                        match harness.run_group(&workspace, Some(&mutant), &include) {
                            Ok(outcome) => (outcome.status.into(), outcome.duration),
                            Err(e) => {
                                return fail(format!("group cell ({}, {test_id}): {e}", mutant.id))
                            }
                        }
                    };
                    let record = GroupOutcomeRecord {
                        mutant_id: mutant.id.clone(),
                        config,
                        test_id,
                        status,
                        duration,
                    };
                    let mut guard = shared.store.lock().expect("store lock");
                    if let Err(e) = guard.record_group_outcome(record) {
                        drop(guard);
                        return fail(e.to_string());
                    }
                    *shared.executed.lock().expect("executed lock") += 1;
                }
            }
        }
    }
}

enum WorkItem {
    Matrix(MatrixBatch),
    Group(GroupBatch),
}

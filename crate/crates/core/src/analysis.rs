//! Report and curve assembly over session data.
//!
//! A `SessionData` is the analysis-ready view of a session, buildable from a
//! live store or from an imported interchange document; every metric works
//! without a project tree or harness present.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::entropy::{
    self, entropy_curve, information_weights, mutation_score, EntropyCurve, EntropyError, LogBase,
    WeightProfile, WeightVariant,
};
use crate::graphlab::{self, GraphError};
use crate::interchange::{InterchangeDocument, SchemaError};
use crate::matrix::{CellStatus, KillMatrix, MatrixError};
use crate::mutagen::Mutant;
use crate::spacelab::Trajectory;
use crate::store::{GroupConfig, Store};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("session holds group-mode outcomes only; per-cell analysis needs a matrix-mode run")]
    GroupSession,
    #[error("ordering file lists unknown or duplicate tests: {0:?}")]
    BadExplicitOrdering(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct SessionData {
    /// Declaration-ordered test ids.
    pub tests: Vec<String>,
    pub mutants: Vec<Mutant>,
    pub outcomes: BTreeMap<(String, String), CellStatus>,
    pub group_outcomes: BTreeMap<(String, GroupConfig, String), CellStatus>,
    pub coverage: BTreeMap<(String, String), Vec<u32>>,
    /// Total character count of the mutated source units, when known.
    pub l_code: Option<u64>,
}

impl SessionData {
    pub fn from_store(store: &Store) -> SessionData {
        let l_code: u64 = store.units().iter().map(|(_, chars)| *chars).sum();
        SessionData {
            tests: store.tests().iter().map(|(id, _)| id.clone()).collect(),
            mutants: store.mutants().to_vec(),
            outcomes: store
                .outcomes()
                .iter()
                .map(|(k, (status, _))| (k.clone(), *status))
                .collect(),
            group_outcomes: store
                .group_outcomes()
                .iter()
                .map(|(k, (status, _))| (k.clone(), *status))
                .collect(),
            coverage: store.coverage().clone(),
            l_code: (!store.units().is_empty()).then_some(l_code),
        }
    }

    pub fn from_document(doc: &InterchangeDocument) -> Result<SessionData, AnalysisError> {
        crate::interchange::validate(doc)?;
        let mut outcomes = BTreeMap::new();
        let mut group_outcomes = BTreeMap::new();
        for o in &doc.outcomes {
            match o.config {
                None => {
                    outcomes.insert((o.mutant_id.clone(), o.test_id.clone()), o.status);
                }
                Some(config) => {
                    group_outcomes
                        .insert((o.mutant_id.clone(), config, o.test_id.clone()), o.status);
                }
            }
        }
        let mut coverage = BTreeMap::new();
        if let Some(entries) = &doc.coverage {
            for c in entries {
                coverage.insert(
                    (c.test_id.clone(), c.unit_path.clone()),
                    c.covered_lines.clone(),
                );
            }
        }
        let l_code: u64 = doc.units.iter().map(|u| u.char_count).sum();
        Ok(SessionData {
            tests: doc.tests.iter().map(|t| t.id.clone()).collect(),
            mutants: doc
                .mutants
                .iter()
                .map(|m| Mutant {
                    id: m.id.clone(),
                    order: m.order,
                    mutations: m.mutations.clone(),
                })
                .collect(),
            outcomes,
            group_outcomes,
            coverage,
            l_code: (!doc.units.is_empty()).then_some(l_code),
        })
    }

    pub fn is_group_only(&self) -> bool {
        self.outcomes.is_empty() && !self.group_outcomes.is_empty()
    }

    /// Assemble the kill matrix; unrecorded cells stay Missing and will trip
    /// downstream queries with a pending-cell list.
    pub fn kill_matrix(&self) -> Result<KillMatrix, AnalysisError> {
        if self.is_group_only() {
            return Err(AnalysisError::GroupSession);
        }
        let mut matrix = KillMatrix::new(
            self.tests.clone(),
            self.mutants.iter().map(|m| m.id.clone()).collect(),
        );
        for ((mutant_id, test_id), status) in &self.outcomes {
            matrix.set_cell(mutant_id, test_id, *status)?;
        }
        Ok(matrix)
    }

    /// Per-test coverage fraction: lines this test covers over the union of
    /// lines any test covers.
    pub fn coverage_fractions(&self) -> Option<BTreeMap<String, f64>> {
        if self.coverage.is_empty() {
            return None;
        }
        let mut union: BTreeMap<&str, std::collections::BTreeSet<u32>> = BTreeMap::new();
        for ((_, unit), lines) in &self.coverage {
            union.entry(unit.as_str()).or_default().extend(lines);
        }
        let total: usize = union.values().map(|s| s.len()).sum();
        if total == 0 {
            return None;
        }
        let mut fractions = BTreeMap::new();
        for test in &self.tests {
            let covered: usize = self
                .coverage
                .iter()
                .filter(|((t, _), _)| t == test)
                .map(|(_, lines)| lines.len())
                .sum();
            fractions.insert(test.clone(), covered as f64 / total as f64);
        }
        Some(fractions)
    }
}

#[derive(Debug, Clone)]
pub struct MetricsOptions {
    pub log_base: LogBase,
    /// Also report graph stats with uncertain survivors included.
    pub include_uncertain: bool,
    pub l_code_override: Option<u64>,
}

impl Default for MetricsOptions {
    fn default() -> Self {
        MetricsOptions {
            log_base: LogBase::E,
            include_uncertain: false,
            l_code_override: None,
        }
    }
}

fn profile_json(profile: &WeightProfile, tests: &[String]) -> Value {
    let weights: Vec<Value> = tests
        .iter()
        .enumerate()
        .map(|(i, t)| {
            json!({
                "test_id": t,
                "k_size": profile.k_sizes[i],
                "alpha": profile.alphas.as_ref().map(|a| a[i]),
            })
        })
        .collect();
    json!({
        "variant": profile.variant.as_str(),
        "defined": profile.alphas.is_some(),
        "weights": weights,
    })
}

fn graph_json(stats: &graphlab::ComponentStats, nodes: usize, edges: usize) -> Value {
    json!({
        "component_count": stats.component_count,
        "largest_component_size": stats.largest_component_size,
        "component_sizes": stats.component_sizes,
        "impl_component": stats.impl_component,
        "nodes": nodes,
        "edges": edges,
    })
}

/// The full metrics report over a complete matrix-mode session.
pub fn metrics_report(data: &SessionData, opts: &MetricsOptions) -> Result<Value, AnalysisError> {
    let matrix = data.kill_matrix()?;
    let base = opts.log_base;
    let all_tests: Vec<String> = matrix.tests().to_vec();

    let score = mutation_score(&matrix)?;
    let survivors = matrix.survivors(&all_tests)?;
    let (w_lower, w_upper) = (survivors.w_lower(), survivors.w_upper());
    let log_of = |w: u64| (w >= 1).then(|| base.log(w as f64));

    let unique_sizes: Vec<u64> = all_tests
        .iter()
        .map(|t| matrix.uniquely_killed(t).map(|s| s.len() as u64))
        .collect::<Result<_, _>>()?;
    let alone_sizes: Vec<u64> = all_tests
        .iter()
        .map(|t| matrix.killed_alone(t).map(|s| s.len() as u64))
        .collect::<Result<_, _>>()?;
    let unique_profile = information_weights(&unique_sizes, WeightVariant::Unique);
    let alone_profile = information_weights(&alone_sizes, WeightVariant::RunAlone);
    // Total overlap: every kill is shared, so unique weights are undefined.
    // The run-alone variant is the prescribed fallback; the report labels it.
    let selected = if unique_profile.alphas.is_some() {
        &unique_profile
    } else {
        &alone_profile
    };
    let mti1 = entropy::mti1(&selected.k_sizes);
    let mti2 = entropy::mti2(selected).ok();

    let l_code = opts.l_code_override.or(data.l_code);
    let w0 = matrix.mutants().len() as u64;
    let sed_loc = match (l_code, w_lower) {
        (Some(l), w) if l >= 1 && w >= 1 => {
            Some(entropy::sed_local(w0, w, l, base)?.value)
        }
        _ => None,
    };

    let group_views: Vec<Value> = matrix
        .group_views()?
        .iter()
        .map(|v| {
            json!({
                "test_id": v.test_id,
                "only_confirmed": v.only.w_lower(),
                "only_uncertain": v.only.uncertain.len(),
                "except_confirmed": v.except.w_lower(),
                "except_uncertain": v.except.uncertain.len(),
            })
        })
        .collect();

    // Graph stats need edit descriptors for every mutant; imported documents
    // may omit them, in which case the graph section is null.
    let descriptors_known = data
        .mutants
        .iter()
        .all(|m| m.mutations.len() == m.order);
    let (graph, graph_with_uncertain) = if descriptors_known && !data.mutants.is_empty() {
        let full = graphlab::build_graph(&data.mutants, true)?;
        let confirmed_sub = full.induced_subgraph(&survivors.confirmed)?;
        let confirmed_stats = confirmed_sub.component_stats();
        let confirmed_json = graph_json(
            &confirmed_stats,
            confirmed_sub.node_count(),
            confirmed_sub.edge_count(),
        );
        let with_uncertain = if opts.include_uncertain {
            let mut union = survivors.confirmed.clone();
            union.extend(survivors.uncertain.iter().cloned());
            let sub = full.induced_subgraph(&union)?;
            let stats = sub.component_stats();
            Some(graph_json(&stats, sub.node_count(), sub.edge_count()))
        } else {
            None
        };
        (confirmed_json, with_uncertain)
    } else {
        (Value::Null, None)
    };

    let mut report = json!({
        "schema_version": 1,
        "log_base": base.as_str(),
        "counts": {
            "tests": all_tests.len(),
            "mutants": matrix.mutants().len(),
            "cells": all_tests.len() * matrix.mutants().len(),
        },
        "mutation_score": {
            "total": score.total,
            "killed": score.killed,
            "timeout_unresolved": score.timeout_unresolved,
            "lower": score.lower,
            "upper": score.upper,
        },
        "entropy": {
            "w_lower": w_lower,
            "w_upper": w_upper,
            "s_point": log_of(w_lower),
            "s_lower": log_of(w_lower),
            "s_upper": log_of(w_upper),
        },
        "alpha": profile_json(selected, &all_tests),
        "alpha_variants": {
            "unique": profile_json(&unique_profile, &all_tests),
            "run_alone": profile_json(&alone_profile, &all_tests),
        },
        "mti1": mti1,
        "mti2": mti2,
        "sed_loc": sed_loc,
        "group_views": group_views,
        "graph": graph,
    });

    if let Some(g) = graph_with_uncertain {
        report["graph_with_uncertain"] = g;
    }
    if let Some(fractions) = data.coverage_fractions() {
        let rows = entropy::coverage_contrast(selected, &all_tests, &fractions)?;
        report["coverage_contrast"] = serde_json::to_value(rows).expect("rows serialize");
    }
    Ok(report)
}

/// How to order tests along the curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveOrdering {
    /// Discovery/declaration order (the default).
    Declaration,
    Reverse,
    /// Descending run-alone kill count |K'_i|, ties by declaration order.
    Impact,
    Explicit(Vec<String>),
}

pub fn resolve_ordering(
    data: &SessionData,
    matrix: &KillMatrix,
    ordering: &CurveOrdering,
) -> Result<Vec<String>, AnalysisError> {
    match ordering {
        CurveOrdering::Declaration => Ok(data.tests.clone()),
        CurveOrdering::Reverse => Ok(data.tests.iter().rev().cloned().collect()),
        CurveOrdering::Impact => {
            let mut keyed: Vec<(usize, u64, String)> = Vec::with_capacity(data.tests.len());
            for (i, t) in data.tests.iter().enumerate() {
                let kills = matrix.killed_alone(t)?.len() as u64;
                keyed.push((i, kills, t.clone()));
            }
            keyed.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            Ok(keyed.into_iter().map(|(_, _, t)| t).collect())
        }
        CurveOrdering::Explicit(tests) => {
            matrix.check_ordering(tests).map_err(|_| {
                AnalysisError::BadExplicitOrdering(tests.clone())
            })?;
            Ok(tests.clone())
        }
    }
}

pub fn curve_report(
    data: &SessionData,
    ordering: &CurveOrdering,
    base: LogBase,
) -> Result<EntropyCurve, AnalysisError> {
    let matrix = data.kill_matrix()?;
    let resolved = resolve_ordering(data, &matrix, ordering)?;
    Ok(entropy_curve(&matrix, &resolved, base)?)
}

pub const CURVE_CSV_HEADER: &str = "i,w_lower,w_upper,s_lower,s_point,s_upper";
pub const WEIGHTS_CSV_HEADER: &str = "test_id,k_size,alpha,variant";

/// Weight-profile rows in declaration order; the alpha cell is empty when
/// the profile is undefined.
pub fn weights_to_csv(profile: &WeightProfile, test_ids: &[String]) -> String {
    let mut out = String::from(WEIGHTS_CSV_HEADER);
    out.push('\n');
    for (i, test_id) in test_ids.iter().enumerate() {
        let alpha = profile
            .alphas
            .as_ref()
            .map(|a| crate::canon::format_float(a[i]))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            test_id,
            profile.k_sizes[i],
            alpha,
            profile.variant.as_str(),
        ));
    }
    out
}

fn csv_cell(v: Option<f64>) -> String {
    v.map(crate::canon::format_float).unwrap_or_default()
}

/// CSV plot data; S columns are empty at zero-survivor points (the marker).
pub fn curve_to_csv(curve: &EntropyCurve) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.index,
            p.w_lower,
            p.w_upper,
            csv_cell(p.s_lower),
            csv_cell(p.s_point),
            csv_cell(p.s_upper),
        ));
    }
    out
}

/// Exact trajectories share the curve CSV schema; the oracle has no
/// uncertainty so the W and S bounds coincide.
pub fn trajectory_to_csv(trajectory: &Trajectory) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for step in &trajectory.steps {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            step.index,
            step.w,
            step.w,
            csv_cell(step.s),
            csv_cell(step.s),
            csv_cell(step.s),
        ));
    }
    out
}

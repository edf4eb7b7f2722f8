//! The lab command: exact trajectory over a declarative toy space, plus a
//! cross-validation run that rebuilds the same numbers through the kill
//! matrix + entropy curve path and reports agreement point by point.

use std::path::PathBuf;

use mutent::analysis::trajectory_to_csv;
use mutent::canon;
use mutent::entropy::{entropy_curve, LogBase};
use mutent::matrix::{CellStatus, KillMatrix};
use mutent::spacelab::{
    defect_fraction, enumerate_feasible, exact_entropy, nested_entropy_trajectory, Distribution,
    SpaceConfig,
};

use crate::{exit_codes, CmdError};

const AGREEMENT_TOL: f64 = 1e-12;
const MATRIX_CELL_CAP: u128 = 5_000_000;

fn program_id(program: &[u8]) -> String {
    program.iter().map(|s| s.to_string()).collect()
}

pub fn cmd_lab(space_file: &PathBuf, log_base: LogBase, format: &str) -> Result<(), CmdError> {
    let text = std::fs::read_to_string(space_file)
        .map_err(|e| CmdError::new(1, format!("cannot read {}: {e}", space_file.display())))?;
    let config: SpaceConfig =
        serde_json::from_str(&text).map_err(|e| CmdError::new(1, format!("bad space config: {e}")))?;
    let space = config.space();

    let trajectory = nested_entropy_trajectory(&space, &config.predicates, log_base)
        .map_err(|e| CmdError::new(exit_codes::INCOMPLETE, e.to_string()))?;

    // Cross-validation: treat every valid program as a "mutant" and every
    // predicate as a "test"; the curve over the induced matrix must retrace
    // the exact trajectory.
    let (w0, programs) = enumerate_feasible(&space, &[], true)
        .map_err(|e| CmdError::new(exit_codes::INCOMPLETE, e.to_string()))?;
    let programs = programs.expect("materialized");
    let cells = w0 as u128 * config.predicates.len().max(1) as u128;
    if cells > MATRIX_CELL_CAP {
        return Err(CmdError::new(
            exit_codes::INCOMPLETE,
            format!("cross-validation matrix would need {cells} cells"),
        ));
    }
    let test_names: Vec<String> = config.predicates.iter().map(|p| p.name.clone()).collect();
    let program_ids: Vec<String> = programs.iter().map(|p| program_id(p)).collect();
    let mut matrix = KillMatrix::new(test_names.clone(), program_ids.clone());
    for (program, id) in programs.iter().zip(&program_ids) {
        for predicate in &config.predicates {
            let status = if predicate.eval(program) {
                CellStatus::Pass
            } else {
                CellStatus::Fail
            };
            matrix
                .set_cell(id, &predicate.name, status)
                .expect("declared ids");
        }
    }
    let curve = entropy_curve(&matrix, &test_names, log_base)
        .map_err(|e| CmdError::new(exit_codes::INCOMPLETE, e.to_string()))?;

    let mut all_agree = true;
    let mut points = Vec::new();
    for (step, point) in trajectory.steps.iter().zip(&curve.points) {
        let w_agree = step.w == point.w_lower && step.w == point.w_upper;
        let s_agree = match (step.s, point.s_point) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).abs() <= AGREEMENT_TOL,
            _ => false,
        };
        all_agree &= w_agree && s_agree;
        points.push(serde_json::json!({
            "i": step.index,
            "w_exact": step.w,
            "w_curve": point.w_lower,
            "s_exact": step.s,
            "s_curve": point.s_point,
            "agree": w_agree && s_agree,
        }));
    }

    // Optional extras over the fully refined feasible set.
    let (w_final, feasible) = enumerate_feasible(&space, &config.predicates, true)
        .map_err(|e| CmdError::new(exit_codes::INCOMPLETE, e.to_string()))?;
    let feasible = feasible.expect("materialized");
    let fraction = match &config.labeling {
        Some(labeling) if w_final > 0 => Some(
            defect_fraction(&feasible, labeling)
                .map_err(|e| CmdError::new(2, e.to_string()))?,
        ),
        _ => None,
    };
    let mu_check = match &config.mu {
        Some(table) if w_final > 0 => {
            let h = exact_entropy(w_final, &Distribution::Explicit(table.clone()), log_base)
                .map_err(|e| CmdError::new(1, e.to_string()))?;
            let log_w = log_base.log(w_final as f64);
            Some(serde_json::json!({
                "h": h,
                "log_w": log_w,
                "within_bound": h <= log_w + AGREEMENT_TOL,
            }))
        }
        _ => None,
    };

    match format {
        "csv" => {
            print!("{}", trajectory_to_csv(&trajectory));
            eprintln!(
                "cross-validation: {} ({} points)",
                if all_agree { "AGREE" } else { "DISAGREE" },
                points.len()
            );
            if let Some(f) = fraction {
                eprintln!("benign fraction over final feasible set: {f}");
            }
        }
        "json" => {
            let report = serde_json::json!({
                "log_base": log_base.as_str(),
                "agree": all_agree,
                "points": points,
                "w_final": w_final,
                "defect_fraction": fraction,
                "mu_entropy": mu_check,
            });
            println!("{}", canon::to_canonical_string(&report));
        }
        other => return Err(CmdError::new(1, format!("unknown format `{other}`"))),
    }
    if all_agree {
        Ok(())
    } else {
        Err(CmdError::new(2, "cross-validation disagreement".to_string()))
    }
}

//! Read-only analysis commands: metrics report and entropy curve. Both work
//! from a session db or directly from an interchange document.

use std::path::PathBuf;

use mutent::analysis::{
    curve_report, curve_to_csv, metrics_report, AnalysisError, CurveOrdering, MetricsOptions,
    SessionData,
};
use mutent::canon;
use mutent::entropy::{EntropyError, LogBase};
use mutent::matrix::MatrixError;
use mutent::store::Store;

use crate::{exit_codes, CmdError};

pub fn load_session(db: &Option<PathBuf>, from: &Option<PathBuf>) -> Result<SessionData, CmdError> {
    match (db, from) {
        (Some(db), None) => {
            let store = Store::open(db).map_err(|e| CmdError::new(2, e.to_string()))?;
            Ok(SessionData::from_store(&store))
        }
        (None, Some(file)) => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| CmdError::new(1, format!("cannot read {}: {e}", file.display())))?;
            let doc = mutent::interchange::parse_document(&text)
                .map_err(|e| CmdError::new(1, e.to_string()))?;
            SessionData::from_document(&doc).map_err(|e| CmdError::new(1, e.to_string()))
        }
        _ => Err(CmdError::new(
            1,
            "exactly one of --db or --from is required".to_string(),
        )),
    }
}

fn map_analysis_error(e: AnalysisError) -> CmdError {
    let incomplete = |cells: &Vec<(String, String)>| {
        CmdError::new(
            exit_codes::INCOMPLETE,
            format!("matrix incomplete: {} pending cells", cells.len()),
        )
    };
    match &e {
        AnalysisError::Matrix(MatrixError::Incomplete { cells })
        | AnalysisError::Entropy(EntropyError::Matrix(MatrixError::Incomplete { cells })) => {
            incomplete(cells)
        }
        AnalysisError::GroupSession => CmdError::new(exit_codes::INCOMPLETE, e.to_string()),
        _ => CmdError::new(2, e.to_string()),
    }
}

pub fn cmd_metrics(
    db: &Option<PathBuf>,
    from: &Option<PathBuf>,
    log_base: LogBase,
    include_uncertain: bool,
    l_code: Option<u64>,
    format: &str,
) -> Result<(), CmdError> {
    let data = load_session(db, from)?;
    let opts = MetricsOptions {
        log_base,
        include_uncertain,
        l_code_override: l_code,
    };
    match format {
        "json" => {
            let report = metrics_report(&data, &opts).map_err(map_analysis_error)?;
            println!("{}", canon::to_canonical_string(&report));
        }
        // csv emits the one tabular block of the report: the weight profile
        "csv" => {
            let matrix = data.kill_matrix().map_err(map_analysis_error)?;
            let tests: Vec<String> = matrix.tests().to_vec();
            let unique: Vec<u64> = tests
                .iter()
                .map(|t| matrix.uniquely_killed(t).map(|s| s.len() as u64))
                .collect::<Result<_, _>>()
                .map_err(|e| map_analysis_error(e.into()))?;
            let profile = if unique.iter().sum::<u64>() > 0 {
                mutent::entropy::information_weights(
                    &unique,
                    mutent::entropy::WeightVariant::Unique,
                )
            } else {
                let alone: Vec<u64> = tests
                    .iter()
                    .map(|t| matrix.killed_alone(t).map(|s| s.len() as u64))
                    .collect::<Result<_, _>>()
                    .map_err(|e| map_analysis_error(e.into()))?;
                mutent::entropy::information_weights(
                    &alone,
                    mutent::entropy::WeightVariant::RunAlone,
                )
            };
            print!("{}", mutent::analysis::weights_to_csv(&profile, &tests));
        }
        other => return Err(CmdError::new(1, format!("unknown format `{other}`"))),
    }
    Ok(())
}

pub fn parse_ordering(s: &str) -> Result<CurveOrdering, String> {
    match s {
        "declaration" => Ok(CurveOrdering::Declaration),
        "reverse" => Ok(CurveOrdering::Reverse),
        "impact" => Ok(CurveOrdering::Impact),
        other => match other.strip_prefix("file:") {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read ordering file {path}: {e}"))?;
                Ok(CurveOrdering::Explicit(
                    text.lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .map(String::from)
                        .collect(),
                ))
            }
            None => Err(format!(
                "ordering must be declaration|reverse|impact|file:PATH, got `{other}`"
            )),
        },
    }
}

pub fn cmd_curve(
    db: &Option<PathBuf>,
    from: &Option<PathBuf>,
    ordering: &str,
    log_base: LogBase,
    format: &str,
) -> Result<(), CmdError> {
    let data = load_session(db, from)?;
    let ordering = parse_ordering(ordering).map_err(|e| CmdError::new(1, e))?;
    let curve = curve_report(&data, &ordering, log_base).map_err(map_analysis_error)?;
    match format {
        "csv" => print!("{}", curve_to_csv(&curve)),
        "json" => {
            let points: Vec<serde_json::Value> = curve
                .points
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "i": p.index,
                        "w_lower": p.w_lower,
                        "w_upper": p.w_upper,
                        "s_lower": p.s_lower,
                        "s_point": p.s_point,
                        "s_upper": p.s_upper,
                    })
                })
                .collect();
            let value = serde_json::json!({
                "log_base": curve.log_base.as_str(),
                "ordering": curve.ordering,
                "points": points,
            });
            println!("{}", canon::to_canonical_string(&value));
        }
        other => return Err(CmdError::new(1, format!("unknown format `{other}`"))),
    }
    Ok(())
}

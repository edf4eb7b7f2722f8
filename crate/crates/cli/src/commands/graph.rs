//! Adjacency-list export of the mutation graph for external visualization:
//! one `a b` edge per line, isolated nodes on their own line.

use std::path::PathBuf;

use mutent::graphlab::build_graph;

use crate::commands::analyze::load_session;
use crate::{exit_codes, CmdError};

pub fn cmd_graph(
    db: &Option<PathBuf>,
    from: &Option<PathBuf>,
    full: bool,
    include_uncertain: bool,
    exclude_impl: bool,
) -> Result<(), CmdError> {
    let data = load_session(db, from)?;
    if data
        .mutants
        .iter()
        .any(|m| m.mutations.len() != m.order)
    {
        return Err(CmdError::new(
            exit_codes::INCOMPLETE,
            "session lacks edit descriptors for some mutants; no graph available".to_string(),
        ));
    }
    let graph = build_graph(&data.mutants, !exclude_impl)
        .map_err(|e| CmdError::new(2, e.to_string()))?;
    let graph = if full {
        graph
    } else {
        let matrix = data.kill_matrix().map_err(|e| {
            CmdError::new(exit_codes::INCOMPLETE, e.to_string())
        })?;
        let survivors = matrix
            .survivors(matrix.tests())
            .map_err(|e| CmdError::new(exit_codes::INCOMPLETE, e.to_string()))?;
        let mut keep = survivors.confirmed.clone();
        if include_uncertain {
            keep.extend(survivors.uncertain.iter().cloned());
        }
        graph
            .induced_subgraph(&keep)
            .map_err(|e| CmdError::new(2, e.to_string()))?
    };
    print!("{}", graph.to_edge_list());
    Ok(())
}

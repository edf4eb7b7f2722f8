//! Import and export of interchange documents.

use std::path::PathBuf;

use mutent::interchange::{
    export_document, import_into_store, parse_document, to_canonical_json, ExportOptions,
};
use mutent::store::Store;

use crate::CmdError;

pub fn cmd_export(
    db: &PathBuf,
    out: &Option<PathBuf>,
    durations: bool,
    timestamp: bool,
) -> Result<(), CmdError> {
    let store = Store::open(db).map_err(|e| CmdError::new(2, e.to_string()))?;
    let opts = ExportOptions {
        include_durations: durations,
        timestamp: timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        }),
    };
    let json = to_canonical_json(&export_document(&store, opts));
    match out {
        Some(path) => std::fs::write(path, json + "\n")
            .map_err(|e| CmdError::new(2, format!("cannot write {}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    Ok(())
}

pub fn cmd_import(file: &PathBuf, db: &PathBuf) -> Result<(), CmdError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CmdError::new(1, format!("cannot read {}: {e}", file.display())))?;
    let doc = parse_document(&text).map_err(|e| CmdError::new(1, e.to_string()))?;
    // merge into an existing session or start an import-only one
    let mut store = if db.exists() {
        Store::open(db).map_err(|e| CmdError::new(2, e.to_string()))?
    } else {
        Store::create(db, "imported", serde_json::json!({"source": "import"}))
            .map_err(|e| CmdError::new(2, e.to_string()))?
    };
    import_into_store(&doc, &mut store).map_err(|e| CmdError::new(2, e.to_string()))?;
    eprintln!(
        "imported {} tests, {} mutants, {} outcomes into {}",
        doc.tests.len(),
        doc.mutants.len(),
        doc.outcomes.len(),
        db.display()
    );
    Ok(())
}

//! Small filesystem helpers for the run command.

use std::io;
use std::path::Path;

/// Recursively copy a project tree, skipping VCS and build directories and
/// any explicitly excluded paths (the session db, when it lives inside the
/// project).
pub fn copy_tree(from: &Path, to: &Path, exclude: &[std::path::PathBuf]) -> io::Result<()> {
    std::fs::create_dir_all(to)?;
    for entry in std::fs::read_dir(from)? {
        let entry = entry?;
        let path = entry.path();
        let name = entry.file_name();
        if name == ".git" || name == "target" {
            continue;
        }
        if exclude.contains(&path) {
            continue;
        }
        let dest = to.join(&name);
        if path.is_dir() {
            copy_tree(&path, &dest, exclude)?;
        } else if path.is_file() {
            std::fs::copy(&path, &dest)?;
        }
    }
    Ok(())
}

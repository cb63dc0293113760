//! Output-file bookkeeping: every artifact funnels through one writer so a
//! failing run can remove its partial outputs, and numeric formatting is
//! pinned (6 decimals for proportions, 4 for estimates and error measures)
//! so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

pub struct OutputDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError(format!("cannot create {}: {e}", dir.display())))?;
        Ok(OutputDir { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, content)
            .map_err(|e| CliError(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Removes everything written so far; called on command failure.
    pub fn discard(&mut self) {
        for path in self.written.drain(..) {
            let _ = fs::remove_file(path);
        }
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Runs `body`, removing any partial outputs if it fails.
pub fn with_cleanup<F>(dir: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut OutputDir) -> Result<(), CliError>,
{
    let mut out = OutputDir::create(dir)?;
    match body(&mut out) {
        Ok(()) => {
            for f in out.files() {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

/// Proportion-style value: fixed 6 decimals.
pub fn prop(v: f64) -> String {
    format!("{v:.6}")
}

/// Estimate-style value: fixed 4 decimals.
pub fn est(v: f64) -> String {
    format!("{v:.4}")
}

/// Likelihood/criterion value: fixed 3 decimals.
pub fn ll(v: f64) -> String {
    format!("{v:.3}")
}

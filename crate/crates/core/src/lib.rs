//! Deep bidirectional LSTM + mixture density network for basketball
//! three-point trajectories: hit/miss classification scored by AUC at
//! distance cutoffs, and probabilistic next-point generation, trained
//! and verified on a synthetic projectile dataset with an analytic
//! hit/miss oracle.

pub mod dataforge;
pub mod error;
pub mod evalkit;
pub mod mixhead;
pub mod numcore;
pub mod seqnet;
pub mod trainer;

pub use error::{Error, Result};

use std::path::Path;

/// Write a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        std::fs::create_dir_all(dir)?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let tmp = dir.join(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

//! File and logging helpers.

use std::fs;
use std::path::Path;

use crate::RunError;

/// Atomic write: the bytes land under a temporary name in the target
/// directory and are renamed into place, so readers never observe a
/// partial artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let dir = path
        .parent()
        .ok_or_else(|| RunError::Usage(format!("no parent directory for {}", path.display())))?;
    fs::create_dir_all(dir)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| RunError::Usage(format!("no file name in {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Initializes logging from `OPTMEAS_LOG` (quiet, info, debug; default
/// info). Logs go to stderr and never touch artifacts.
pub fn init_logging() {
    let level = match std::env::var("OPTMEAS_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Info,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
}

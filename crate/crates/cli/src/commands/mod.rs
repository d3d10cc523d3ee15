pub mod analyze;
pub mod classify;
pub mod extract;
pub mod morph;
pub mod synth;
pub mod timeseries;

use std::path::Path;

use crate::errors::CliError;

pub(crate) fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)?;
    Ok(())
}

use std::path::{Path, PathBuf};
use std::process::Command;

use super::PluginError;

const PLUGIN_PACKAGE: &str = "ibr-tune-plugin";
const PLUGIN_LIB: &str = "ibr_tune_plugin";

/// Platform file name of the reference plugin library.
pub fn reference_plugin_file_name() -> String {
    format!(
        "{}{PLUGIN_LIB}{}",
        std::env::consts::DLL_PREFIX,
        std::env::consts::DLL_SUFFIX
    )
}

/// Builds the reference plugin of the workspace at `workspace` with cargo,
/// into `target_dir`, and returns the path of the shared library.
///
/// A dedicated target directory keeps this usable from inside a running
/// `cargo test`, which holds the lock on the default one.
pub fn build_reference_plugin(workspace: &Path, target_dir: &Path) -> Result<PathBuf, PluginError> {
    let cargo = std::env::var_os("CARGO").unwrap_or_else(|| "cargo".into());
    let output = Command::new(cargo)
        .current_dir(workspace)
        .args(["build", "--quiet", "--package", PLUGIN_PACKAGE, "--lib"])
        .env("CARGO_TARGET_DIR", target_dir)
        .output()
        .map_err(|e| PluginError::Build(format!("cannot run cargo: {e}")))?;
    if !output.status.success() {
        return Err(PluginError::Build(String::from_utf8_lossy(&output.stderr).into_owned()));
    }
    let lib = target_dir.join("debug").join(reference_plugin_file_name());
    if !lib.is_file() {
        return Err(PluginError::Build(format!("{} was not produced", lib.display())));
    }
    Ok(lib)
}

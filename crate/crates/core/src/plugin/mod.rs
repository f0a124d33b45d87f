//! C ABI for environment plugins and the host-side loader.
//!
//! A plugin is a shared library exporting:
//!
//! ```c
//! uint32_t env_api_version(void);
//! uint64_t env_create(const uint8_t *config_utf8, size_t len);   /* 0 on failure */
//! uint32_t env_obs_dim(uint64_t handle);
//! uint32_t env_act_dim(uint64_t handle);
//! int32_t  env_reset(uint64_t handle, uint64_t seed, double *obs_out);
//! int32_t  env_step(uint64_t handle, const double *act_in, double *obs_out,
//!                   double *reward_out, uint8_t *terminated_out, uint8_t *truncated_out);
//! void     env_destroy(uint64_t handle);
//! ```
//!
//! The config is a run-config TOML document. All arrays are owned by the
//! caller and sized to the advertised dimensions. A status of 0 means success.

mod build;

pub use build::{build_reference_plugin, reference_plugin_file_name};

use std::path::{Path, PathBuf};
use std::sync::Arc;

use libloading::Library;
use thiserror::Error;

use crate::env::{Environment, StepInfo, StepResult};
use crate::error::Result;

/// Version of the interface described above.
pub const ENV_API_VERSION: u32 = 1;

/// Status codes returned by `env_reset` and `env_step`.
pub mod status {
    pub const OK: i32 = 0;
    /// The handle was never issued or has been destroyed.
    pub const INVALID_HANDLE: i32 = 1;
    pub const NULL_POINTER: i32 = 2;
    /// The environment refused the call (stepping a finished episode, bad
    /// action length, numerical divergence).
    pub const ENV_ERROR: i32 = 3;
    /// The plugin caught a panic.
    pub const PANIC: i32 = 4;

    pub fn describe(code: i32) -> &'static str {
        match code {
            OK => "ok",
            INVALID_HANDLE => "invalid or destroyed handle",
            NULL_POINTER => "null buffer pointer",
            ENV_ERROR => "environment error",
            PANIC => "panic inside plugin",
            _ => "unknown status",
        }
    }
}

pub type ApiVersionFn = unsafe extern "C" fn() -> u32;
pub type CreateFn = unsafe extern "C" fn(*const u8, usize) -> u64;
pub type DimFn = unsafe extern "C" fn(u64) -> u32;
pub type ResetFn = unsafe extern "C" fn(u64, u64, *mut f64) -> i32;
pub type StepFn = unsafe extern "C" fn(u64, *const f64, *mut f64, *mut f64, *mut u8, *mut u8) -> i32;
pub type DestroyFn = unsafe extern "C" fn(u64);

#[derive(Debug, Error)]
pub enum PluginError {
    #[error("cannot load plugin {path}: {source}")]
    Load {
        path: PathBuf,
        #[source]
        source: libloading::Error,
    },
    #[error("plugin {path} does not export `{symbol}`")]
    MissingSymbol { path: PathBuf, symbol: &'static str },
    #[error("plugin {path} implements interface version {found}, expected {expected}")]
    VersionMismatch { path: PathBuf, found: u32, expected: u32 },
    #[error("plugin rejected the environment config")]
    CreateFailed,
    #[error("plugin reported dimensions obs {obs} / act {act}")]
    BadDimensions { obs: u32, act: u32 },
    #[error("{function} returned status {status} ({})", status::describe(*status))]
    Call { function: &'static str, status: i32 },
    #[error("action has {got} elements, plugin expects {expected}")]
    ActionLength { got: usize, expected: usize },
    #[error("cannot build reference plugin: {0}")]
    Build(String),
}

/// A loaded plugin library with its resolved entry points.
pub struct PluginLibrary {
    path: PathBuf,
    create: CreateFn,
    obs_dim: DimFn,
    act_dim: DimFn,
    reset: ResetFn,
    step: StepFn,
    destroy: DestroyFn,
    // Keeps the function pointers above valid.
    _lib: Library,
}

impl std::fmt::Debug for PluginLibrary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PluginLibrary").field("path", &self.path).finish_non_exhaustive()
    }
}

impl PluginLibrary {
    /// Opens `path`, checks the interface version and resolves the remaining
    /// symbols. No other export is touched before the version check passes.
    pub fn load(path: &Path) -> Result<Arc<Self>, PluginError> {
        let path = path.to_path_buf();
        // SAFETY: loading runs the library's initializers; plugins are trusted.
        let lib = unsafe { Library::new(&path) }.map_err(|source| PluginError::Load {
            path: path.clone(),
            source,
        })?;

        let version: ApiVersionFn = symbol(&lib, &path, "env_api_version")?;
        // SAFETY: signature fixed by the interface.
        let found = unsafe { version() };
        if found != ENV_API_VERSION {
            return Err(PluginError::VersionMismatch {
                path,
                found,
                expected: ENV_API_VERSION,
            });
        }

        Ok(Arc::new(PluginLibrary {
            create: symbol(&lib, &path, "env_create")?,
            obs_dim: symbol(&lib, &path, "env_obs_dim")?,
            act_dim: symbol(&lib, &path, "env_act_dim")?,
            reset: symbol(&lib, &path, "env_reset")?,
            step: symbol(&lib, &path, "env_step")?,
            destroy: symbol(&lib, &path, "env_destroy")?,
            path,
            _lib: lib,
        }))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Creates an environment from run-config TOML text.
    pub fn create(self: &Arc<Self>, config_toml: &str) -> Result<PluginEnv, PluginError> {
        // SAFETY: pointer/length describe a live byte slice.
        let handle = unsafe { (self.create)(config_toml.as_ptr(), config_toml.len()) };
        if handle == 0 {
            return Err(PluginError::CreateFailed);
        }
        // SAFETY: handle was just issued.
        let (obs, act) = unsafe { ((self.obs_dim)(handle), (self.act_dim)(handle)) };
        if obs == 0 || act == 0 {
            // SAFETY: handle is live and destroyed exactly once.
            unsafe { (self.destroy)(handle) };
            return Err(PluginError::BadDimensions { obs, act });
        }
        Ok(PluginEnv {
            lib: Arc::clone(self),
            handle,
            obs_dim: obs as usize,
            act_dim: act as usize,
            alive: true,
        })
    }
}

fn symbol<T: Copy>(lib: &Library, path: &Path, name: &'static str) -> Result<T, PluginError> {
    // SAFETY: the caller names the interface type of `name`.
    unsafe { lib.get::<T>(name.as_bytes()) }
        .map(|s| *s)
        .map_err(|_| PluginError::MissingSymbol {
            path: path.to_path_buf(),
            symbol: name,
        })
}

/// Loads `path` and creates one environment from `config_toml`.
pub fn load_plugin(path: &Path, config_toml: &str) -> Result<PluginEnv, PluginError> {
    PluginLibrary::load(path)?.create(config_toml)
}

/// Environment living behind a plugin handle. Step diagnostics are not
/// transported, so [`StepResult::info`] is left at its default.
#[derive(Debug)]
pub struct PluginEnv {
    lib: Arc<PluginLibrary>,
    handle: u64,
    obs_dim: usize,
    act_dim: usize,
    alive: bool,
}

impl PluginEnv {
    pub fn handle(&self) -> u64 {
        self.handle
    }

    /// Destroys the handle now. Later calls report [`status::INVALID_HANDLE`].
    pub fn destroy(&mut self) {
        if self.alive {
            // SAFETY: handle is live and destroyed exactly once.
            unsafe { (self.lib.destroy)(self.handle) };
            self.alive = false;
        }
    }

    /// Raw step through the ABI even if the handle was destroyed; used to
    /// exercise the plugin's defensive checks.
    pub fn raw_step(&mut self, action: &[f64]) -> std::result::Result<StepResult, PluginError> {
        if action.len() != self.act_dim {
            return Err(PluginError::ActionLength {
                got: action.len(),
                expected: self.act_dim,
            });
        }
        let mut obs = vec![0.0; self.obs_dim];
        let mut reward = 0.0;
        let (mut term, mut trunc) = (0u8, 0u8);
        // SAFETY: buffers are sized to the advertised dimensions.
        let code = unsafe {
            (self.lib.step)(
                self.handle,
                action.as_ptr(),
                obs.as_mut_ptr(),
                &mut reward,
                &mut term,
                &mut trunc,
            )
        };
        if code != status::OK {
            return Err(PluginError::Call {
                function: "env_step",
                status: code,
            });
        }
        Ok(StepResult {
            obs,
            reward,
            terminated: term != 0,
            truncated: trunc != 0,
            info: StepInfo::default(),
        })
    }
}

impl Drop for PluginEnv {
    fn drop(&mut self) {
        self.destroy();
    }
}

impl Environment for PluginEnv {
    fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    fn act_dim(&self) -> usize {
        self.act_dim
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        let mut obs = vec![0.0; self.obs_dim];
        // SAFETY: buffer is sized to the advertised dimension.
        let code = unsafe { (self.lib.reset)(self.handle, seed, obs.as_mut_ptr()) };
        if code != status::OK {
            return Err(PluginError::Call {
                function: "env_reset",
                status: code,
            }
            .into());
        }
        Ok(obs)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        Ok(self.raw_step(action)?)
    }
}

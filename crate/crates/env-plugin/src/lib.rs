//! Reference environment plugin: the in-process [`GainEnv`] exported through
//! the C interface defined in `ibr_tune::plugin`.
//!
//! Handles are registry ids, never pointers, so a stale or forged handle is
//! reported with a status code instead of touching freed memory.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock, Mutex};

use ibr_tune::config::RunConfig;
use ibr_tune::env::{Environment, GainEnv};
use ibr_tune::plugin::{status, ENV_API_VERSION};

type Slot = Arc<Mutex<GainEnv>>;

static REGISTRY: LazyLock<Mutex<HashMap<u64, Slot>>> = LazyLock::new(Default::default);
static NEXT_HANDLE: AtomicU64 = AtomicU64::new(1);

fn lookup(handle: u64) -> Option<Slot> {
    REGISTRY.lock().ok()?.get(&handle).cloned()
}

/// Runs `f` on the environment behind `handle`, translating panics and
/// poisoned locks into status codes.
fn with_env(handle: u64, f: impl FnOnce(&mut GainEnv) -> i32) -> i32 {
    let Some(slot) = lookup(handle) else {
        return status::INVALID_HANDLE;
    };
    catch_unwind(AssertUnwindSafe(|| match slot.lock() {
        Ok(mut env) => f(&mut env),
        Err(_) => status::PANIC,
    }))
    .unwrap_or(status::PANIC)
}

#[no_mangle]
pub extern "C" fn env_api_version() -> u32 {
    ENV_API_VERSION
}

/// # Safety
/// `config_utf8` must point to `len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn env_create(config_utf8: *const u8, len: usize) -> u64 {
    if config_utf8.is_null() {
        return 0;
    }
    let bytes = std::slice::from_raw_parts(config_utf8, len);
    let built = catch_unwind(|| {
        let text = std::str::from_utf8(bytes).ok()?;
        let cfg = RunConfig::from_toml_str(text, None).ok()?;
        GainEnv::new(cfg.plant, cfg.env).ok()
    });
    let Ok(Some(env)) = built else {
        return 0;
    };
    let handle = NEXT_HANDLE.fetch_add(1, Ordering::Relaxed);
    match REGISTRY.lock() {
        Ok(mut reg) => {
            reg.insert(handle, Arc::new(Mutex::new(env)));
            handle
        }
        Err(_) => 0,
    }
}

#[no_mangle]
pub extern "C" fn env_obs_dim(handle: u64) -> u32 {
    lookup(handle).and_then(|s| s.lock().ok().map(|e| e.obs_dim() as u32)).unwrap_or(0)
}

#[no_mangle]
pub extern "C" fn env_act_dim(handle: u64) -> u32 {
    lookup(handle).and_then(|s| s.lock().ok().map(|e| e.act_dim() as u32)).unwrap_or(0)
}

/// # Safety
/// `obs_out` must have room for `env_obs_dim(handle)` values.
#[no_mangle]
pub unsafe extern "C" fn env_reset(handle: u64, seed: u64, obs_out: *mut f64) -> i32 {
    if obs_out.is_null() {
        return status::NULL_POINTER;
    }
    with_env(handle, |env| match Environment::reset(env, seed) {
        Ok(obs) => {
            std::slice::from_raw_parts_mut(obs_out, obs.len()).copy_from_slice(&obs);
            status::OK
        }
        Err(_) => status::ENV_ERROR,
    })
}

/// # Safety
/// `act_in` must hold `env_act_dim(handle)` values and `obs_out` must have
/// room for `env_obs_dim(handle)`; the scalar outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn env_step(
    handle: u64,
    act_in: *const f64,
    obs_out: *mut f64,
    reward_out: *mut f64,
    terminated_out: *mut u8,
    truncated_out: *mut u8,
) -> i32 {
    if act_in.is_null()
        || obs_out.is_null()
        || reward_out.is_null()
        || terminated_out.is_null()
        || truncated_out.is_null()
    {
        return status::NULL_POINTER;
    }
    with_env(handle, |env| {
        let action = std::slice::from_raw_parts(act_in, env.act_dim());
        match Environment::step(env, action) {
            Ok(r) => {
                std::slice::from_raw_parts_mut(obs_out, r.obs.len()).copy_from_slice(&r.obs);
                *reward_out = r.reward;
                *terminated_out = r.terminated as u8;
                *truncated_out = r.truncated as u8;
                status::OK
            }
            Err(_) => status::ENV_ERROR,
        }
    })
}

/// Releases `handle`. Unknown handles are ignored.
#[no_mangle]
pub extern "C" fn env_destroy(handle: u64) {
    if let Ok(mut reg) = REGISTRY.lock() {
        reg.remove(&handle);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn create(text: &str) -> u64 {
        unsafe { env_create(text.as_ptr(), text.len()) }
    }

    #[test]
    fn bad_config_yields_null_handle() {
        assert_eq!(create("nonsense = ["), 0);
        assert_eq!(create("[env]\nunknown = 1"), 0);
        assert_eq!(unsafe { env_create(std::ptr::null(), 0) }, 0);
    }

    #[test]
    fn dims_follow_model() {
        let h = create("");
        assert_eq!((env_obs_dim(h), env_act_dim(h)), (8, 2));
        env_destroy(h);
        let h = create("model = \"adaptive\"");
        assert_eq!((env_obs_dim(h), env_act_dim(h)), (4, 2));
        env_destroy(h);
        assert_eq!(env_obs_dim(h), 0);
    }

    #[test]
    fn calls_after_destroy_fail() {
        let h = create("");
        let mut obs = [0.0; 8];
        assert_eq!(unsafe { env_reset(h, 0, obs.as_mut_ptr()) }, status::OK);
        env_destroy(h);
        env_destroy(h);
        let (mut r, mut te, mut tr) = (0.0, 0u8, 0u8);
        let act = [1.0, 0.0];
        let code = unsafe { env_step(h, act.as_ptr(), obs.as_mut_ptr(), &mut r, &mut te, &mut tr) };
        assert_eq!(code, status::INVALID_HANDLE);
        assert_eq!(unsafe { env_reset(h, 0, obs.as_mut_ptr()) }, status::INVALID_HANDLE);
    }

    #[test]
    fn rejected_action_is_env_error() {
        let h = create("");
        let mut obs = [0.0; 8];
        let (mut r, mut te, mut tr) = (0.0, 0u8, 0u8);
        let act = [f64::NAN, 0.0];
        let code = unsafe { env_step(h, act.as_ptr(), obs.as_mut_ptr(), &mut r, &mut te, &mut tr) };
        env_destroy(h);
        assert_eq!(code, status::ENV_ERROR);
    }

    #[test]
    fn null_buffers_rejected() {
        let h = create("");
        assert_eq!(unsafe { env_reset(h, 0, std::ptr::null_mut()) }, status::NULL_POINTER);
        env_destroy(h);
    }
}

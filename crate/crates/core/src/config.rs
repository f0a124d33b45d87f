//! Run configuration: one TOML document with `[plant]`, `[env]`, `[ppo]` and
//! `[workers]` tables plus a few top-level keys.
//!
//! Resolution order, lowest first: built-in defaults of the selected model,
//! the config file, command-line flags. Every key of a table may be omitted;
//! unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, Variant};
use crate::error::{Error, Result};
use crate::parallel::WorkerPoolConfig;
use crate::ppo::{PpoConfig, TrainSetup};
use crate::sim::PlantParams;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_VAR: &str = "IBR_TUNE_OUT";
/// Output root used when [`OUTPUT_ROOT_VAR`] is unset.
pub const DEFAULT_OUTPUT_ROOT: &str = "runs";
/// File name of the resolved config echoed into every run directory.
pub const RESOLVED_CONFIG_FILE: &str = "config.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Variant,
    /// Run directory. Defaults to `<output root>/<model>-seed<seed>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Shared library providing the environment instead of the in-process one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plugin: Option<PathBuf>,
    pub plant: PlantParams,
    pub env: EnvConfig,
    pub ppo: PpoConfig,
    pub workers: WorkerPoolConfig,
}

impl RunConfig {
    pub fn defaults(model: Variant) -> Self {
        RunConfig {
            model,
            output_dir: None,
            plugin: None,
            plant: PlantParams::default(),
            env: EnvConfig::for_variant(model),
            ppo: PpoConfig::for_variant(model),
            workers: WorkerPoolConfig::default(),
        }
    }

    /// Parses `text` over the defaults of its model. `model` overrides the
    /// document's `model` key; with neither, the fixed-gain model is used.
    pub fn from_toml_str(text: &str, model: Option<Variant>) -> Result<Self> {
        let doc: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        let file_model = match doc.get("model") {
            Some(v) => Some(
                v.as_str()
                    .ok_or_else(|| Error::Config("model must be a string".into()))?
                    .parse::<Variant>()?,
            ),
            None => None,
        };
        let model = model.or(file_model).unwrap_or(Variant::FixedGain);

        let mut merged = toml::Value::try_from(Self::defaults(model))
            .map_err(|e| Error::Config(format!("cannot encode defaults: {e}")))?;
        merge(&mut merged, toml::Value::Table(doc));
        if let toml::Value::Table(t) = &mut merged {
            t.insert("model".into(), toml::Value::String(model.name().into()));
        }
        let cfg: RunConfig = merged
            .try_into()
            .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        if cfg.env.variant != cfg.model {
            return Err(Error::Config(format!(
                "env.variant {} does not match model {}",
                cfg.env.variant, cfg.model
            )));
        }
        Ok(cfg)
    }

    /// Loads `path`, or the bare defaults when no file is given.
    pub fn load(path: Option<&Path>, model: Option<Variant>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io_path(p, e))?;
                Self::from_toml_str(&text, model)
            }
            None => Ok(Self::defaults(model.unwrap_or(Variant::FixedGain))),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot encode config: {e}")))
    }

    /// Checks every section. Seeds must fit a TOML integer so the resolved
    /// config can be written back.
    pub fn validate(&self) -> Result<()> {
        if i64::try_from(self.ppo.seed).is_err() {
            return Err(Error::Config(format!("seed {} exceeds {}", self.ppo.seed, i64::MAX)));
        }
        self.train_setup().validate()
    }

    pub fn train_setup(&self) -> TrainSetup {
        TrainSetup {
            plant: self.plant.clone(),
            env: self.env.clone(),
            ppo: self.ppo.clone(),
            workers: self.workers.clone(),
        }
    }

    /// The configured run directory, or the default one under the output root.
    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| {
            output_root().join(format!("{}-seed{}", self.model, self.ppo.seed))
        })
    }

    /// Writes the resolved config to `dir/config.toml`.
    pub fn write_resolved(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io_path(dir, e))?;
        let path = dir.join(RESOLVED_CONFIG_FILE);
        std::fs::write(&path, self.to_toml()?).map_err(|e| Error::io_path(&path, e))?;
        Ok(path)
    }
}

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

/// Recursive table merge; anything other than a table is replaced.
fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_fixed_defaults() {
        let cfg = RunConfig::from_toml_str("", None).unwrap();
        assert_eq!(cfg, RunConfig::defaults(Variant::FixedGain));
    }

    #[test]
    fn adaptive_defaults_use_short_batches() {
        let cfg = RunConfig::from_toml_str("model = \"adaptive\"", None).unwrap();
        assert_eq!(cfg.ppo.n_steps, 1024);
        assert_eq!(cfg.env.decimation, 20);
    }

    #[test]
    fn partial_tables_merge_over_defaults() {
        let cfg = RunConfig::from_toml_str("[ppo]\nseed = 7\n[plant]\nr_load = 2.0\n", None).unwrap();
        assert_eq!(cfg.ppo.seed, 7);
        assert_eq!(cfg.ppo.n_steps, 4800);
        assert_eq!(cfg.plant.r_load, 2.0);
        assert_eq!(cfg.plant.gfl_lf, PlantParams::default().gfl_lf);
    }

    #[test]
    fn flag_overrides_file_model() {
        let cfg = RunConfig::from_toml_str("model = \"fixed\"", Some(Variant::AdaptiveGain)).unwrap();
        assert_eq!(cfg.model, Variant::AdaptiveGain);
        assert_eq!(cfg.env.variant, Variant::AdaptiveGain);
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in ["bogus = 1", "[ppo]\nlearning_rat = 0.1", "[extra]\nx = 1"] {
            assert!(matches!(RunConfig::from_toml_str(text, None), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn mismatched_variant_rejected() {
        let err = RunConfig::from_toml_str("[env]\nvariant = \"adaptive_gain\"", None).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn resolved_text_round_trips() {
        for model in [Variant::FixedGain, Variant::AdaptiveGain] {
            let mut cfg = RunConfig::defaults(model);
            cfg.output_dir = Some("out/a".into());
            cfg.ppo.seed = 3;
            let text = cfg.to_toml().unwrap();
            assert_eq!(RunConfig::from_toml_str(&text, None).unwrap(), cfg);
        }
    }
}

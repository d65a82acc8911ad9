//! Session configuration, read from TOML.
//!
//! ```toml
//! [dataset]
//! path = "data/iris.csv"        # omit for the bundled data
//!
//! [model]
//! kind = "decision_tree"        # or "logistic_regression"
//! max_depth = 3
//! # path = "model.json"         # load instead of training
//!
//! [seeds]
//! train = 7
//! explain = 0                   # used when a request carries no seed
//!
//! [server]
//! host = "127.0.0.1"
//! port = 8080                   # XPLAIN_PORT overrides
//!
//! [cache]
//! dir = "cache"                 # omit for an in-memory cache
//! capacity = 1024
//! ```
//!
//! `[lime]`, `[shap]`, `[anchors]` and `[counterfactuals]` tables override
//! the explainer defaults field by field.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xplain_core::anchors::AnchorConfig;
use xplain_core::counterfactual::CfConfig;
use xplain_core::lime::LimeConfig;
use xplain_core::{Hyperparams, ModelKind};

use crate::error::AppError;
use crate::json::unknown_key;

pub const PORT_ENV: &str = "XPLAIN_PORT";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub dataset: DatasetSection,
    pub model: ModelSection,
    pub seeds: SeedSection,
    pub server: ServerSection,
    pub cache: CacheSection,
    pub lime: LimeConfig,
    pub shap: ShapSection,
    pub anchors: AnchorConfig,
    pub counterfactuals: CfConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub max_depth: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub path: Option<PathBuf>,
}

impl Default for ModelSection {
    fn default() -> Self {
        let h = Hyperparams::default();
        Self {
            kind: ModelKind::DecisionTree,
            max_depth: h.max_depth,
            iterations: h.iterations,
            learning_rate: h.learning_rate,
            path: None,
        }
    }
}

impl ModelSection {
    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            max_depth: self.max_depth,
            iterations: self.iterations,
            learning_rate: self.learning_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedSection {
    pub train: u64,
    pub explain: u64,
}

impl Default for SeedSection {
    fn default() -> Self {
        Self { train: 7, explain: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerSection {
    pub host: String,
    pub port: u16,
}

impl Default for ServerSection {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: 8080,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheSection {
    pub dir: Option<PathBuf>,
    pub capacity: usize,
}

impl Default for CacheSection {
    fn default() -> Self {
        Self {
            dir: None,
            capacity: 1024,
        }
    }
}

/// SHAP settings; the background itself is sampled from the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapSection {
    pub background_size: usize,
    pub exact_max_features: usize,
    pub n_coalition_samples: usize,
}

impl Default for ShapSection {
    fn default() -> Self {
        Self {
            background_size: xplain_core::shap::DEFAULT_BACKGROUND_SIZE,
            exact_max_features: 12,
            n_coalition_samples: 2048,
        }
    }
}

impl SessionConfig {
    /// Parses and validates; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self, AppError> {
        let mut cfg: SessionConfig =
            toml::from_str(text).map_err(|e| AppError::Input(format!("invalid config: {e}")))?;
        // explainer tables come from the engine and accept unknown keys
        let raw: toml::Table = toml::from_str(text).expect("parsed above");
        let raw = serde_json::to_value(raw).expect("toml tables are JSON objects");
        if let Some(key) = unknown_key(&raw, &cfg, "") {
            return Err(AppError::Input(format!("invalid config: unknown key `{key}`")));
        }
        if let Some(base) = base {
            for p in [&mut cfg.dataset.path, &mut cfg.model.path, &mut cfg.cache.dir]
                .into_iter()
                .flatten()
            {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_toml(&text, path.parent())
    }

    /// Applies `XPLAIN_PORT` when set.
    pub fn apply_env(&mut self, port: Option<String>) -> Result<(), AppError> {
        if let Some(raw) = port {
            self.server.port = raw
                .trim()
                .parse()
                .map_err(|_| AppError::Input(format!("{PORT_ENV}=`{raw}` is not a port number")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), AppError> {
        self.model.hyperparams().validate(self.model.kind)?;
        self.lime.validate()?;
        self.anchors.validate()?;
        if self.shap.background_size == 0 || self.shap.exact_max_features == 0 {
            return Err(AppError::Input(
                "shap.background_size and shap.exact_max_features must be positive".into(),
            ));
        }
        if self.cache.capacity == 0 {
            return Err(AppError::Input("cache.capacity must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(SessionConfig::from_toml("", None).unwrap(), SessionConfig::default());
    }

    #[test]
    fn sections_override_fields() {
        let cfg = SessionConfig::from_toml(
            "[model]\nkind = \"logistic_regression\"\n[lime]\nn_samples = 500\n[server]\nport = 9000\n",
            None,
        )
        .unwrap();
        assert_eq!(cfg.model.kind, ModelKind::LogisticRegression);
        assert_eq!(cfg.lime.n_samples, 500);
        assert_eq!(cfg.lime.ridge_lambda, 1.0);
        assert_eq!(cfg.server.port, 9000);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(SessionConfig::from_toml("[model]\ndepth = 3\n", None).is_err());
        assert!(SessionConfig::from_toml("[model]\nmax_depth = 0\n", None).is_err());
        assert!(SessionConfig::from_toml("[anchors]\ntau = 1.5\n", None).is_err());
        assert!(SessionConfig::from_toml("[lime]\nsamples = 10\n", None).is_err());
    }

    #[test]
    fn example_file_parses() {
        let cfg = SessionConfig::from_toml(include_str!("../xplain.example.toml"), None).unwrap();
        assert_eq!(cfg.model.max_depth, 3);
        assert_eq!(cfg.anchors.tau, 0.95);
    }

    #[test]
    fn env_port_overrides() {
        let mut cfg = SessionConfig::default();
        cfg.apply_env(Some("9123".into())).unwrap();
        assert_eq!(cfg.server.port, 9123);
        assert!(cfg.apply_env(Some("http".into())).is_err());
    }

    #[test]
    fn relative_paths_resolve_against_the_config_dir() {
        let cfg = SessionConfig::from_toml("[dataset]\npath = \"d.csv\"\n", Some(Path::new("/etc/x"))).unwrap();
        assert_eq!(cfg.dataset.path.unwrap(), PathBuf::from("/etc/x/d.csv"));
    }
}

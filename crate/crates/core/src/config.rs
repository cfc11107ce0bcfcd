//! Run configuration: fusion/search parameters, provider selection, paths
//! and the global seed. Loads from a JSON file; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidential::ProviderConfig;
use crate::orchestrator::MCTSConfig;
use crate::pis::PISConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub dataset: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub pis: PISConfig,
    pub mcts: MCTSConfig,
    pub provider: ProviderConfig,
    pub paths: Paths,
    pub seed: u64,
    /// Documents the retriever hands to compilation; `None` means the whole
    /// pool.
    pub retrieval_k: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pis: PISConfig::default(),
            mcts: MCTSConfig::default(),
            provider: ProviderConfig::default(),
            paths: Paths::default(),
            seed: 42,
            retrieval_k: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(), // includes line/column
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.pis
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.mcts.iterations == 0 || self.mcts.max_depth == 0 {
            return Err(ConfigError::Invalid(
                "mcts.iterations and mcts.max_depth must be positive".to_string(),
            ));
        }
        if let Some(0) = self.retrieval_k {
            return Err(ConfigError::Invalid("retrieval_k must be >= 1".to_string()));
        }
        Ok(())
    }
}

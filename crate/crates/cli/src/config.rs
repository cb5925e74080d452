use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use socratic_core::caption::CaptionConfig;
use socratic_core::retrieval::BuildParams;
use socratic_core::v2t::V2tConfig;
use socratic_core::world_state::{CondenseConfig, SearchConfig};
use socratic_core::Error;

use crate::cli::{BackendKind, Global};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MockLmKind {
    #[default]
    Strong,
    Weak,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockSettings {
    pub lm: MockLmKind,
    /// Perception noise of the mock VLM.
    pub vlm_sigma: f64,
}

/// Everything that shapes a run. Every field has a default, so an empty
/// file is a valid config; index seeds always follow `seed`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub backend: BackendKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replay_dir: Option<PathBuf>,
    pub mock: MockSettings,
    pub caption: CaptionConfig,
    pub condense: CondenseConfig,
    pub search: SearchConfig,
    pub index: BuildParams,
    pub v2t: V2tConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::format(path.display().to_string(), e.message().to_string()))
    }

    /// Config file (if any) with global flags laid over it.
    pub fn resolve(global: &Global) -> Result<Self, Error> {
        let mut cfg = match &global.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(s) = global.seed {
            cfg.seed = s;
        }
        if let Some(b) = global.backend {
            cfg.backend = b;
        }
        if let Some(d) = &global.replay_dir {
            cfg.replay_dir = Some(d.clone());
        }
        cfg.index.lsh.seed = cfg.seed;
        cfg.index.features.seed = cfg.seed;
        Ok(cfg)
    }
}

/// The effective configuration and inputs, echoed into every artifact.
#[derive(Clone, Debug, Serialize)]
pub struct RunEcho {
    pub command: &'static str,
    pub config: RunConfig,
    pub inputs: BTreeMap<&'static str, String>,
}

impl RunEcho {
    pub fn new(command: &'static str, config: &RunConfig) -> Self {
        Self { command, config: config.clone(), inputs: BTreeMap::new() }
    }

    pub fn input(mut self, key: &'static str, value: impl ToString) -> Self {
        self.inputs.insert(key, value.to_string());
        self
    }

    pub fn path(self, key: &'static str, value: &Path) -> Self {
        self.input(key, value.display())
    }
}

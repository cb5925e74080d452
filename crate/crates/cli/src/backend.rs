use std::sync::Arc;

use socratic_core::foundation::http::{adapters_from_env, HttpModel, HttpSettings};
use socratic_core::foundation::mock::{HashEmbedder, MockAlm, MockLm, MockVlm, SyntheticWorld};
use socratic_core::foundation::replay::replay_adapters;
use socratic_core::foundation::{AdapterSet, LanguageModel, TextEmbedder, VisionLanguageModel};
use socratic_core::Error;

use crate::cli::BackendKind;
use crate::config::{MockLmKind, RunConfig};

fn mock_lm(kind: MockLmKind, seed: u64) -> MockLm {
    match kind {
        MockLmKind::Strong => MockLm::strong(),
        MockLmKind::Weak => MockLm::weak(),
    }
    .with_seed(seed)
}

pub fn mock_adapters(cfg: &RunConfig, world: Arc<SyntheticWorld>) -> AdapterSet {
    AdapterSet {
        lm_generate: Some(Arc::new(mock_lm(cfg.mock.lm, cfg.seed))),
        lm_embed: Some(Arc::new(HashEmbedder::bundled())),
        vlm: Some(Arc::new(MockVlm::new("mock-vlm", world.clone()).with_noise(cfg.mock.vlm_sigma, cfg.seed))),
        alm: Some(Arc::new(MockAlm::new("mock-alm", world))),
    }
}

/// Adapters for the configured backend.
pub fn adapters(cfg: &RunConfig) -> Result<AdapterSet, Error> {
    let fixtures = || cfg.replay_dir.clone().ok_or_else(|| Error::Precondition(format!("backend {:?} needs --replay-dir", cfg.backend)));
    match cfg.backend {
        BackendKind::Mock => Ok(mock_adapters(cfg, Arc::new(SyntheticWorld::bundled()))),
        BackendKind::Http => adapters_from_env(),
        BackendKind::Replay => Ok(replay_adapters(&fixtures()?, None)),
        BackendKind::Record => Ok(replay_adapters(&fixtures()?, Some(&adapters_from_env()?))),
    }
}

fn is_url(s: &str) -> bool {
    s.starts_with("http://") || s.starts_with("https://")
}

/// `ID@SIGMA` builds a mock VLM with that perception noise; `ID=URL` reaches
/// an endpoint. The endpoint's model id is the URL, so `ID` is only a label.
pub fn vlm_spec(spec: &str, cfg: &RunConfig, world: &Arc<SyntheticWorld>) -> Result<Arc<dyn VisionLanguageModel>, Error> {
    if let Some((id, url)) = spec.split_once('=').filter(|(_, u)| is_url(u)) {
        if id.is_empty() {
            return Err(Error::Precondition(format!("VLM spec {spec:?} has an empty id")));
        }
        return Ok(Arc::new(HttpModel::http(url, &HttpSettings::from_env()?)));
    }
    let (id, sigma) = spec
        .rsplit_once('@')
        .and_then(|(id, s)| s.parse::<f64>().ok().filter(|s| s.is_finite() && *s >= 0.0).map(|s| (id, s)))
        .ok_or_else(|| Error::Precondition(format!("VLM spec {spec:?} is neither ID@SIGMA nor ID=URL")))?;
    if id.is_empty() {
        return Err(Error::Precondition(format!("VLM spec {spec:?} has an empty id")));
    }
    Ok(Arc::new(MockVlm::new(id, world.clone()).with_noise(sigma, cfg.seed)))
}

pub fn lm_spec(spec: &str, cfg: &RunConfig) -> Result<Arc<dyn LanguageModel>, Error> {
    match spec {
        "mock-strong" => Ok(Arc::new(mock_lm(MockLmKind::Strong, cfg.seed))),
        "mock-weak" => Ok(Arc::new(mock_lm(MockLmKind::Weak, cfg.seed))),
        url if is_url(url) => Ok(Arc::new(HttpModel::http(url, &HttpSettings::from_env()?))),
        other => Err(Error::Precondition(format!("LM spec {other:?} is not mock-strong, mock-weak or a URL"))),
    }
}

pub fn embedder_spec(spec: &str) -> Result<Arc<dyn TextEmbedder>, Error> {
    if is_url(spec) {
        return Ok(Arc::new(HttpModel::http(spec, &HttpSettings::from_env()?)));
    }
    let seed = match spec {
        "mock" => 0xbeef,
        s => s
            .strip_prefix("mock:")
            .and_then(|n| n.parse::<u64>().ok())
            .ok_or_else(|| Error::Precondition(format!("embedder spec {s:?} is not mock, mock:SEED or a URL")))?,
    };
    Ok(Arc::new(HashEmbedder::new(format!("held-out-sentence-{seed}"), 512, seed)))
}

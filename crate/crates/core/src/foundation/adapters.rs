use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::embedding::Embedding;
use crate::error::{Error, Result};

/// Default audio clip span, matching the 5-second clips audio critics are trained on.
pub const DEFAULT_AUDIO_SPAN_MS: (u64, u64) = (0, 5_000);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionParams {
    pub temperature: f64,
    pub max_tokens: usize,
    #[serde(default)]
    pub stop: Vec<String>,
    #[serde(default = "one")]
    pub n: usize,
}

fn one() -> usize {
    1
}

impl CompletionParams {
    /// Single deterministic completion.
    pub fn greedy(max_tokens: usize) -> Self {
        Self { temperature: 0.0, max_tokens, stop: Vec::new(), n: 1 }
    }

    pub fn sampled(temperature: f64, n: usize, max_tokens: usize) -> Self {
        Self { temperature, max_tokens, stop: Vec::new(), n }
    }

    pub fn with_stop(mut self, stop: &str) -> Self {
        self.stop.push(stop.to_string());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::Precondition(format!("temperature {} must be >= 0", self.temperature)));
        }
        if self.max_tokens == 0 || self.n == 0 {
            return Err(Error::Precondition("max_tokens and n must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaKind {
    Image,
    Audio,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MediaRef {
    pub kind: MediaKind,
    pub locator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_ms: Option<(u64, u64)>,
}

impl MediaRef {
    pub fn image(locator: impl Into<String>) -> Self {
        Self { kind: MediaKind::Image, locator: locator.into(), span_ms: None }
    }

    pub fn audio(locator: impl Into<String>) -> Self {
        Self { kind: MediaKind::Audio, locator: locator.into(), span_ms: Some(DEFAULT_AUDIO_SPAN_MS) }
    }

    pub fn expect(&self, kind: MediaKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Precondition(format!("expected {kind:?} media, got {:?}", self.kind)));
        }
        Ok(())
    }
}

/// Generative language model: prompt in, `params.n` continuations out.
pub trait LanguageModel: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<Vec<String>>;
}

/// Sentence embedder; outputs are normalized.
pub trait TextEmbedder: Send + Sync {
    fn id(&self) -> &str;
    fn embed(&self, text: &str) -> Result<Embedding>;
}

/// Image-text critic. Both methods return unit vectors in one space.
pub trait VisionLanguageModel: Send + Sync {
    fn id(&self) -> &str;
    fn embed_text(&self, label: &str) -> Result<Embedding>;
    fn embed_image(&self, media: &MediaRef) -> Result<Embedding>;
}

/// Audio-text critic plus speech-to-text.
pub trait AudioLanguageModel: Send + Sync {
    fn id(&self) -> &str;
    fn embed_text(&self, label: &str) -> Result<Embedding>;
    fn embed_audio(&self, media: &MediaRef) -> Result<Embedding>;
    fn transcribe(&self, media: &MediaRef) -> Result<String>;
}

/// Vendor-specific transcription options, passed through untouched.
pub type TranscribeOptions = BTreeMap<String, serde_json::Value>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    LmGenerate,
    LmEmbed,
    Vlm,
    Alm,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::LmGenerate => "lm_generate",
            Role::LmEmbed => "lm_embed",
            Role::Vlm => "vlm",
            Role::Alm => "alm",
        }
    }
}

#[derive(Clone, Default)]
pub struct AdapterSet {
    pub lm_generate: Option<Arc<dyn LanguageModel>>,
    pub lm_embed: Option<Arc<dyn TextEmbedder>>,
    pub vlm: Option<Arc<dyn VisionLanguageModel>>,
    pub alm: Option<Arc<dyn AudioLanguageModel>>,
}

impl fmt::Debug for AdapterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdapterSet")
            .field("lm_generate", &self.lm_generate.as_ref().map(|a| a.id().to_string()))
            .field("lm_embed", &self.lm_embed.as_ref().map(|a| a.id().to_string()))
            .field("vlm", &self.vlm.as_ref().map(|a| a.id().to_string()))
            .field("alm", &self.alm.as_ref().map(|a| a.id().to_string()))
            .finish()
    }
}

impl AdapterSet {
    pub fn has(&self, role: Role) -> bool {
        match role {
            Role::LmGenerate => self.lm_generate.is_some(),
            Role::LmEmbed => self.lm_embed.is_some(),
            Role::Vlm => self.vlm.is_some(),
            Role::Alm => self.alm.is_some(),
        }
    }

    /// Fails on the first absent role; pipelines call this before doing any work.
    pub fn require(&self, roles: &[Role]) -> Result<()> {
        match roles.iter().find(|r| !self.has(**r)) {
            Some(r) => Err(Error::MissingAdapter(r.name())),
            None => Ok(()),
        }
    }

    pub fn lm(&self) -> Result<&dyn LanguageModel> {
        self.lm_generate.as_deref().ok_or(Error::MissingAdapter("lm_generate"))
    }

    pub fn embedder(&self) -> Result<&dyn TextEmbedder> {
        self.lm_embed.as_deref().ok_or(Error::MissingAdapter("lm_embed"))
    }

    pub fn vlm(&self) -> Result<&dyn VisionLanguageModel> {
        self.vlm.as_deref().ok_or(Error::MissingAdapter("vlm"))
    }

    pub fn alm(&self) -> Result<&dyn AudioLanguageModel> {
        self.alm.as_deref().ok_or(Error::MissingAdapter("alm"))
    }
}

/// One completion, retried once when the backend returns only whitespace.
pub fn complete_nonempty(lm: &dyn LanguageModel, prompt: &str, params: &CompletionParams) -> Result<String> {
    let mut raw = String::new();
    for _ in 0..2 {
        raw = lm.complete(prompt, params)?.into_iter().next().unwrap_or_default();
        if !raw.trim().is_empty() {
            return Ok(raw);
        }
    }
    Err(Error::Unparseable { raw })
}

pub(crate) fn require_prompt(prompt: &str) -> Result<()> {
    if prompt.trim().is_empty() {
        return Err(Error::Empty("prompt"));
    }
    Ok(())
}

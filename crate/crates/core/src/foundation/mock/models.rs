use std::collections::BTreeMap;
use std::sync::Arc;

use super::world::{words, SynthFrame, SYNTH_PREFIX};
use crate::seed::seeded_rng as rng_from;
use super::SyntheticWorld;
use crate::error::{Error, Result};
use crate::foundation::adapters::{AudioLanguageModel, MediaKind, MediaRef, TextEmbedder, VisionLanguageModel};
use crate::foundation::embedding::Embedding;
use rand::RngCore;

/// Image-text critic over a [`SyntheticWorld`].
///
/// `sigma` is this model's own per-coordinate perception noise; it stands in
/// for weaker or stronger real backbones.
#[derive(Clone, Debug)]
pub struct MockVlm {
    id: String,
    world: Arc<SyntheticWorld>,
    sigma: f64,
    noise_seed: u64,
    text_template: Option<String>,
}

impl MockVlm {
    pub fn new(id: impl Into<String>, world: Arc<SyntheticWorld>) -> Self {
        Self { id: id.into(), world, sigma: 0.0, noise_seed: 0, text_template: None }
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.sigma = sigma;
        self.noise_seed = seed;
        self
    }

    /// Wrapper applied to labels before embedding, e.g. `"a photo of a {}"`.
    pub fn with_text_template(mut self, template: impl Into<String>) -> Self {
        self.text_template = Some(template.into());
        self
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn world(&self) -> &Arc<SyntheticWorld> {
        &self.world
    }
}

impl VisionLanguageModel for MockVlm {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed_text(&self, label: &str) -> Result<Embedding> {
        if label.trim().is_empty() {
            return Err(Error::Empty("label"));
        }
        match &self.text_template {
            Some(t) => self.world.embed_text(&t.replace("{}", label)),
            None => self.world.embed_text(label),
        }
    }

    fn embed_image(&self, media: &MediaRef) -> Result<Embedding> {
        media.expect(MediaKind::Image)?;
        self.world.embed_frame(&media.locator, self.sigma, self.noise_seed)
    }
}

/// Audio-text critic sharing the VLM space, plus a transcript oracle.
///
/// Transcripts come from the locator's `say=` field or from a fixture map
/// keyed by locator (e.g. `video:<id>`).
#[derive(Clone, Debug)]
pub struct MockAlm {
    id: String,
    world: Arc<SyntheticWorld>,
    sigma: f64,
    noise_seed: u64,
    transcripts: BTreeMap<String, String>,
}

impl MockAlm {
    pub fn new(id: impl Into<String>, world: Arc<SyntheticWorld>) -> Self {
        Self { id: id.into(), world, sigma: 0.0, noise_seed: 0, transcripts: BTreeMap::new() }
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.sigma = sigma;
        self.noise_seed = seed;
        self
    }

    pub fn with_transcripts(mut self, transcripts: BTreeMap<String, String>) -> Self {
        self.transcripts = transcripts;
        self
    }
}

impl AudioLanguageModel for MockAlm {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed_text(&self, label: &str) -> Result<Embedding> {
        self.world.embed_text(label)
    }

    fn embed_audio(&self, media: &MediaRef) -> Result<Embedding> {
        media.expect(MediaKind::Audio)?;
        self.world.embed_frame(&media.locator, self.sigma, self.noise_seed)
    }

    fn transcribe(&self, media: &MediaRef) -> Result<String> {
        media.expect(MediaKind::Audio)?;
        if let Some(t) = self.transcripts.get(&media.locator) {
            return Ok(t.clone());
        }
        if media.locator.starts_with(SYNTH_PREFIX) {
            return Ok(SynthFrame::parse(&media.locator)?.say.unwrap_or_default());
        }
        Err(Error::UnknownLocator(media.locator.clone()))
    }
}

/// Normalized hashed bag-of-tokens with unsigned counts.
///
/// Each distinct token maps to one coordinate chosen by a seeded hash, so
/// strings whose tokens land on disjoint coordinates score exactly 0.
#[derive(Clone, Debug)]
pub struct HashEmbedder {
    id: String,
    dim: usize,
    seed: u64,
}

pub const HASH_EMBEDDER_DIM: usize = 768;
pub const HASH_EMBEDDER_SEED: u64 = 0x5e17_e11c;

impl HashEmbedder {
    pub fn new(id: impl Into<String>, dim: usize, seed: u64) -> Self {
        Self { id: id.into(), dim, seed }
    }

    pub fn bundled() -> Self {
        Self::new("mock-sentence", HASH_EMBEDDER_DIM, HASH_EMBEDDER_SEED)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bucket(&self, token: &str) -> usize {
        let mut rng = rng_from(&[b"token", &self.seed.to_le_bytes(), token.as_bytes()]);
        (rng.next_u64() % self.dim as u64) as usize
    }
}

impl TextEmbedder for HashEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed(&self, text: &str) -> Result<Embedding> {
        let tokens = words(text);
        if tokens.is_empty() {
            return Err(Error::Empty("text"));
        }
        let mut v = vec![0f32; self.dim];
        for t in &tokens {
            v[self.bucket(t)] += 1.0;
        }
        Embedding::new(v)?.normalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::embedding::cosine_score;

    #[test]
    fn embedder_basics() {
        let e = HashEmbedder::bundled();
        let a = e.embed("making coffee").unwrap();
        assert!((cosine_score(&a, &e.embed("making coffee").unwrap()).unwrap() - 1.0).abs() < 1e-9);
        assert!(e.embed("  ").is_err());
        assert!(e.embed("").is_err());
    }

    #[test]
    fn silent_clip_transcribes_empty() {
        let alm = MockAlm::new("alm", Arc::new(SyntheticWorld::bundled()));
        assert_eq!(alm.transcribe(&MediaRef::audio("synth:")).unwrap(), "");
        assert_eq!(alm.transcribe(&MediaRef::audio("synth:footsteps|say=hello")).unwrap(), "hello");
        assert!(alm.transcribe(&MediaRef::image("synth:")).is_err());
    }

    #[test]
    fn template_wrapper_preserves_label_direction() {
        let w = Arc::new(SyntheticWorld::bundled());
        let raw = MockVlm::new("v", w.clone());
        let wrapped = MockVlm::new("v", w).with_text_template("an image of a {}");
        let a = raw.embed_text("kitchen").unwrap();
        let b = wrapped.embed_text("kitchen").unwrap();
        assert!((cosine_score(&a, &b).unwrap() - 1.0).abs() < 1e-6);
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::{complete_nonempty, CompletionParams, Embedding, LanguageModel, TextEmbedder, VisionLanguageModel};
use crate::prompts::{self, VIDEO_CAPTION_LEAD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct V2tConfig {
    /// Minimum transcript length, in characters, for the fused path.
    pub gate_chars: usize,
    pub max_tokens: usize,
}

impl Default for V2tConfig {
    fn default() -> Self {
        Self { gate_chars: 100, max_tokens: 64 }
    }
}

/// Character length used by the gate.
pub fn transcript_len(t: &str) -> usize {
    t.chars().count()
}

pub fn passes_gate(transcript: Option<&str>, gate_chars: usize) -> bool {
    transcript.is_some_and(|t| transcript_len(t) >= gate_chars)
}

/// `summary` and `summary_embedding` are present exactly when the video took
/// the fused path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub id: String,
    pub visual: Embedding,
    pub transcript: Option<String>,
    pub summary: Option<String>,
    pub summary_embedding: Option<Embedding>,
}

impl VideoRecord {
    pub fn visual_only(id: impl Into<String>, visual: Embedding) -> Result<Self> {
        Ok(Self { id: id.into(), visual: visual.normalize()?, transcript: None, summary: None, summary_embedding: None })
    }

    pub fn is_fused(&self) -> bool {
        self.summary_embedding.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptionRecord {
    pub id: String,
    pub text: String,
    pub vlm_embedding: Embedding,
    pub sentence_embedding: Embedding,
}

impl CaptionRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>, vlm_embedding: Embedding, sentence_embedding: Embedding) -> Result<Self> {
        Ok(Self { id: id.into(), text: text.into(), vlm_embedding: vlm_embedding.normalize()?, sentence_embedding: sentence_embedding.normalize()? })
    }

    pub fn embed(id: &str, text: &str, vlm: &dyn VisionLanguageModel, embedder: &dyn TextEmbedder) -> Result<Self> {
        Self::new(id, text, vlm.embed_text(text)?, embedder.embed(text)?)
    }
}

/// LM caption for a transcript, returned with its fixed lead-in.
pub fn summarize_transcript(transcript: &str, lm: &dyn LanguageModel, cfg: &V2tConfig) -> Result<String> {
    let len = transcript_len(transcript);
    if len < cfg.gate_chars {
        return Err(Error::Precondition(format!("transcript has {len} characters, gate is {}", cfg.gate_chars)));
    }
    let raw = complete_nonempty(lm, &prompts::video_caption(transcript), &CompletionParams::greedy(cfg.max_tokens))?;
    let body = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    Ok(format!("{VIDEO_CAPTION_LEAD} {body}"))
}

/// Builds a video record; a gated transcript is summarized and embedded. An
/// empty summary keeps the video on the visual path and returns a warning.
pub fn prepare_video(
    id: &str,
    visual: Embedding,
    transcript: Option<String>,
    lm: &dyn LanguageModel,
    embedder: &dyn TextEmbedder,
    cfg: &V2tConfig,
) -> Result<(VideoRecord, Option<String>)> {
    let mut video = VideoRecord::visual_only(id, visual)?;
    let mut warning = None;
    if let Some(t) = transcript.as_deref().filter(|t| transcript_len(t) >= cfg.gate_chars) {
        match summarize_transcript(t, lm, cfg) {
            Ok(summary) => {
                video.summary_embedding = Some(embedder.embed(&summary)?.normalize()?);
                video.summary = Some(summary);
            }
            Err(Error::Unparseable { .. }) => warning = Some(format!("video {id}: empty transcript summary, using visual score")),
            Err(e) => return Err(e),
        }
    }
    video.transcript = transcript;
    Ok((video, warning))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::mock::{HashEmbedder, MockLm};

    #[test]
    fn gate_is_inclusive_at_the_boundary() {
        let cfg = V2tConfig::default();
        let lm = MockLm::strong();
        let emb = HashEmbedder::bundled();
        let visual = Embedding::new(vec![1.0, 0.0]).unwrap();
        let long = "a".repeat(100);
        let (v, w) = prepare_video("v", visual.clone(), Some(long.clone()), &lm, &emb, &cfg).unwrap();
        assert!(v.is_fused() && w.is_none());
        assert!(v.summary.unwrap().starts_with("In this video, a person says"));
        let (v, _) = prepare_video("v", visual, Some("a".repeat(99)), &lm, &emb, &cfg).unwrap();
        assert!(!v.is_fused() && v.summary.is_none());
        assert!(matches!(summarize_transcript(&"a".repeat(99), &lm, &cfg), Err(Error::Precondition(_))));
        // multibyte characters count once
        assert!(passes_gate(Some(&"é".repeat(100)), 100) && !passes_gate(Some(&"é".repeat(99)), 100));
    }

    #[test]
    fn empty_summary_falls_back_with_warning() {
        let lm = crate::foundation::mock::FnLm::new("silent", |_: &str, _: &CompletionParams| vec![String::new()]);
        let (v, w) = prepare_video("v9", Embedding::new(vec![0.0, 2.0]).unwrap(), Some("x".repeat(150)), &lm, &HashEmbedder::bundled(), &V2tConfig::default()).unwrap();
        assert!(!v.is_fused());
        assert!(w.unwrap().contains("v9"));
    }
}

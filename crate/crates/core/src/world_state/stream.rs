use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::{AudioLanguageModel, Embedding, MediaRef};
use crate::retrieval::KeyMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub t_ms: u64,
    pub image: Embedding,
    pub audio: Option<MediaRef>,
}

/// Time-ordered frames with strictly increasing timestamps and one image dim.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameStream {
    frames: Vec<Frame>,
}

#[derive(Deserialize, Serialize)]
struct FrameLine {
    t_ms: u64,
    embedding: Vec<f32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    audio: Option<String>,
}

impl FrameStream {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let first = frames.first().ok_or(Error::Empty("frame stream"))?;
        let dim = first.image.dim();
        for (i, w) in frames.windows(2).enumerate() {
            if w[1].t_ms <= w[0].t_ms {
                return Err(Error::Precondition(format!("timestamps not strictly increasing at frame {}", i + 1)));
            }
        }
        if let Some(f) = frames.iter().find(|f| f.image.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: f.image.dim() });
        }
        Ok(Self { frames })
    }

    /// Frames JSONL: `{t_ms, embedding:[…], audio?: locator}` per line.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut frames = Vec::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let l: FrameLine =
                serde_json::from_str(line).map_err(|e| Error::format(format!("frames line {}", n + 1), e.to_string()))?;
            let image = Embedding::new(l.embedding).map_err(|e| Error::at_frame(frames.len(), e))?;
            frames.push(Frame { t_ms: l.t_ms, image, audio: l.audio.map(MediaRef::audio) });
        }
        Self::new(frames)
    }

    pub fn to_jsonl(&self) -> String {
        self.frames
            .iter()
            .map(|f| {
                let line = FrameLine {
                    t_ms: f.t_ms,
                    embedding: f.image.values().to_vec(),
                    audio: f.audio.as_ref().map(|a| a.locator.clone()),
                };
                serde_json::to_string(&line).expect("frame serializes") + "\n"
            })
            .collect()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.frames[0].image.dim()
    }

    pub fn timestamps(&self) -> Vec<u64> {
        self.frames.iter().map(|f| f.t_ms).collect()
    }

    /// Normalized image embeddings, one row per frame.
    pub fn image_keys(&self) -> Result<KeyMatrix> {
        let rows = self.frames.iter().map(|f| f.image.clone().normalize()).collect::<Result<Vec<_>>>()?;
        KeyMatrix::from_embeddings(&rows)
    }

    /// ALM audio embeddings, one row per frame; frames without audio get a
    /// zero row and so score 0 against every query.
    pub fn audio_keys(&self, alm: &dyn AudioLanguageModel) -> Result<KeyMatrix> {
        let mut rows: Vec<Option<Vec<f32>>> = Vec::with_capacity(self.len());
        let mut dim = None;
        for (i, f) in self.frames.iter().enumerate() {
            let row = match &f.audio {
                Some(a) => {
                    let e = alm.embed_audio(a).and_then(Embedding::normalize).map_err(|e| Error::at_frame(i, e))?;
                    dim = Some(e.dim());
                    Some(e.into_values())
                }
                None => None,
            };
            rows.push(row);
        }
        let dim = dim.ok_or(Error::Empty("audio clips in frame stream"))?;
        let data = rows.into_iter().flat_map(|r| r.unwrap_or_else(|| vec![0.0; dim])).collect();
        KeyMatrix::new(dim, data)
    }
}

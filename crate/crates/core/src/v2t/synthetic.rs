use rand_distr::{Distribution, StandardNormal};

use super::metrics::GroundTruth;
use super::records::{CaptionRecord, VideoRecord};
use crate::error::{Error, Result};
use crate::foundation::Embedding;
use crate::prompts::VIDEO_CAPTION_LEAD;
use crate::seed::seeded_rng;

/// Planted retrieval corpus: video `i` is described by caption `i`, and the
/// captions past `n_videos` are distractors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n_videos: usize,
    pub n_captions: usize,
    pub visual_dim: usize,
    pub sentence_dim: usize,
    /// Fraction of videos given a long transcript and a summary.
    pub coverage: f64,
    pub visual_noise: f64,
    pub sentence_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self { n_videos: 200, n_captions: 1000, visual_dim: 64, sentence_dim: 64, coverage: 0.4, visual_noise: 2.5, sentence_noise: 1.5, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub videos: Vec<VideoRecord>,
    pub captions: Vec<CaptionRecord>,
    pub truth: GroundTruth,
}

impl SyntheticSpec {
    /// Videos with a summary; the first `round(coverage · n_videos)`.
    pub fn n_covered(&self) -> usize {
        (self.coverage * self.n_videos as f64).round() as usize
    }

    pub fn generate(&self) -> Result<SyntheticCorpus> {
        if self.n_captions < self.n_videos || self.n_videos == 0 {
            return Err(Error::Precondition("need 1 ≤ n_videos ≤ n_captions".into()));
        }
        if !(0.0..=1.0).contains(&self.coverage) {
            return Err(Error::Precondition(format!("coverage {} outside [0, 1]", self.coverage)));
        }
        let mut rng = seeded_rng(&[b"v2t-corpus", &self.seed.to_le_bytes()]);
        let mut gauss = |d: usize| -> Vec<f64> { (0..d).map(|_| StandardNormal.sample(&mut rng)).collect() };
        let unit = |v: Vec<f64>| Embedding::from_f64(&v)?.normalize();
        let blend = |base: &Embedding, noise: Vec<f64>, s: f64| -> Result<Embedding> {
            let v: Vec<f64> = base.values().iter().zip(noise).map(|(&b, g)| b as f64 + s * g / (g_len(base.dim()))).collect();
            unit(v)
        };
        let mut captions = Vec::with_capacity(self.n_captions);
        for i in 0..self.n_captions {
            let id = format!("c{i:05}");
            captions.push(CaptionRecord::new(id.clone(), format!("synthetic caption {i}"), unit(gauss(self.visual_dim))?, unit(gauss(self.sentence_dim))?)?);
        }
        let covered = self.n_covered();
        let mut videos = Vec::with_capacity(self.n_videos);
        let mut truth = GroundTruth::new();
        for (i, cap) in captions.iter().take(self.n_videos).enumerate() {
            let id = format!("v{i:05}");
            let mut v = VideoRecord::visual_only(id.clone(), blend(&cap.vlm_embedding, gauss(self.visual_dim), self.visual_noise)?)?;
            if i < covered {
                let transcript = format!("{} {}", "spoken words".repeat(9), i);
                v.summary = Some(format!("{VIDEO_CAPTION_LEAD} {transcript}"));
                v.transcript = Some(transcript);
                v.summary_embedding = Some(blend(&cap.sentence_embedding, gauss(self.sentence_dim), self.sentence_noise)?);
            } else {
                v.transcript = Some("short".into());
            }
            truth.insert(id, vec![cap.id.clone()]);
            videos.push(v);
        }
        Ok(SyntheticCorpus { videos, captions, truth })
    }
}

/// Scales per-coordinate noise so `noise` is a norm ratio to the unit signal.
fn g_len(dim: usize) -> f64 {
    (dim as f64).sqrt()
}

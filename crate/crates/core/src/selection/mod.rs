//! Unsupervised VLM selection: candidates paired with a weak LM are scored
//! against pseudo labels from a baseline VLM paired with a strong LM.

pub mod stats;

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use stats::{average_ranks, pearson, spearman};

use crate::caption::{CaptionConfig, EgocentricCaptioner};
use crate::error::{Error, Result};
use crate::foundation::mock::SyntheticWorld;
use crate::foundation::{cosine_score, AdapterSet, LanguageModel, MediaRef, TextEmbedder, VisionLanguageModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinationRole {
    Candidate,
    Truth,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinationSpec {
    pub vlm_id: String,
    pub lm_id: String,
    pub role: CombinationRole,
}

/// First-person summaries of `frames` from one (VLM, LM) pairing.
pub fn describe_frames(frames: &[MediaRef], vlm: Arc<dyn VisionLanguageModel>, lm: Arc<dyn LanguageModel>, cfg: &CaptionConfig) -> Result<Vec<String>> {
    if frames.is_empty() {
        return Err(Error::Empty("frames"));
    }
    let captioner = EgocentricCaptioner::bundled(cfg.clone(), vlm.as_ref())?;
    let adapters = AdapterSet { lm_generate: Some(lm), vlm: Some(vlm.clone()), ..Default::default() };
    frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let image = vlm.embed_image(f).map_err(|e| Error::at_frame(i, e))?;
            Ok(captioner.describe(i as u64, &image, None, &adapters).map_err(|e| Error::at_frame(i, e))?.first_person())
        })
        .collect()
}

pub fn generate_pseudo_truth(frames: &[MediaRef], baseline_vlm: Arc<dyn VisionLanguageModel>, strong_lm: Arc<dyn LanguageModel>, cfg: &CaptionConfig) -> Result<Vec<String>> {
    describe_frames(frames, baseline_vlm, strong_lm, cfg)
}

/// Per-frame cosine between held-out sentence embeddings.
pub fn frame_similarities(candidate: &[String], truth: &[String], heldout: &dyn TextEmbedder) -> Result<Vec<f64>> {
    if candidate.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: candidate.len() });
    }
    if truth.is_empty() {
        return Err(Error::Empty("summaries"));
    }
    candidate.iter().zip(truth).map(|(c, t)| cosine_score(&heldout.embed(c)?, &heldout.embed(t)?)).collect()
}

pub fn score_candidate(candidate: &[String], truth: &[String], heldout: &dyn TextEmbedder) -> Result<f64> {
    let s = frame_similarities(candidate, truth, heldout)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthSpec {
    pub vlm: String,
    pub lm: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub vlm: String,
    pub score: f64,
    /// Same VLM as the truth baseline; shown but never ranked.
    pub excluded: bool,
    pub per_frame: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub reference_name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub truth: TruthSpec,
    pub rows: Vec<SelectionRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Correlation>,
}

impl SelectionReport {
    /// Included rows, best first; ties by VLM id.
    pub fn ranking(&self) -> Vec<&SelectionRow> {
        let mut rows: Vec<&SelectionRow> = self.rows.iter().filter(|r| !r.excluded).collect();
        rows.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.vlm.cmp(&b.vlm)));
        rows
    }

    pub fn row(&self, vlm: &str) -> Option<&SelectionRow> {
        self.rows.iter().find(|r| r.vlm == vlm)
    }

    /// Pearson correlation between included scores and a per-VLM reference
    /// (e.g. classification accuracy); VLMs without a reference are skipped.
    pub fn with_correlation(mut self, reference_name: &str, reference: &BTreeMap<String, f64>) -> Result<Self> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .rows
            .iter()
            .filter(|r| !r.excluded)
            .filter_map(|r| reference.get(&r.vlm).map(|&x| (x, r.score)))
            .unzip();
        let value = pearson(&xs, &ys)?;
        self.correlation = Some(Correlation { reference_name: reference_name.into(), value });
        Ok(self)
    }

    pub fn combinations(&self, weak_lm: &str) -> Vec<CombinationSpec> {
        let mut out = vec![CombinationSpec { vlm_id: self.truth.vlm.clone(), lm_id: self.truth.lm.clone(), role: CombinationRole::Truth }];
        out.extend(self.rows.iter().map(|r| CombinationSpec { vlm_id: r.vlm.clone(), lm_id: weak_lm.into(), role: CombinationRole::Candidate }));
        out
    }
}

pub struct SelectionInputs<'a> {
    pub frames: &'a [MediaRef],
    pub candidates: Vec<Arc<dyn VisionLanguageModel>>,
    pub weak_lm: Arc<dyn LanguageModel>,
    pub strong_lm: Arc<dyn LanguageModel>,
    pub baseline_vlm: Arc<dyn VisionLanguageModel>,
    pub heldout: Arc<dyn TextEmbedder>,
}

/// Truth from (baseline, strong LM); each candidate runs with the weak LM.
pub fn run_selection(inputs: &SelectionInputs<'_>, cfg: &CaptionConfig) -> Result<SelectionReport> {
    if inputs.candidates.len() < 2 {
        return Err(Error::Precondition("at least two candidate VLMs are required".into()));
    }
    let held = inputs.heldout.id();
    if held == inputs.weak_lm.id() || held == inputs.strong_lm.id() {
        return Err(Error::Precondition(format!("held-out embedder {held} must differ from the LMs under test")));
    }
    let truth = generate_pseudo_truth(inputs.frames, inputs.baseline_vlm.clone(), inputs.strong_lm.clone(), cfg)?;
    let rows = inputs
        .candidates
        .par_iter()
        .map(|vlm| {
            let summaries = describe_frames(inputs.frames, vlm.clone(), inputs.weak_lm.clone(), cfg)?;
            let per_frame = frame_similarities(&summaries, &truth, inputs.heldout.as_ref())?;
            Ok(SelectionRow {
                vlm: vlm.id().to_string(),
                score: per_frame.iter().sum::<f64>() / per_frame.len() as f64,
                excluded: vlm.id() == inputs.baseline_vlm.id(),
                per_frame,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionReport { truth: TruthSpec { vlm: inputs.baseline_vlm.id().into(), lm: inputs.strong_lm.id().into() }, rows, correlation: None })
}

/// Three frames per scene, each mixing in the next scene's place and first
/// object at weight 0.5, 0.7 or 0.9, so perception noise has something to
/// confuse the scene with.
pub fn graded_frames(world: &SyntheticWorld) -> Vec<MediaRef> {
    let scenes = world.scenes();
    let mut frames = Vec::with_capacity(3 * scenes.len());
    for (i, s) in scenes.iter().enumerate() {
        let other = &scenes[(i + 1) % scenes.len()];
        for (k, w) in [0.5, 0.7, 0.9].into_iter().enumerate() {
            frames.push(MediaRef::image(format!(
                "synth:{};{};{};{}@{w};{}@{w}|noise=0.02|seed={k}",
                s.place, s.objects[0], s.objects[1], other.place, other.objects[0]
            )));
        }
    }
    frames
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::mock::{synth_locator, HashEmbedder, MockLm, MockVlm};

    fn vlm(world: &Arc<SyntheticWorld>, id: &str, sigma: f64) -> Arc<dyn VisionLanguageModel> {
        Arc::new(MockVlm::new(id, world.clone()).with_noise(sigma, 1))
    }

    fn inputs<'a>(frames: &'a [MediaRef], world: &Arc<SyntheticWorld>, candidates: Vec<Arc<dyn VisionLanguageModel>>) -> SelectionInputs<'a> {
        SelectionInputs {
            frames,
            candidates,
            weak_lm: Arc::new(MockLm::weak()),
            strong_lm: Arc::new(MockLm::strong()),
            baseline_vlm: vlm(world, "base", 0.0),
            heldout: Arc::new(HashEmbedder::new("held-out", 512, 99)),
        }
    }

    #[test]
    fn truth_is_one_summary_per_frame() {
        let world = Arc::new(SyntheticWorld::bundled());
        let frames = [MediaRef::image(synth_locator(&["kitchen", "coffee maker", "mug"]))];
        let truth = generate_pseudo_truth(&frames, vlm(&world, "base", 0.0), Arc::new(MockLm::strong()), &CaptionConfig::default()).unwrap();
        assert_eq!(truth.len(), 1);
        let weak = describe_frames(&frames, vlm(&world, "base", 0.0), Arc::new(MockLm::weak()), &CaptionConfig::default()).unwrap();
        // same grounding, weaker phrasing
        assert_eq!(weak[0].replace(" at the ", " in the "), truth[0]);
    }

    #[test]
    fn baseline_row_is_excluded_and_twins_tie() {
        let world = Arc::new(SyntheticWorld::bundled());
        let frames = graded_frames(&world)[..6].to_vec();
        let cands = vec![vlm(&world, "base", 0.0), vlm(&world, "twin-a", 0.2), vlm(&world, "twin-b", 0.2)];
        let mut inp = inputs(&frames, &world, cands);
        // twins share a noise seed, so they see identical features
        let report = run_selection(&inp, &CaptionConfig::default()).unwrap();
        assert!(report.row("base").unwrap().excluded);
        assert!(report.ranking().iter().all(|r| r.vlm != "base"));
        let (a, b) = (report.row("twin-a").unwrap(), report.row("twin-b").unwrap());
        assert!((a.score - b.score).abs() < 1e-9);
        for r in &report.rows {
            let mean = r.per_frame.iter().sum::<f64>() / r.per_frame.len() as f64;
            assert!((mean - r.score).abs() < 1e-9);
        }
        inp.heldout = Arc::new(HashEmbedder::new("mock-lm-weak", 64, 1));
        assert!(run_selection(&inp, &CaptionConfig::default()).is_err());
    }

    #[test]
    fn identical_summaries_score_one() {
        let e = HashEmbedder::new("held-out", 256, 3);
        let t = vec!["I am reading a book.".to_string(), "I am chopping wood.".to_string()];
        assert!((score_candidate(&t, &t, &e).unwrap() - 1.0).abs() < 1e-9);
        assert!(score_candidate(&t[..1], &t, &e).is_err());
    }

    #[test]
    fn correlation_skips_excluded_rows() {
        let row = |vlm: &str, score: f64, excluded: bool| SelectionRow { vlm: vlm.into(), score, excluded, per_frame: vec![score] };
        let report = SelectionReport {
            truth: TruthSpec { vlm: "b".into(), lm: "strong".into() },
            rows: vec![row("a", 0.5, false), row("b", 0.9, true), row("c", 0.7, false), row("d", 0.6, false)],
            correlation: None,
        };
        let reference: BTreeMap<String, f64> = [("a", 1.0), ("b", 0.0), ("c", 3.0), ("d", 2.0)].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let r = report.with_correlation("accuracy", &reference).unwrap();
        assert!((r.correlation.unwrap().value - 1.0).abs() < 1e-12);
    }
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::config::CaptionConfig;
use super::entities::{Category, Scored};
use super::vocab::{rank_vocabulary, EntityVocabulary};
use crate::data;
use crate::error::{Error, Result};
use crate::foundation::{cosine_score, CompletionParams, Embedding, LanguageModel, VisionLanguageModel};
use crate::prompts;

/// Vocabularies for Internet captioning, all embedded with one VLM.
#[derive(Clone, Debug)]
pub struct InternetVocabularies {
    pub places: EntityVocabulary,
    pub objects: EntityVocabulary,
    pub image_types: EntityVocabulary,
    pub people_counts: EntityVocabulary,
}

impl InternetVocabularies {
    pub fn new(places: EntityVocabulary, objects: EntityVocabulary, vlm: &dyn VisionLanguageModel) -> Result<Self> {
        Ok(Self {
            places: places.embedded(vlm)?,
            objects: objects.embedded(vlm)?,
            image_types: EntityVocabulary::image_types().embedded(vlm)?,
            people_counts: EntityVocabulary::people_counts().embedded(vlm)?,
        })
    }

    /// Bundled places and the 600-label object stand-in.
    pub fn bundled(vlm: &dyn VisionLanguageModel) -> Result<Self> {
        Self::new(EntityVocabulary::places(), EntityVocabulary::objects(), vlm)
    }

    fn check(&self) -> Result<()> {
        let same = |v: &EntityVocabulary, want: &[&str]| {
            v.labels().iter().map(String::as_str).collect::<BTreeSet<_>>() == want.iter().copied().collect()
        };
        if !same(&self.image_types, &data::IMAGE_TYPES) {
            return Err(Error::Precondition("image type vocabulary must be photo, cartoon, sketch, painting".into()));
        }
        if !same(&self.people_counts, &data::PEOPLE_COUNTS) {
            return Err(Error::Precondition("people-count vocabulary must be the six fixed phrases".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detections {
    pub places: Vec<Scored>,
    pub objects: Vec<Scored>,
    pub image_types: Vec<Scored>,
    pub people: Vec<Scored>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptionCandidate {
    pub text: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageCaption {
    pub caption: String,
    /// Distinct candidates, VLM score descending, then text ascending.
    pub candidates: Vec<CaptionCandidate>,
    pub detections: Detections,
}

pub fn detect(image: &Embedding, vocabs: &InternetVocabularies, cfg: &CaptionConfig) -> Result<Detections> {
    vocabs.check()?;
    Ok(Detections {
        places: rank_vocabulary(image, &vocabs.places, Category::Place, cfg.n_places)?.items,
        objects: rank_vocabulary(image, &vocabs.objects, Category::Object, cfg.n_objects)?.items,
        image_types: rank_vocabulary(image, &vocabs.image_types, Category::ImageType, vocabs.image_types.len())?.items,
        people: rank_vocabulary(image, &vocabs.people_counts, Category::PeopleCount, vocabs.people_counts.len())?.items,
    })
}

pub fn caption_prompt(d: &Detections) -> String {
    let names = |v: &[Scored]| v.iter().map(|s| s.label.clone()).collect::<Vec<_>>();
    let (places, objects) = (names(&d.places), names(&d.objects));
    prompts::image_caption(
        &d.image_types[0].label,
        &d.people[0].label,
        &places.iter().map(String::as_str).collect::<Vec<_>>(),
        &objects.iter().map(String::as_str).collect::<Vec<_>>(),
    )
}

/// Samples candidate captions from the detections and returns the one the
/// VLM scores highest against the image.
pub fn caption_internet_image(
    image: &Embedding,
    vocabs: &InternetVocabularies,
    lm: &dyn LanguageModel,
    vlm: &dyn VisionLanguageModel,
    cfg: &CaptionConfig,
) -> Result<ImageCaption> {
    cfg.validate()?;
    let detections = detect(image, vocabs, cfg)?;
    let prompt = caption_prompt(&detections);
    let params = CompletionParams::sampled(cfg.caption_temperature, cfg.caption_candidates, cfg.max_tokens);
    let mut texts = Vec::new();
    let mut last_raw = String::new();
    for _ in 0..2 {
        for raw in lm.complete(&prompt, &params)? {
            let text = raw.split_whitespace().collect::<Vec<_>>().join(" ");
            if !text.is_empty() && !texts.contains(&text) {
                texts.push(text);
            }
            last_raw = raw;
        }
        if !texts.is_empty() {
            break;
        }
    }
    if texts.is_empty() {
        return Err(Error::Unparseable { raw: last_raw });
    }
    let mut candidates = texts
        .into_iter()
        .map(|text| Ok(CaptionCandidate { score: cosine_score(image, &vlm.embed_text(&text)?)?, text }))
        .collect::<Result<Vec<_>>>()?;
    candidates.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.text.cmp(&b.text)));
    Ok(ImageCaption { caption: candidates[0].text.clone(), candidates, detections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::mock::{synth_locator, MockLm, MockVlm, SyntheticWorld};
    use crate::foundation::MediaRef;
    use std::sync::Arc;

    #[test]
    fn grounded_candidate_wins() {
        let vlm = MockVlm::new("mock-vlm", Arc::new(SyntheticWorld::bundled()));
        let vocabs = InternetVocabularies::bundled(&vlm).unwrap();
        let img = vlm.embed_image(&MediaRef::image(synth_locator(&["dining room", "sandwich", "photo", "are no people"]))).unwrap();
        let out = caption_internet_image(&img, &vocabs, &MockLm::strong(), &vlm, &CaptionConfig::internet()).unwrap();
        assert_eq!(out.detections.places[0].label, "dining room");
        assert_eq!(out.detections.image_types[0].label, "photo");
        assert_eq!(out.detections.people[0].label, "are no people");
        assert_eq!(out.caption, "A sandwich in a dining room.");
        assert!(out.candidates.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn single_greedy_candidate_is_selected() {
        let vlm = MockVlm::new("mock-vlm", Arc::new(SyntheticWorld::bundled()));
        let vocabs = InternetVocabularies::bundled(&vlm).unwrap();
        let img = vlm.embed_image(&MediaRef::image(synth_locator(&["kitchen", "mug"]))).unwrap();
        let cfg = CaptionConfig { caption_candidates: 1, caption_temperature: 0.0, ..CaptionConfig::internet() };
        let out = caption_internet_image(&img, &vocabs, &MockLm::strong(), &vlm, &cfg).unwrap();
        assert_eq!(out.candidates.len(), 1);
        assert_eq!(out.caption, out.candidates[0].text);
    }
}

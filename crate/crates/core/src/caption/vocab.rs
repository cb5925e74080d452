use std::collections::HashSet;
use std::path::Path;

use super::entities::{normalize_entity, Category, RankedEntities, Scored};
use crate::data;
use crate::error::{Error, Result};
use crate::foundation::{Embedding, VisionLanguageModel};
use crate::retrieval::{score_all, KeyMatrix};

/// Label set for one detection category, optionally with cached VLM text
/// embeddings row-aligned to `labels`.
#[derive(Clone, Debug)]
pub struct EntityVocabulary {
    name: String,
    labels: Vec<String>,
    cache: Option<(String, KeyMatrix)>,
}

impl EntityVocabulary {
    pub fn new(name: impl Into<String>, labels: Vec<String>) -> Result<Self> {
        let name = name.into();
        if labels.is_empty() {
            return Err(Error::Empty("vocabulary"));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            let key = normalize_entity(l);
            if key.is_empty() {
                return Err(Error::format(&name, "empty label"));
            }
            if !seen.insert(key) {
                return Err(Error::format(&name, format!("duplicate label {l:?}")));
            }
        }
        Ok(Self { name, labels, cache: None })
    }

    /// One label per line, `#` comments.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        Self::new(name, data::parse_label_lines(text))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path.display().to_string(), &text)
    }

    pub fn places() -> Self {
        Self::parse("places", data::PLACES).expect("bundled vocabulary")
    }

    pub fn objects() -> Self {
        Self::parse("objects", data::OBJECTS).expect("bundled vocabulary")
    }

    pub fn image_types() -> Self {
        Self::new("image types", data::IMAGE_TYPES.map(String::from).to_vec()).expect("bundled vocabulary")
    }

    pub fn people_counts() -> Self {
        Self::new("people counts", data::PEOPLE_COUNTS.map(String::from).to_vec()).expect("bundled vocabulary")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Embeds every label with `vlm`; a cache from the same VLM is reused.
    pub fn embedded(mut self, vlm: &dyn VisionLanguageModel) -> Result<Self> {
        if self.cache.as_ref().is_some_and(|(id, _)| id == vlm.id()) {
            return Ok(self);
        }
        let rows = self.labels.iter().map(|l| vlm.embed_text(l)?.normalize()).collect::<Result<Vec<_>>>()?;
        self.cache = Some((vlm.id().to_string(), KeyMatrix::from_embeddings(&rows)?));
        Ok(self)
    }

    pub fn embeddings(&self) -> Option<&KeyMatrix> {
        self.cache.as_ref().map(|(_, m)| m)
    }

    pub fn embedded_with(&self) -> Option<&str> {
        self.cache.as_ref().map(|(id, _)| id.as_str())
    }
}

/// Top-`k` labels by cosine against the image. Requires cached embeddings.
pub fn rank_vocabulary(image: &Embedding, vocab: &EntityVocabulary, category: Category, top_k: usize) -> Result<RankedEntities> {
    let keys = vocab
        .embeddings()
        .ok_or_else(|| Error::Precondition(format!("vocabulary {} has no cached embeddings", vocab.name)))?;
    if top_k == 0 || top_k > vocab.len() {
        return Err(Error::Precondition(format!("top_k={top_k} outside 1..={}", vocab.len())));
    }
    let q = image.clone().normalize()?;
    let scores = score_all(q.values(), keys)?;
    let items = vocab.labels.iter().zip(scores).map(|(l, score)| Scored { label: l.clone(), score }).collect();
    Ok(RankedEntities::new(category, items)?.truncate(top_k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::mock::{synth_locator, MockVlm, SyntheticWorld};
    use crate::foundation::MediaRef;
    use std::sync::Arc;

    #[test]
    fn duplicate_labels_rejected_after_normalization() {
        assert!(EntityVocabulary::new("v", vec!["Kitchen".into(), " kitchen ".into()]).is_err());
        assert!(EntityVocabulary::new("v", vec![]).is_err());
    }

    #[test]
    fn kitchen_frame_ranks_kitchen_first() {
        let vlm = MockVlm::new("v", Arc::new(SyntheticWorld::bundled()));
        let vocab = EntityVocabulary::places().embedded(&vlm).unwrap();
        let img = vlm.embed_image(&MediaRef::image(synth_locator(&["kitchen"]))).unwrap();
        let r = rank_vocabulary(&img, &vocab, Category::Place, 3).unwrap();
        assert_eq!(r.items[0].label, "kitchen");
        assert_eq!(r.len(), 3);
        let all = rank_vocabulary(&img, &vocab, Category::Place, vocab.len()).unwrap();
        let mut got: Vec<&str> = all.labels();
        got.sort_unstable();
        let mut want: Vec<&str> = vocab.labels().iter().map(String::as_str).collect();
        want.sort_unstable();
        assert_eq!(got, want);
    }

    #[test]
    fn uncached_vocabulary_is_an_error() {
        let e = Embedding::new(vec![1.0, 0.0]).unwrap();
        assert!(rank_vocabulary(&e, &EntityVocabulary::image_types(), Category::ImageType, 1).is_err());
    }
}

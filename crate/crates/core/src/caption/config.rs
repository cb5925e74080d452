use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaptionConfig {
    pub n_places: usize,
    pub n_objects: usize,
    pub n_activities: usize,
    pub n_sounds: usize,
    pub caption_candidates: usize,
    pub caption_temperature: f64,
    /// Run the generate/re-rank loop after the first pass.
    pub expand: bool,
    pub equilibrium_max_rounds: usize,
    /// Re-ranked activities scoring below this are dropped; the best one always stays.
    pub rerank_keep_threshold: f64,
    /// Token budget for list and summary completions.
    pub max_tokens: usize,
}

impl Default for CaptionConfig {
    fn default() -> Self {
        Self {
            n_places: 3,
            n_objects: 3,
            n_activities: 3,
            n_sounds: 5,
            caption_candidates: 8,
            caption_temperature: 0.9,
            expand: true,
            equilibrium_max_rounds: 3,
            rerank_keep_threshold: 0.0,
            max_tokens: 64,
        }
    }
}

impl CaptionConfig {
    /// Defaults for Internet images: ten objects in the prompt.
    pub fn internet() -> Self {
        Self { n_objects: 10, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_places", self.n_places),
            ("n_objects", self.n_objects),
            ("n_activities", self.n_activities),
            ("n_sounds", self.n_sounds),
            ("caption_candidates", self.caption_candidates),
            ("equilibrium_max_rounds", self.equilibrium_max_rounds),
            ("max_tokens", self.max_tokens),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Precondition(format!("{name} must be positive")));
        }
        if !(self.caption_temperature >= 0.0 && self.caption_temperature.is_finite()) {
            return Err(Error::Precondition("caption_temperature must be a finite value ≥ 0".into()));
        }
        if !(-1.0..=1.0).contains(&self.rerank_keep_threshold) {
            return Err(Error::Precondition("rerank_keep_threshold must lie in [-1, 1]".into()));
        }
        Ok(())
    }
}

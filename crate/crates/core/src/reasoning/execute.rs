use serde::{Deserialize, Serialize};

use super::route::{route_question, Modality, Question};
use super::tasks::{answer_question, explain_answer};
use crate::data;
use crate::error::{Error, Result};
use crate::foundation::{AdapterSet, Embedding};
use crate::retrieval::{score_all, top_n_local_maxima, KeyMatrix};
use crate::world_state::{render_history, ClockFormat, FrameStream, SearchConfig, WorldStateHistory};

/// Per-frame keys of one modality with their timestamps.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameIndex {
    keys: KeyMatrix,
    t_ms: Vec<u64>,
}

impl FrameIndex {
    pub fn new(keys: KeyMatrix, t_ms: Vec<u64>) -> Result<Self> {
        if keys.count() != t_ms.len() {
            return Err(Error::Precondition(format!("{} keys for {} timestamps", keys.count(), t_ms.len())));
        }
        Ok(Self { keys, t_ms })
    }

    pub fn images(stream: &FrameStream) -> Result<Self> {
        Self::new(stream.image_keys()?, stream.timestamps())
    }

    pub fn audio(stream: &FrameStream, adapters: &AdapterSet) -> Result<Self> {
        Self::new(stream.audio_keys(adapters.alm()?)?, stream.timestamps())
    }

    /// Keys whose ids are the frame timestamps in milliseconds.
    pub fn from_keys_with_timestamp_ids(keys: KeyMatrix) -> Result<Self> {
        let ids = keys.ids().ok_or_else(|| Error::format("frame index", "keys carry no timestamp ids"))?;
        let t_ms = ids
            .iter()
            .map(|s| s.parse::<u64>().map_err(|_| Error::format("frame index", format!("id {s:?} is not a timestamp"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(keys, t_ms)
    }

    pub fn keys(&self) -> &KeyMatrix {
        &self.keys
    }

    pub fn timestamps(&self) -> &[u64] {
        &self.t_ms
    }

    /// Top local maxima of the query's scores over time.
    pub fn search(&self, query: &Embedding, cfg: &SearchConfig) -> Result<Vec<Retrieved>> {
        let q = query.clone().normalize()?;
        let scores = score_all(q.values(), &self.keys)?;
        Ok(top_n_local_maxima(&scores, cfg.n_per_entity, cfg.window)?
            .into_iter()
            .map(|i| Retrieved { frame: i, t_ms: self.t_ms[i], score: scores[i] })
            .collect())
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchIndexes {
    pub image: Option<FrameIndex>,
    pub audio: Option<FrameIndex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Retrieved {
    pub frame: usize,
    pub t_ms: u64,
    pub score: f64,
}

/// At least one of `text` and `retrieved` is present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieved: Option<Vec<Retrieved>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_entity: Option<String>,
    pub modality: Modality,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AskConfig {
    pub explain: bool,
    pub search: SearchConfig,
    pub route_few_shot: String,
    pub entity_few_shot: String,
}

impl Default for AskConfig {
    fn default() -> Self {
        Self {
            explain: true,
            search: SearchConfig::default(),
            route_few_shot: data::ROUTING_FEW_SHOT.to_string(),
            entity_few_shot: data::ENTITY_FEW_SHOT.to_string(),
        }
    }
}

/// Routes the question, then answers in text over the history or searches
/// the matching frame index.
pub fn execute(
    question: &Question,
    history: Option<&WorldStateHistory>,
    indexes: &SearchIndexes,
    adapters: &AdapterSet,
    cfg: &AskConfig,
) -> Result<Answer> {
    let lm = adapters.lm()?;
    let routed = route_question(question, lm, &cfg.route_few_shot, &cfg.entity_few_shot)?;
    let mut answer = Answer { text: None, explanation: None, retrieved: None, search_entity: None, modality: routed.modality, warnings: routed.warnings };
    match routed.modality {
        Modality::TextAnswer => {
            let history = history.ok_or(Error::Empty("history"))?;
            let rendered = render_history(history, ClockFormat::Twelve);
            let text = answer_question(&rendered, &question.text, lm)?;
            if cfg.explain {
                answer.explanation = Some(explain_answer(&rendered, &question.text, &text, lm)?);
            }
            answer.text = Some(text);
        }
        Modality::ImageSearch | Modality::AudioSearch => {
            let entity = routed.search_entity.expect("search routes carry an entity");
            let (index, query) = if routed.modality == Modality::ImageSearch {
                (indexes.image.as_ref().ok_or(Error::MissingIndex("image search"))?, adapters.vlm()?.embed_text(&entity)?)
            } else {
                (indexes.audio.as_ref().ok_or(Error::MissingIndex("audio search"))?, adapters.alm()?.embed_text(&entity)?)
            };
            answer.retrieved = Some(index.search(&query, &cfg.search)?);
            answer.search_entity = Some(entity);
        }
    }
    Ok(answer)
}

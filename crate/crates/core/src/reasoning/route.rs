use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::{CompletionParams, LanguageModel};
use crate::prompts;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    TextAnswer,
    ImageSearch,
    AudioSearch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    /// Forces the answer modality instead of asking the LM.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested: Option<Modality>,
}

impl Question {
    pub fn new(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Empty("question"));
        }
        Ok(Self { text: text.to_string(), requested: None })
    }

    pub fn forced(mut self, modality: Modality) -> Self {
        self.requested = Some(modality);
        self
    }
}

/// Search modalities always carry a nonempty entity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutedQuery {
    pub modality: Modality,
    pub search_entity: Option<String>,
    pub warnings: Vec<String>,
}

pub const SUBJECTIVE_WARNING: &str = "subjective question: the answer reflects language-model priors";

fn text_answer(warnings: Vec<String>) -> RoutedQuery {
    RoutedQuery { modality: Modality::TextAnswer, search_entity: None, warnings }
}

fn clean_entity(s: &str) -> Option<String> {
    let e = s.trim().trim_end_matches(['.', '?', '!']).trim();
    (!e.is_empty()).then(|| e.to_string())
}

/// Reads a routing completion; anything unrecognized becomes a text answer
/// with a warning.
pub fn parse_route(raw: &str) -> RoutedQuery {
    let line = raw.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let lower = line.to_lowercase();
    for (prefix, modality) in [("image search:", Modality::ImageSearch), ("audio search:", Modality::AudioSearch)] {
        if lower.starts_with(prefix) {
            if let Some(entity) = clean_entity(&line[prefix.len()..]) {
                return RoutedQuery { modality, search_entity: Some(entity), warnings: vec![] };
            }
        }
    }
    if lower.starts_with("text answer") {
        let warnings = if lower.contains("subjective") { vec![SUBJECTIVE_WARNING.to_string()] } else { vec![] };
        return text_answer(warnings);
    }
    text_answer(vec![format!("unrecognized routing output {line:?}; answering in text")])
}

fn route_params() -> CompletionParams {
    CompletionParams::greedy(16).with_stop("\n")
}

pub fn extract_search_entity(question: &Question, lm: &dyn LanguageModel, few_shot: &str) -> Result<Option<String>> {
    let prompt = prompts::search_entity(few_shot, &question.text);
    let raw = lm.complete(&prompt, &route_params())?.into_iter().next().unwrap_or_default();
    Ok(raw.lines().map(str::trim).find(|l| !l.is_empty()).and_then(clean_entity))
}

/// Chooses the answer modality. A forced modality skips
/// classification; forced searches still ask the LM for the entity.
pub fn route_question(
    question: &Question,
    lm: &dyn LanguageModel,
    route_few_shot: &str,
    entity_few_shot: &str,
) -> Result<RoutedQuery> {
    if route_few_shot.trim().is_empty() {
        return Err(Error::Empty("routing few-shot block"));
    }
    match question.requested {
        Some(Modality::TextAnswer) => Ok(text_answer(vec![])),
        Some(modality) => match extract_search_entity(question, lm, entity_few_shot)? {
            Some(entity) => Ok(RoutedQuery { modality, search_entity: Some(entity), warnings: vec![] }),
            None => Ok(RoutedQuery { modality, search_entity: Some(question.text.clone()), warnings: vec![
                "no search entity extracted; searching with the full question".into(),
            ] }),
        },
        None => {
            let raw = lm.complete(&prompts::route(route_few_shot, &question.text), &route_params())?;
            Ok(parse_route(raw.first().map(String::as_str).unwrap_or("")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::foundation::mock::MockLm;

    fn route(q: &str) -> RoutedQuery {
        route_question(&Question::new(q).unwrap(), &MockLm::strong(), data::ROUTING_FEW_SHOT, data::ENTITY_FEW_SHOT).unwrap()
    }

    #[test]
    fn routes_like_the_examples() {
        let r = route("where did I leave my remote control");
        assert_eq!((r.modality, r.search_entity.as_deref()), (Modality::ImageSearch, Some("remote control")));
        let r = route("what did my daughter's laugh sound like today?");
        assert_eq!((r.modality, r.search_entity.as_deref()), (Modality::AudioSearch, Some("daughter's laugh")));
        let r = route("was I happy today?");
        assert_eq!((r.modality, r.search_entity), (Modality::TextAnswer, None));
        assert_eq!(r.warnings, [SUBJECTIVE_WARNING]);
        assert_eq!(route("did I eat dinner today?").modality, Modality::TextAnswer);
    }

    #[test]
    fn garbage_falls_back_to_text() {
        for raw in ["", "banana", "image search:  ", "audio search: ."] {
            let r = parse_route(raw);
            assert_eq!(r.modality, Modality::TextAnswer);
            assert_eq!(r.warnings.len(), 1, "{raw:?}");
        }
    }

    #[test]
    fn forced_search_extracts_entity() {
        let q = Question::new("when did I last wash my hands?").unwrap().forced(Modality::ImageSearch);
        let r = route_question(&q, &MockLm::strong(), data::ROUTING_FEW_SHOT, data::ENTITY_FEW_SHOT).unwrap();
        assert_eq!(r.search_entity.as_deref(), Some("wash my hands"));
    }
}

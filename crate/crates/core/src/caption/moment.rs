use serde::{Deserialize, Serialize};

use super::config::CaptionConfig;
use super::entities::{parse_list, scored_order, Category, RankedEntities, Scored};
use super::vocab::{rank_vocabulary, EntityVocabulary};
use crate::error::{Error, Result};
use crate::foundation::{
    complete_nonempty, cosine_score, AdapterSet, AudioLanguageModel, CompletionParams, Embedding, LanguageModel,
    MediaKind, MediaRef, Role, VisionLanguageModel,
};
use crate::prompts;

/// Entities detected or inferred for one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentState {
    pub places: RankedEntities,
    pub objects: RankedEntities,
    pub activities: RankedEntities,
}

impl MomentState {
    fn category_mut(&mut self, c: Category) -> &mut RankedEntities {
        match c {
            Category::Place => &mut self.places,
            Category::Object => &mut self.objects,
            _ => &mut self.activities,
        }
    }

    pub fn entity_count(&self) -> usize {
        self.places.len() + self.objects.len() + self.activities.len()
    }
}

/// Caption of one frame: the detections plus the LM summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub t_ms: u64,
    pub places: RankedEntities,
    pub objects: RankedEntities,
    pub activities: RankedEntities,
    pub sound: Option<Scored>,
    /// Completion of "I am most likely", e.g. "making coffee in the kitchen."
    pub summary_text: String,
}

impl MomentSummary {
    /// The summary as a first-person log sentence.
    pub fn first_person(&self) -> String {
        format!("I am {}", self.summary_text)
    }
}

fn labels(r: &RankedEntities) -> Vec<&str> {
    r.labels()
}

fn list_params(cfg: &CaptionConfig) -> CompletionParams {
    CompletionParams::greedy(cfg.max_tokens)
}

/// List completion parsed into entities, retried once when nothing parses.
fn complete_list(lm: &dyn LanguageModel, prompt: &str, params: &CompletionParams) -> Result<Vec<String>> {
    let mut raw = String::new();
    for _ in 0..2 {
        raw = lm.complete(prompt, params)?.into_iter().next().unwrap_or_default();
        let items = parse_list(&raw);
        if !items.is_empty() {
            return Ok(items);
        }
    }
    Err(Error::Unparseable { raw })
}

/// One paragraph: whitespace runs, including newlines, become single spaces.
fn paragraph(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn generate_activities(
    places: &RankedEntities,
    objects: &RankedEntities,
    lm: &dyn LanguageModel,
    cfg: &CaptionConfig,
) -> Result<Vec<String>> {
    if places.is_empty() || objects.is_empty() {
        return Err(Error::Precondition("activity generation needs places and objects".into()));
    }
    complete_list(lm, &prompts::activities(&labels(places), &labels(objects)), &list_params(cfg))
}

fn score_texts<F>(target: &Embedding, candidates: &[String], embed: F) -> Result<Vec<Scored>>
where
    F: Fn(&str) -> Result<Embedding>,
{
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for c in candidates {
        if seen.insert(c.as_str()) {
            out.push(Scored { label: c.clone(), score: cosine_score(target, &embed(c)?)? });
        }
    }
    Ok(out)
}

/// VLM-sorted top `top_k` of `candidates`.
pub fn rerank_candidates(
    image: &Embedding,
    candidates: &[String],
    vlm: &dyn VisionLanguageModel,
    category: Category,
    top_k: usize,
) -> Result<RankedEntities> {
    if candidates.is_empty() {
        return Err(Error::Empty("candidates"));
    }
    let scored = score_texts(image, candidates, |t| vlm.embed_text(t))?;
    Ok(RankedEntities::new(category, scored)?.truncate(top_k))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub state: MomentState,
    pub rounds_used: usize,
    /// The last allowed round still added entities.
    pub truncated: bool,
}

/// Grows the entity sets until a round adds nothing or the round limit hits.
///
/// Each round proposes activities from places and objects, objects from
/// places and the top activity, and places from objects and the top
/// activity. A proposal not already present is accepted when its VLM score
/// reaches the mean score of its category (or `rerank_keep_threshold` when
/// the category is empty).
pub fn expand_to_equilibrium(
    state: MomentState,
    lm: &dyn LanguageModel,
    vlm: &dyn VisionLanguageModel,
    image: &Embedding,
    cfg: &CaptionConfig,
) -> Result<Expansion> {
    if state.entity_count() == 0 {
        return Err(Error::Precondition("equilibrium needs at least one entity".into()));
    }
    let mut state = state;
    let params = list_params(cfg);
    for round in 1..=cfg.equilibrium_max_rounds {
        let mut added = 0;
        for category in [Category::Activity, Category::Object, Category::Place] {
            let top_activity = state.activities.top().map(|s| s.label.clone());
            let prompt = match (category, top_activity) {
                (Category::Activity, _) if !state.places.is_empty() && !state.objects.is_empty() => {
                    prompts::activities(&labels(&state.places), &labels(&state.objects))
                }
                (Category::Object, Some(a)) => prompts::more_objects(&labels(&state.places), &a),
                (Category::Place, Some(a)) => prompts::more_places(&labels(&state.objects), &a),
                _ => continue,
            };
            let raw = lm.complete(&prompt, &params)?.into_iter().next().unwrap_or_default();
            let current = state.category_mut(category);
            let fresh: Vec<String> = parse_list(&raw).into_iter().filter(|p| !current.contains(p)).collect();
            if fresh.is_empty() {
                continue;
            }
            let threshold = current.mean_score().unwrap_or(cfg.rerank_keep_threshold);
            let accepted: Vec<Scored> =
                score_texts(image, &fresh, |t| vlm.embed_text(t))?.into_iter().filter(|s| s.score >= threshold).collect();
            added += accepted.len();
            current.items.extend(accepted);
            current.items.sort_by(scored_order);
        }
        if added == 0 {
            return Ok(Expansion { state, rounds_used: round, truncated: false });
        }
        if round == cfg.equilibrium_max_rounds {
            return Ok(Expansion { state, rounds_used: round, truncated: true });
        }
    }
    unreachable!("equilibrium_max_rounds is positive")
}

fn require_summary_inputs(state: &MomentState) -> Result<()> {
    if state.places.is_empty() {
        return Err(Error::Precondition("summary needs at least one place".into()));
    }
    if state.activities.is_empty() {
        return Err(Error::Precondition("summary needs at least one activity".into()));
    }
    Ok(())
}

/// Summary from all places and objects and the top activity.
pub fn summarize_moment(state: &MomentState, lm: &dyn LanguageModel, cfg: &CaptionConfig) -> Result<String> {
    require_summary_inputs(state)?;
    let activity = &state.activities.items[0].label;
    let prompt = prompts::moment_summary(&labels(&state.places), &labels(&state.objects), activity);
    Ok(paragraph(&complete_nonempty(lm, &prompt, &list_params(cfg))?))
}

pub fn suggest_sounds(state: &MomentState, lm: &dyn LanguageModel, cfg: &CaptionConfig) -> Result<Vec<String>> {
    require_summary_inputs(state)?;
    let activity = &state.activities.items[0].label;
    let prompt = prompts::possible_sounds(&labels(&state.places), &labels(&state.objects), activity, cfg.n_sounds);
    let mut sounds = complete_list(lm, &prompt, &list_params(cfg))?;
    sounds.truncate(cfg.n_sounds);
    Ok(sounds)
}

/// ALM-cosine argmax over `candidates`, ties to the smaller label.
pub fn pick_sound(audio: &Embedding, candidates: &[String], alm: &dyn AudioLanguageModel) -> Result<Scored> {
    if candidates.is_empty() {
        return Err(Error::Empty("sound candidates"));
    }
    let mut scored = score_texts(audio, candidates, |t| alm.embed_text(t))?;
    scored.sort_by(scored_order);
    Ok(scored.swap_remove(0))
}

/// Summary with a heard sound; without one it is exactly [`summarize_moment`].
pub fn summarize_moment_with_audio(
    state: &MomentState,
    sound: Option<&str>,
    lm: &dyn LanguageModel,
    cfg: &CaptionConfig,
) -> Result<String> {
    let Some(sound) = sound else {
        return summarize_moment(state, lm, cfg);
    };
    require_summary_inputs(state)?;
    let prompt = prompts::moment_summary_with_sound(
        &state.places.items[0].label,
        &labels(&state.objects),
        sound,
        &state.activities.items[0].label,
    );
    Ok(paragraph(&complete_nonempty(lm, &prompt, &list_params(cfg))?))
}

/// The full single-frame pipeline over fixed place and object vocabularies.
#[derive(Clone, Debug)]
pub struct EgocentricCaptioner {
    cfg: CaptionConfig,
    places: EntityVocabulary,
    objects: EntityVocabulary,
}

impl EgocentricCaptioner {
    /// Embeds both vocabularies with `vlm` once, up front.
    pub fn new(cfg: CaptionConfig, places: EntityVocabulary, objects: EntityVocabulary, vlm: &dyn VisionLanguageModel) -> Result<Self> {
        cfg.validate()?;
        if cfg.n_places > places.len() || cfg.n_objects > objects.len() {
            return Err(Error::Precondition("top-n exceeds vocabulary size".into()));
        }
        Ok(Self { cfg, places: places.embedded(vlm)?, objects: objects.embedded(vlm)? })
    }

    pub fn bundled(cfg: CaptionConfig, vlm: &dyn VisionLanguageModel) -> Result<Self> {
        Self::new(cfg, EntityVocabulary::places(), EntityVocabulary::objects(), vlm)
    }

    pub fn config(&self) -> &CaptionConfig {
        &self.cfg
    }

    /// Detection through re-ranking, optionally expanded to equilibrium.
    pub fn detect(&self, image: &Embedding, adapters: &AdapterSet) -> Result<MomentState> {
        let (lm, vlm) = (adapters.lm()?, adapters.vlm()?);
        self.check_vlm(vlm)?;
        let places = rank_vocabulary(image, &self.places, Category::Place, self.cfg.n_places)?;
        let objects = rank_vocabulary(image, &self.objects, Category::Object, self.cfg.n_objects)?;
        let candidates = generate_activities(&places, &objects, lm, &self.cfg)?;
        let ranked = rerank_candidates(image, &candidates, vlm, Category::Activity, self.cfg.n_activities)?;
        let best = ranked.items[0].clone();
        let mut kept: Vec<Scored> = ranked.items.into_iter().filter(|s| s.score >= self.cfg.rerank_keep_threshold).collect();
        if kept.is_empty() {
            kept.push(best);
        }
        let state = MomentState { places, objects, activities: RankedEntities::new(Category::Activity, kept)? };
        if !self.cfg.expand {
            return Ok(state);
        }
        Ok(expand_to_equilibrium(state, lm, vlm, image, &self.cfg)?.state)
    }

    /// Captions one frame; with `audio` and an ALM the summary mentions the
    /// most likely suggested sound.
    pub fn describe(&self, t_ms: u64, image: &Embedding, audio: Option<&MediaRef>, adapters: &AdapterSet) -> Result<MomentSummary> {
        let mut roles = vec![Role::LmGenerate, Role::Vlm];
        if audio.is_some() {
            roles.push(Role::Alm);
        }
        adapters.require(&roles)?;
        let lm = adapters.lm()?;
        let state = self.detect(image, adapters)?;
        let sound = match audio {
            Some(media) => {
                media.expect(MediaKind::Audio)?;
                let alm = adapters.alm()?;
                let candidates = suggest_sounds(&state, lm, &self.cfg)?;
                Some(pick_sound(&alm.embed_audio(media)?, &candidates, alm)?)
            }
            None => None,
        };
        let summary_text = summarize_moment_with_audio(&state, sound.as_ref().map(|s| s.label.as_str()), lm, &self.cfg)?;
        Ok(MomentSummary {
            t_ms,
            places: state.places,
            objects: state.objects,
            activities: state.activities,
            sound,
            summary_text,
        })
    }

    fn check_vlm(&self, vlm: &dyn VisionLanguageModel) -> Result<()> {
        for v in [&self.places, &self.objects] {
            if v.embedded_with() != Some(vlm.id()) {
                return Err(Error::Precondition(format!(
                    "vocabulary {} was embedded with {:?}, not {}",
                    v.name(),
                    v.embedded_with(),
                    vlm.id()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::mock::{bundled_adapters, synth_locator, FnLm, MockLm, MockVlm, SyntheticWorld};
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn ranked(category: Category, items: &[(&str, f64)]) -> RankedEntities {
        RankedEntities::new(category, items.iter().map(|(l, s)| Scored { label: l.to_string(), score: *s }).collect()).unwrap()
    }

    fn world_vlm() -> MockVlm {
        MockVlm::new("mock-vlm", Arc::new(SyntheticWorld::bundled()))
    }

    #[test]
    fn mock_activities_for_kitchen() {
        let lm = MockLm::strong();
        let got = generate_activities(
            &ranked(Category::Place, &[("kitchen", 0.9)]),
            &ranked(Category::Object, &[("coffee maker", 0.8)]),
            &lm,
            &CaptionConfig::default(),
        )
        .unwrap();
        assert_eq!(got, ["making coffee", "brewing espresso", "washing dishes"]);
    }

    #[test]
    fn empty_activity_completion_fails_with_raw_text() {
        let lm = FnLm::new("blank", |_: &str, _: &CompletionParams| vec![" .".to_string()]);
        let e = generate_activities(
            &ranked(Category::Place, &[("a", 1.0)]),
            &ranked(Category::Object, &[("b", 1.0)]),
            &lm,
            &CaptionConfig::default(),
        );
        assert!(matches!(e, Err(Error::Unparseable { raw }) if raw == " ."));
    }

    #[test]
    fn rerank_prefers_frame_activity() {
        let vlm = world_vlm();
        let img = vlm.embed_image(&MediaRef::image(synth_locator(&["yard", "chopping wood"]))).unwrap();
        let r = rerank_candidates(&img, &["swimming".into(), "chopping wood".into()], &vlm, Category::Activity, 5).unwrap();
        assert_eq!(r.labels(), ["chopping wood", "swimming"]);
        let one = rerank_candidates(&img, &["swimming".into()], &vlm, Category::Activity, 1).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn summary_follows_template_rule() {
        let state = MomentState {
            places: ranked(Category::Place, &[("kitchen", 0.9)]),
            objects: ranked(Category::Object, &[("coffee maker", 0.8)]),
            activities: ranked(Category::Activity, &[("making coffee", 0.7)]),
        };
        let cfg = CaptionConfig::default();
        let lm = MockLm::strong();
        assert_eq!(summarize_moment(&state, &lm, &cfg).unwrap(), "making coffee in the kitchen.");
        assert_eq!(summarize_moment_with_audio(&state, None, &lm, &cfg).unwrap(), "making coffee in the kitchen.");
        assert_eq!(
            summarize_moment_with_audio(&state, Some("a kettle whistling"), &lm, &cfg).unwrap(),
            "making coffee, and I may hear a kettle whistling."
        );
        let no_activity = MomentState { activities: RankedEntities::empty(Category::Activity), ..state };
        assert!(matches!(summarize_moment(&no_activity, &lm, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn fixed_point_stops_after_one_round() {
        let state = MomentState {
            places: ranked(Category::Place, &[("kitchen", 0.9)]),
            objects: ranked(Category::Object, &[("mug", 0.8)]),
            activities: ranked(Category::Activity, &[("making coffee", 0.7)]),
        };
        let echo = FnLm::new("echo", |p: &str, _: &CompletionParams| {
            let out = if p.ends_with("Activities:") {
                "making coffee"
            } else if p.contains("objects that") {
                "mug."
            } else {
                "Kitchen"
            };
            vec![out.to_string()]
        });
        let vlm = world_vlm();
        let img = vlm.embed_image(&MediaRef::image(synth_locator(&["kitchen"]))).unwrap();
        let out = expand_to_equilibrium(state.clone(), &echo, &vlm, &img, &CaptionConfig::default()).unwrap();
        assert_eq!((out.rounds_used, out.truncated), (1, false));
        assert_eq!(out.state, state);
    }

    #[test]
    fn endless_proposals_truncate_at_round_limit() {
        let state = MomentState {
            places: ranked(Category::Place, &[("kitchen", -1.0)]),
            objects: ranked(Category::Object, &[("mug", -1.0)]),
            activities: ranked(Category::Activity, &[("making coffee", -1.0)]),
        };
        let n = AtomicUsize::new(0);
        let fresh = FnLm::new("fresh", move |p: &str, _: &CompletionParams| {
            let out = if p.ends_with("Activities:") { format!("novelty {}", n.fetch_add(1, Ordering::SeqCst)) } else { String::new() };
            vec![out]
        });
        let vlm = world_vlm();
        let img = vlm.embed_image(&MediaRef::image(synth_locator(&["kitchen"]))).unwrap();
        let cfg = CaptionConfig { equilibrium_max_rounds: 3, ..CaptionConfig::default() };
        let out = expand_to_equilibrium(state, &fresh, &vlm, &img, &cfg).unwrap();
        assert_eq!((out.rounds_used, out.truncated), (3, true));
        assert!(out.state.activities.len() > 1);
    }

    #[test]
    fn pipeline_recovers_planted_scene() {
        let adapters = bundled_adapters();
        let vlm = adapters.vlm().unwrap();
        let captioner = EgocentricCaptioner::bundled(CaptionConfig::default(), vlm).unwrap();
        let img = vlm.embed_image(&MediaRef::image(synth_locator(&["kitchen", "coffee maker", "making coffee"]))).unwrap();
        let audio = MediaRef::audio(synth_locator(&["kettle whistling"]));
        let m = captioner.describe(5, &img, Some(&audio), &adapters).unwrap();
        assert_eq!(m.places.items[0].label, "kitchen");
        assert_eq!(m.activities.items[0].label, "making coffee");
        assert_eq!(m.sound.as_ref().unwrap().label, "kettle whistling");
        assert_eq!(m.summary_text, "making coffee, and I may hear kettle whistling.");
        let silent = captioner.describe(5, &img, None, &adapters).unwrap();
        assert_eq!(silent.first_person(), "I am making coffee in the kitchen.");
        assert_eq!(silent, captioner.describe(5, &img, None, &adapters).unwrap());
    }
}

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stream::FrameStream;
use crate::caption::{EgocentricCaptioner, MomentSummary, Scored};
use crate::error::{Error, Result};
use crate::foundation::{complete_nonempty, AdapterSet, CompletionParams, LanguageModel};
use crate::prompts;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Uniform,
    Search,
    /// Union of uniform and search selections.
    Hybrid,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    #[default]
    Observed,
    /// Produced by condensing a run of events.
    Condensed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t_ms: u64,
    #[serde(default)]
    pub places: Vec<Scored>,
    #[serde(default)]
    pub objects: Vec<Scored>,
    #[serde(default)]
    pub activities: Vec<Scored>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sound: Option<Scored>,
    /// First-person sentence, e.g. "I am making coffee in the kitchen."
    pub summary: String,
    #[serde(default)]
    pub origin: Origin,
}

impl From<MomentSummary> for Event {
    fn from(m: MomentSummary) -> Self {
        let summary = m.first_person();
        Event {
            t_ms: m.t_ms,
            places: m.places.items,
            objects: m.objects.items,
            activities: m.activities.items,
            sound: m.sound,
            summary,
            origin: Origin::Observed,
        }
    }
}

/// Chronological event log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldStateHistory {
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_entities: Option<Vec<String>>,
    pub events: Vec<Event>,
}

impl WorldStateHistory {
    pub fn new(source: Source, events: Vec<Event>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::Empty("history"));
        }
        if events.windows(2).any(|w| w[1].t_ms < w[0].t_ms) {
            return Err(Error::Precondition("history events out of time order".into()));
        }
        Ok(Self { source, search_entities: None, events })
    }

    pub fn with_search_entities(mut self, entities: Vec<String>) -> Self {
        self.search_entities = Some(entities);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let h: WorldStateHistory = serde_json::from_str(text)?;
        let entities = h.search_entities.clone();
        let mut checked = Self::new(h.source, h.events)?;
        checked.search_entities = entities;
        Ok(checked)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("history serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::format(path.display().to_string(), j.to_string()),
            other => other,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockFormat {
    /// `1:46 PM`
    #[default]
    Twelve,
    /// `13:46`
    TwentyFour,
}

/// Time of day for a millisecond offset from midnight; wraps every 24 h.
pub fn clock(t_ms: u64, format: ClockFormat) -> String {
    let minutes = (t_ms / 60_000) % (24 * 60);
    let (h, m) = (minutes / 60, minutes % 60);
    match format {
        ClockFormat::Twelve => {
            let h12 = if h % 12 == 0 { 12 } else { h % 12 };
            format!("{h12}:{m:02} {}", if h < 12 { "AM" } else { "PM" })
        }
        ClockFormat::TwentyFour => format!("{h:02}:{m:02}"),
    }
}

fn render_events(events: &[Event], format: ClockFormat) -> String {
    events.iter().map(|e| format!("{}: {}", clock(e.t_ms, format), e.summary)).collect::<Vec<_>>().join("\n")
}

/// One `H:MM AM: summary` line per event.
pub fn render_history(history: &WorldStateHistory, format: ClockFormat) -> String {
    render_events(&history.events, format)
}

/// Captions the selected frames (in parallel) into an ordered history.
pub fn compile_history(
    stream: &FrameStream,
    indices: &[usize],
    captioner: &EgocentricCaptioner,
    adapters: &AdapterSet,
    source: Source,
) -> Result<WorldStateHistory> {
    if indices.is_empty() {
        return Err(Error::Empty("key frame selection"));
    }
    if indices.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("frame indices must be strictly increasing".into()));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= stream.len()) {
        return Err(Error::Precondition(format!("frame index {bad} out of range")));
    }
    let events = indices
        .par_iter()
        .map(|&i| {
            let f = &stream.frames()[i];
            captioner.describe(f.t_ms, &f.image, f.audio.as_ref(), adapters).map(Event::from).map_err(|e| Error::at_frame(i, e))
        })
        .collect::<Result<Vec<_>>>()?;
    WorldStateHistory::new(source, events)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CondenseConfig {
    pub budget_chars: usize,
    /// Events per summarization chunk, at least 2.
    pub chunk_size: usize,
    pub max_tokens: usize,
}

impl Default for CondenseConfig {
    fn default() -> Self {
        Self { budget_chars: 8000, chunk_size: 6, max_tokens: 128 }
    }
}

/// Condenses the history until its rendering fits `budget_chars`.
///
/// Each level replaces every run of `chunk_size` events by one condensed
/// event stamped with the run's first timestamp, so the event count strictly
/// decreases. A single event over budget is irreducible.
pub fn recursive_summarize(history: &WorldStateHistory, lm: &dyn LanguageModel, cfg: &CondenseConfig) -> Result<WorldStateHistory> {
    if cfg.budget_chars == 0 {
        return Err(Error::Precondition("budget must be positive".into()));
    }
    if cfg.chunk_size < 2 {
        return Err(Error::Precondition("chunk_size must be at least 2".into()));
    }
    let mut events = history.events.clone();
    let params = CompletionParams::greedy(cfg.max_tokens);
    loop {
        let len = render_events(&events, ClockFormat::Twelve).chars().count();
        if len <= cfg.budget_chars {
            break;
        }
        if events.len() == 1 {
            return Err(Error::Irreducible { t_ms: events[0].t_ms, len, budget: cfg.budget_chars });
        }
        events = events
            .chunks(cfg.chunk_size)
            .map(|chunk| {
                if chunk.len() == 1 {
                    return Ok(chunk[0].clone());
                }
                let prompt = prompts::chunk_summary(&render_events(chunk, ClockFormat::Twelve));
                let text = complete_nonempty(lm, &prompt, &params)?;
                Ok(Event {
                    t_ms: chunk[0].t_ms,
                    places: vec![],
                    objects: vec![],
                    activities: vec![],
                    sound: None,
                    summary: text.split_whitespace().collect::<Vec<_>>().join(" "),
                    origin: Origin::Condensed,
                })
            })
            .collect::<Result<Vec<_>>>()?;
    }
    let mut out = history.clone();
    out.events = events;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::mock::MockLm;

    fn ev(t_ms: u64, summary: &str) -> Event {
        Event { t_ms, places: vec![], objects: vec![], activities: vec![], sound: None, summary: summary.into(), origin: Origin::Observed }
    }

    #[test]
    fn clock_examples() {
        assert_eq!(clock(13 * 3_600_000 + 46 * 60_000, ClockFormat::Twelve), "1:46 PM");
        assert_eq!(clock(0, ClockFormat::Twelve), "12:00 AM");
        assert_eq!(clock(12 * 3_600_000, ClockFormat::Twelve), "12:00 PM");
        assert_eq!(clock(13 * 3_600_000 + 46 * 60_000, ClockFormat::TwentyFour), "13:46");
    }

    #[test]
    fn render_lines_in_order() {
        let h = WorldStateHistory::new(
            Source::Uniform,
            vec![ev(13 * 3_600_000 + 46 * 60_000, "I am eating a sandwich in a kitchen."), ev(14 * 3_600_000, "I am resting.")],
        )
        .unwrap();
        assert_eq!(render_history(&h, ClockFormat::Twelve), "1:46 PM: I am eating a sandwich in a kitchen.\n2:00 PM: I am resting.");
    }

    #[test]
    fn json_roundtrip() {
        let mut e = ev(5, "I am x.");
        e.sound = Some(Scored { label: "footsteps".into(), score: 0.25 });
        e.places = vec![Scored { label: "staircase".into(), score: 0.5 }];
        let h = WorldStateHistory::new(Source::Search, vec![e]).unwrap().with_search_entities(vec!["x".into()]);
        assert_eq!(WorldStateHistory::from_json(&h.to_json()).unwrap(), h);
        assert!(WorldStateHistory::from_json(r#"{"source":"uniform","events":[]}"#).is_err());
    }

    #[test]
    fn condensing_reduces_event_count() {
        let events = (0..8).map(|i| ev(i * 60_000, &format!("I am doing thing number {i}."))).collect();
        let h = WorldStateHistory::new(Source::Uniform, events).unwrap();
        let lm = MockLm::strong();
        let same = recursive_summarize(&h, &lm, &CondenseConfig { budget_chars: 10_000, chunk_size: 4, max_tokens: 128 }).unwrap();
        assert_eq!(same, h);
        let full = render_history(&h, ClockFormat::Twelve).chars().count();
        let out = recursive_summarize(&h, &lm, &CondenseConfig { budget_chars: full - 1, chunk_size: 4, max_tokens: 128 }).unwrap();
        assert_eq!(out.events.len(), 2);
        assert!(out.events.iter().all(|e| e.origin == Origin::Condensed));
        assert_eq!(out.events[0].summary, "I was doing thing number 0, then doing thing number 1, then doing thing number 2, then doing thing number 3.");
    }

    #[test]
    fn oversized_single_event_is_irreducible() {
        let h = WorldStateHistory::new(Source::Uniform, vec![ev(0, "I am here.")]).unwrap();
        let r = recursive_summarize(&h, &MockLm::strong(), &CondenseConfig { budget_chars: 5, chunk_size: 6, max_tokens: 64 });
        assert!(matches!(r, Err(Error::Irreducible { t_ms: 0, .. })));
    }
}

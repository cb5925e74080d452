//! Published input/output pairs replayed through the real pipeline code.
//!
//! `SCRIPT` holds the recorded completions; `cases()` runs each pipeline step
//! against an adapter set and names the output it must reproduce.

#![allow(dead_code)]

use socratic_core::caption::{suggest_sounds, summarize_moment, CaptionConfig, Category, MomentState, RankedEntities, Scored};
use socratic_core::foundation::AdapterSet;
use socratic_core::reasoning::{answer_question, apply_correction, explain_answer, forecast, summarize_day};
use socratic_core::prompts;
use socratic_core::world_state::{render_history, ClockFormat, Event, Origin, Source, WorldStateHistory};
use socratic_core::Result;

/// Milliseconds since midnight.
pub const fn at(h: u64, m: u64) -> u64 {
    (h * 60 + m) * 60_000
}

fn event(t_ms: u64, summary: &str) -> Event {
    Event { t_ms, places: vec![], objects: vec![], activities: vec![], sound: None, summary: summary.into(), origin: Origin::Observed }
}

pub fn day_history() -> WorldStateHistory {
    let events = vec![
        event(at(8, 2), "I am sleeping in a bed in a bedroom."),
        event(at(10, 17), "I am making coffee in the kitchen."),
        event(at(11, 40), "I am chopping wood in a yard."),
        event(at(13, 5), "I am watching tv in a living room."),
        event(at(14, 10), "I am doing laundry in a utility room."),
        event(at(15, 24), "I am receiving a package on the porch."),
        event(at(16, 2), "I am bench pressing in an indoor gymnasium."),
        event(at(17, 27), "I am eating a sandwich in a kitchen."),
        event(at(20, 45), "I am drinking wine in a living room."),
    ];
    WorldStateHistory::new(Source::Uniform, events).expect("valid fixture history")
}

pub fn forecast_history() -> WorldStateHistory {
    let events = vec![
        event(at(13, 46), "I am eating a sandwich in a kitchen."),
        event(at(14, 18), "I am checking time and working on a laptop in a clean room."),
        event(at(14, 49), "I am buying produce from a grocery store or market."),
    ];
    WorldStateHistory::new(Source::Uniform, events).expect("valid fixture history")
}

pub const FORECAST_TIMES: [u64; 3] = [at(15, 21), at(16, 3), at(16, 35)];

/// (question, answer, explanation); an empty explanation means none is quoted.
pub const QA: &[(&str, &str, &str)] = &[
    ("did I eat dinner today?", "yes I ate dinner today.", "I was seen eating a sandwich in a kitchen at 5:27 PM."),
    ("did I drive today?", "no, I did not drive today.", "I was at home all day."),
    ("when did I last drink coffee?", "I last drank coffee at 10:17 AM", "I was making coffee in the kitchen."),
    ("how many times did I receive a package today?", "I received a package once today.", "I was receiving a package at 3:24 PM"),
    ("why did I go to the front porch today?", "I went to the front porch today to receive a package.", "I saw on the porch a package and knew that I was expecting it."),
    ("what was I doing outdoors?", "I was chopping wood in a yard.", ""),
];

pub const WINE_SUMMARY: &str = "enjoying a glass of wine with a friend or loved one.";
pub const STAIR_SOUNDS: &str = "footsteps, creaking stairs, someone calling your name, a dog barking, a centipede crawling";
pub const DAY_SUMMARY: &str =
    "I slept in a bed, made coffee, watched TV, did laundry, received a package, bench pressed, showered, ate a sandwich, worked on a computer, and drank wine.";
pub const CORRECTED: &str = "I am camping with my family and enjoying the company of them around the fire.";
pub const FORECAST_LINES: [&str; 3] = ["I am driving a car.", "I am in a park and see a playground.", "I am in a home and see a television."];

pub fn correction_context() -> String {
    prompts::correction_context(
        &["outdoor cabin", "campsite", "outdoor inn"],
        &["fire", "marshmallow", "fire iron", "hearth", "fireside", "camp chair"],
        &["roasting marshmallows", "sitting around the fire", "chatting"],
        "sitting around the fire",
    )
}
pub const ORIGINAL_SUMMARY: &str = "I am camping and enjoying the company of my friends around the fire.";
pub const CORRECTION: &str = "It was actually my family, not friends, sitting around the fire.";

fn ranked(category: Category, labels: &[&str]) -> RankedEntities {
    let n = labels.len() as f64;
    let items = labels.iter().enumerate().map(|(i, l)| Scored { label: l.to_string(), score: (n - i as f64) / n }).collect();
    RankedEntities::new(category, items).expect("finite scores")
}

pub fn wine_state() -> MomentState {
    MomentState {
        places: ranked(Category::Place, &["nursing home", "landfill", "living room"]),
        objects: ranked(Category::Object, &["wine", "wine glass", "woman"]),
        activities: ranked(Category::Activity, &["drinking wine"]),
    }
}

pub fn stair_state() -> MomentState {
    MomentState {
        places: ranked(Category::Place, &["staircase"]),
        objects: ranked(Category::Object, &["stairs", "animal", "mammal", "hamster", "human leg"]),
        activities: ranked(Category::Activity, &["climbing"]),
    }
}

/// Recorded completions: (text the prompt contains, prompt suffix, completion).
pub fn script() -> Vec<(String, &'static str, String)> {
    let mut s: Vec<(String, &'static str, String)> = vec![
        ("I see a wine, wine glass, woman".into(), "Answer: I am most likely", format!(" {WINE_SUMMARY}")),
        ("Objects: stairs, animal".into(), "5 Possible Sounds:", format!(" {STAIR_SOUNDS}.")),
        ("I am drinking wine in a living room.".into(), "Summary of my day:", format!(" {DAY_SUMMARY}")),
        (CORRECTION.into(), "Corrected Summary:", format!(" {CORRECTED}")),
        (
            "2:49 PM: I am buying produce".into(),
            "3:21 PM:",
            format!(" {}\n4:03 PM: {}\n4:35 PM: {}", FORECAST_LINES[0], FORECAST_LINES[1], FORECAST_LINES[2]),
        ),
    ];
    for (q, a, e) in QA {
        s.push((format!("Q: {q}\nA:"), "A:", format!(" {a}")));
        if !e.is_empty() {
            s.push((format!("Q: {q}\nA: {a}"), "This is because:", format!(" {e}")));
        }
    }
    s
}

pub fn scripted_completion(prompt: &str) -> Option<String> {
    script().into_iter().find(|(needle, suffix, _)| prompt.contains(needle.as_str()) && prompt.ends_with(suffix)).map(|(_, _, c)| c)
}

/// Reproduces one recorded completion from the adapters.
pub type Probe = Box<dyn Fn(&AdapterSet) -> Result<String>>;

pub struct Case {
    pub name: String,
    pub expected: String,
    pub run: Probe,
}

fn case(name: impl Into<String>, expected: impl Into<String>, run: impl Fn(&AdapterSet) -> Result<String> + 'static) -> Case {
    Case { name: name.into(), expected: expected.into(), run: Box::new(run) }
}

pub fn cases() -> Vec<Case> {
    let cfg = CaptionConfig::default();
    let mut out = vec![
        case("wine summary", WINE_SUMMARY, move |a| summarize_moment(&wine_state(), a.lm()?, &CaptionConfig::default())),
        case("staircase sounds", STAIR_SOUNDS, move |a| Ok(suggest_sounds(&stair_state(), a.lm()?, &cfg)?.join(", "))),
        case("day summary", DAY_SUMMARY, |a| summarize_day(&render_history(&day_history(), ClockFormat::Twelve), a.lm()?)),
        case("correction", CORRECTED, |a| apply_correction(&correction_context(), ORIGINAL_SUMMARY, CORRECTION, a.lm()?)),
        case("forecast", FORECAST_LINES.join("\n"), |a| {
            let f = forecast(&forecast_history(), &FORECAST_TIMES, a.lm()?)?;
            Ok(f.predictions.into_iter().map(|p| p.text).collect::<Vec<_>>().join("\n"))
        }),
    ];
    for &(q, ans, expl) in QA {
        out.push(case(format!("answer: {q}"), ans, move |a| answer_question(&render_history(&day_history(), ClockFormat::Twelve), q, a.lm()?)));
        if !expl.is_empty() {
            out.push(case(format!("explain: {q}"), expl, move |a| {
                explain_answer(&render_history(&day_history(), ClockFormat::Twelve), q, ans, a.lm()?)
            }));
        }
    }
    out
}

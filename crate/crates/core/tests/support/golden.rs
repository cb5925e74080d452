//! Prompt renderings pinned byte-for-byte by files under `tests/golden`.

#![allow(dead_code)]

use std::path::Path;

use socratic_core::prompts;
use socratic_core::reasoning::forecast;
use socratic_core::foundation::mock::FnLm;
use socratic_core::foundation::CompletionParams;

/// (golden file stem, rendered prompt).
pub fn rendered() -> Vec<(&'static str, String)> {
    let p = ["{place1}", "{place2}", "{place3}"];
    let o = ["{object1}", "{object2}", "{object3}"];
    let o5 = ["{object1}", "{object2}", "{object3}", "{object4}", "{object5}"];
    let h = "{world-state history}";
    vec![
        ("activities", prompts::activities(&p, &o)),
        ("moment_summary", prompts::moment_summary(&["nursing home", "landfill", "living room"], &["wine", "wine glass", "woman"], "drinking wine")),
        ("possible_sounds", prompts::possible_sounds(&["staircase"], &["stairs", "animal", "mammal", "hamster", "human leg"], "climbing", 5)),
        ("moment_summary_with_sound", prompts::moment_summary_with_sound("{place}", &o5, "{sound1}", "{activity}")),
        (
            "image_caption",
            prompts::image_caption(
                "photo",
                "are no people",
                &["indoor bow window", "dining room", "interior balcony"],
                &[
                    "double-hung window", "casement window", "sliding window", "pivoting window", "breakfast area", "breakfast nook",
                    "dining area", "storm window", "storm sash", "dining room", "bay window", "bow window", "lancet window",
                ],
            ),
        ),
        ("video_caption", prompts::video_caption("{transcript}")),
        ("correction", prompts::correction(&super::worked::correction_context(), super::worked::ORIGINAL_SUMMARY, super::worked::CORRECTION)),
        ("forecast", forecast_prompt()),
        ("question", prompts::question(h, "{question}")),
        ("explanation", prompts::explanation(h, "{question}", "{answer}")),
        ("day_summary", prompts::day_summary(h)),
    ]
}

/// The prompt the forecaster actually sends, captured from a probe LM.
fn forecast_prompt() -> String {
    let seen = std::sync::Mutex::new(String::new());
    let lm = FnLm::new("probe", |prompt: &str, _: &CompletionParams| {
        *seen.lock().unwrap() = prompt.to_string();
        vec![" x".to_string()]
    });
    forecast(&super::worked::forecast_history(), &super::worked::FORECAST_TIMES, &lm).expect("probe completion parses");
    seen.into_inner().unwrap()
}

pub fn golden(stem: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{stem}.txt"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Stems whose rendering differs from the golden file.
pub fn mismatches() -> Vec<&'static str> {
    rendered().into_iter().filter(|(stem, text)| golden(stem) != *text).map(|(stem, _)| stem).collect()
}

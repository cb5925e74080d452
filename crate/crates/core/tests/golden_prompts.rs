mod support;

use support::golden::{golden, rendered};

#[test]
fn every_prompt_matches_its_golden_file() {
    for (stem, text) in rendered() {
        assert_eq!(text, golden(stem), "prompt {stem}");
    }
}

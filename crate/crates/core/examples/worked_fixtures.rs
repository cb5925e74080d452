//! Regenerates the replay fixtures under `tests/fixtures/replay` by running
//! every worked example through a recording adapter set.

#[path = "../tests/support/worked.rs"]
mod worked;

use std::path::Path;
use std::sync::Arc;

use socratic_core::foundation::mock::FnLm;
use socratic_core::foundation::replay::replay_adapters;
use socratic_core::foundation::{AdapterSet, CompletionParams};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/replay");
    let scripted = FnLm::new("scripted", |prompt: &str, p: &CompletionParams| {
        let c = worked::scripted_completion(prompt).unwrap_or_else(|| panic!("no scripted completion for prompt:\n{prompt}"));
        vec![c; p.n]
    });
    let inner = AdapterSet { lm_generate: Some(Arc::new(scripted)), ..Default::default() };
    let recorder = replay_adapters(&dir, Some(&inner));
    for case in worked::cases() {
        let got = (case.run)(&recorder).unwrap_or_else(|e| panic!("{}: {e}", case.name));
        assert_eq!(got, case.expected, "{}", case.name);
        println!("recorded {}", case.name);
    }
}

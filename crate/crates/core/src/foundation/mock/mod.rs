//! Deterministic mock backends over a closed synthetic world.

mod lm;
mod models;
mod world;

use std::sync::Arc;

pub use lm::{apply_limits, FnLm, MockLm, MOCK_CONTEXT_TOKENS};
pub use models::{HashEmbedder, MockAlm, MockVlm, HASH_EMBEDDER_DIM, HASH_EMBEDDER_SEED};
pub use world::{synth_locator, Scene, SynthFrame, SyntheticWorld, WorldSpec, SYNTH_PREFIX};

use super::adapters::AdapterSet;

/// All four roles backed by the bundled mocks with zero perception noise.
pub fn bundled_adapters() -> AdapterSet {
    let world = Arc::new(SyntheticWorld::bundled());
    AdapterSet {
        lm_generate: Some(Arc::new(MockLm::strong())),
        lm_embed: Some(Arc::new(HashEmbedder::bundled())),
        vlm: Some(Arc::new(MockVlm::new("mock-vlm", world.clone()))),
        alm: Some(Arc::new(MockAlm::new("mock-alm", world))),
    }
}

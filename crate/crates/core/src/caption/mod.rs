//! Single-image captioning by exchange between a VLM and an LM, with
//! optional audio grounding. Internet images use a candidate-reranking
//! variant.

pub mod config;
pub mod entities;
pub mod internet;
pub mod moment;
pub mod vocab;

pub use config::CaptionConfig;
pub use entities::{normalize_entity, parse_list, Category, RankedEntities, Scored};
pub use internet::{caption_internet_image, CaptionCandidate, Detections, ImageCaption, InternetVocabularies};
pub use moment::{
    expand_to_equilibrium, generate_activities, pick_sound, rerank_candidates, suggest_sounds, summarize_moment,
    summarize_moment_with_audio, EgocentricCaptioner, Expansion, MomentState, MomentSummary,
};
pub use vocab::{rank_vocabulary, EntityVocabulary};

//! Embedding math plus the model-adapter contracts and their backends.

pub mod adapters;
pub mod embedding;
pub mod http;
pub mod mock;
pub mod replay;
pub mod smeb;

pub use adapters::{
    complete_nonempty, AdapterSet, AudioLanguageModel, CompletionParams, LanguageModel, MediaKind, MediaRef, Role,
    TextEmbedder, TranscribeOptions, VisionLanguageModel,
};
pub use embedding::{cosine_score, Embedding};

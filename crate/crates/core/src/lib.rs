//! Zero-shot multimodal composition: pretrained models exchange text to
//! caption frames and compile day-long event logs that a language model
//! then reasons over. Underneath sits an embedding retrieval core with
//! sub-linear search structures.

pub mod caption;
pub mod data;
pub mod error;
pub mod foundation;
pub mod prompts;
pub mod reasoning;
pub mod retrieval;
pub mod seed;
pub mod selection;
pub mod v2t;
pub mod world_state;

pub use error::{Error, Result};

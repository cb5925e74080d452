//! Embedding retrieval: exact inner-product search, local-maxima moment
//! selection, SRP-LSH, positive random features, compressed associative
//! memory and random feature trees.

pub mod exact;
pub mod features;
pub mod keys;
pub mod local_maxima;
pub mod lsh;
pub mod memory;
pub mod persist;
pub mod rft;

pub use exact::{mips_exact, score_all};
pub use features::{FeatureParams, RandomFeatureMap};
pub use keys::{Hit, KeyMatrix};
pub use local_maxima::top_n_local_maxima;
pub use lsh::{LshParams, LshResult, SrpLshIndex};
pub use memory::{exact_energy, CompressedMemory, OpCount};
pub use persist::{Algo, BuildParams, IndexMeta, RetrievalIndex};
pub use rft::{ceil_log2, Draw, RandomFeatureTree};

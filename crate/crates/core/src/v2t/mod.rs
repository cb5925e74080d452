//! Video-to-text retrieval that multiplies a visual match by a transcript
//! summary match, with the usual recall-at-k evaluation.

pub mod fusion;
pub mod io;
pub mod metrics;
pub mod records;
pub mod synthetic;

pub use fusion::{caption_order, fused_score, rank_captions_for_video, rank_of, score_matrix, score_row};
pub use io::{
    ground_truth, ids_sidecar, load_video_embeddings, parse_captions_tsv, parse_transcripts_jsonl, prepare_corpus,
    write_captions_tsv, write_transcripts_jsonl, CaptionRow,
};
pub use metrics::{evaluate, evaluate_subset_long_transcript, metrics_from_ranks, video_ranks, GroundTruth, RetrievalMetrics, DEFAULT_KS};
pub use records::{passes_gate, prepare_video, summarize_transcript, transcript_len, CaptionRecord, V2tConfig, VideoRecord};
pub use synthetic::{SyntheticCorpus, SyntheticSpec};

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "socratic", version, about = "Compose pretrained multimodal models through language")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// TOML run configuration; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendKind>,
    /// Fixture directory for the replay and record backends.
    #[arg(long, global = true)]
    pub replay_dir: Option<PathBuf>,
    /// Human-readable output instead of compact JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// Deterministic mocks over the bundled synthetic world.
    #[default]
    Mock,
    /// JSON-over-HTTP endpoints from SM_*_ENDPOINT variables.
    Http,
    /// Content-addressed fixtures only; a miss is a backend error.
    Replay,
    /// HTTP endpoints, recording every exchange into the fixture directory.
    Record,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Caption one image, egocentric or Internet style.
    Caption(CaptionArgs),
    /// Build an event log from a frame stream.
    History(HistoryArgs),
    /// Answer questions over an event log and frame indexes.
    Ask(AskArgs),
    /// Embedding index commands.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Rank captions for videos and report R@k and median rank.
    V2t(V2tArgs),
    /// Score candidate VLMs against pseudo ground truth.
    Select(SelectArgs),
    /// Generate synthetic fixtures from the bundled world.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Args, Debug)]
pub struct CaptionArgs {
    /// Image locator, e.g. `synth:kitchen;mug@0.5|noise=0.1`.
    #[arg(long, conflicts_with = "embedding", required_unless_present = "embedding")]
    pub image: Option<String>,
    /// JSON array holding a precomputed image embedding.
    #[arg(long)]
    pub embedding: Option<PathBuf>,
    /// Internet-image captioning: sample candidates and keep the VLM's favourite.
    #[arg(long)]
    pub internet: bool,
    #[arg(long)]
    pub candidates: Option<usize>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Audio clip locator for sound grounding (egocentric only).
    #[arg(long, conflicts_with = "internet")]
    pub audio: Option<String>,
    /// Timestamp recorded with an egocentric caption.
    #[arg(long, default_value_t = 0)]
    pub t_ms: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Uniform,
    Search,
    /// Union of the uniform and search selections.
    Hybrid,
}

#[derive(Args, Debug)]
pub struct HistoryArgs {
    /// Frames JSONL: `{t_ms, embedding, audio?}` per line.
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Uniform)]
    pub mode: Mode,
    /// Grid spacing for uniform selection.
    #[arg(long, default_value_t = 300_000)]
    pub interval: u64,
    /// Question whose search entity drives search selection.
    #[arg(long)]
    pub question: Option<String>,
    /// Search entity given directly; repeatable.
    #[arg(long)]
    pub entity: Vec<String>,
    /// Condense the log until it fits the configured character budget.
    #[arg(long)]
    pub condense: bool,
    /// Write the log here (atomically) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForceModality {
    Text,
    Image,
    Audio,
}

#[derive(Args, Debug)]
pub struct AskArgs {
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Omit to read one question per line from stdin.
    #[arg(long)]
    pub question: Option<String>,
    /// Ask the LM to justify text answers.
    #[arg(long)]
    pub explain: bool,
    /// Image frame index directory (built with `index build` over frames).
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Audio frame index directory.
    #[arg(long)]
    pub audio_index: Option<PathBuf>,
    /// Frames JSONL; builds image and audio indexes in memory.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Skip routing and answer in this modality.
    #[arg(long, value_enum)]
    pub modality: Option<ForceModality>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgoArg {
    Exact,
    Lsh,
    Mem,
    Rft,
}

#[derive(Subcommand, Debug)]
pub enum IndexCommand {
    /// Build an index and persist it to a directory.
    Build(IndexBuildArgs),
    /// Query a persisted index.
    Query(IndexQueryArgs),
    /// Recall@k of a persisted index against exact search.
    Recall(IndexRecallArgs),
}

#[derive(Args, Debug)]
pub struct IndexBuildArgs {
    /// Keys as SMEB (ids from trailer or sidecar) or frames JSONL (ids = t_ms).
    #[arg(long)]
    pub keys: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgoArg::Exact)]
    pub algo: AlgoArg,
    #[arg(long)]
    pub tables: Option<usize>,
    #[arg(long)]
    pub bits: Option<usize>,
    #[arg(long)]
    pub probe_radius: Option<usize>,
    #[arg(long)]
    pub features: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct IndexQueryArgs {
    #[arg(long)]
    pub index: PathBuf,
    /// Comma-separated query vector.
    #[arg(long, conflicts_with = "queries", required_unless_present = "queries")]
    pub query: Option<String>,
    /// SMEB file of query rows.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Draws per query from a random feature tree.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct IndexRecallArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subset {
    All,
    /// Only videos whose transcript passes the gate.
    Long,
}

#[derive(Args, Debug)]
pub struct V2tArgs {
    /// Video embeddings as SMEB; ids from the trailer or `<path>.ids.json`.
    #[arg(long)]
    pub videos: PathBuf,
    /// Captions TSV: `caption_id<TAB>video_id<TAB>text`.
    #[arg(long)]
    pub captions: PathBuf,
    /// Transcripts JSONL: `{video_id, transcript}` per line.
    #[arg(long)]
    pub transcripts: Option<PathBuf>,
    /// Minimum transcript length, in characters, for the fused path.
    #[arg(long)]
    pub gate: Option<usize>,
    #[arg(long, value_enum, default_value_t = Subset::All)]
    pub subset: Subset,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    /// Image locators, one per line; `#` starts a comment.
    #[arg(long)]
    pub frames: PathBuf,
    /// Candidate VLM: `ID@SIGMA` (mock with perception noise) or `ID=URL`.
    #[arg(long = "vlm", required = true)]
    pub vlms: Vec<String>,
    /// `mock-weak`, `mock-strong` or an endpoint URL.
    #[arg(long, default_value = "mock-weak")]
    pub weak_lm: String,
    #[arg(long, default_value = "mock-strong")]
    pub strong_lm: String,
    /// Truth VLM: a candidate id or its own `ID@SIGMA` / `ID=URL` spec.
    #[arg(long)]
    pub baseline_vlm: String,
    /// Held-out sentence embedder: `mock`, `mock:SEED` or an endpoint URL.
    #[arg(long, default_value = "mock:48879")]
    pub heldout: String,
    /// JSON object mapping VLM ids to reference scores for correlation.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SynthCommand {
    /// A day walking through every scene, as frames JSONL.
    Frames(SynthFramesArgs),
    /// A video-to-text corpus: videos SMEB, captions TSV, transcripts JSONL.
    V2t(SynthV2tArgs),
    /// Random unit vectors as SMEB.
    Keys(SynthKeysArgs),
    /// Locators for model selection, three graded frames per scene.
    SelectFrames(SynthOutArgs),
}

#[derive(Args, Debug)]
pub struct SynthFramesArgs {
    #[arg(long, default_value_t = 4)]
    pub per_scene: usize,
    #[arg(long, default_value_t = 420_000)]
    pub step_ms: u64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Attach each scene's first sound as an audio clip.
    #[arg(long)]
    pub audio: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthV2tArgs {
    #[arg(long, default_value_t = 48)]
    pub videos: usize,
    /// Fraction of videos given a long transcript.
    #[arg(long, default_value_t = 0.5)]
    pub coverage: f64,
    #[arg(long, default_value_t = 0.3)]
    pub noise: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthKeysArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthOutArgs {
    #[arg(long)]
    pub out: PathBuf,
}

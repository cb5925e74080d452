use serde::Serialize;
use socratic_core::v2t::{
    evaluate, evaluate_subset_long_transcript, ground_truth, load_video_embeddings, parse_captions_tsv,
    parse_transcripts_jsonl, prepare_corpus, RetrievalMetrics, DEFAULT_KS,
};

use super::{read_text, Ctx};
use crate::backend;
use crate::cli::{Subset, V2tArgs};
use crate::config::RunEcho;
use crate::failure::CliResult;
use crate::output::{print, render};

#[derive(Serialize)]
struct Out {
    #[serde(flatten)]
    metrics: RetrievalMetrics,
    warnings: Vec<String>,
    run: RunEcho,
}

pub fn run(args: V2tArgs, ctx: &Ctx) -> CliResult<()> {
    let mut cfg = ctx.cfg.clone();
    if let Some(g) = args.gate {
        cfg.v2t.gate_chars = g;
    }
    let videos = load_video_embeddings(&args.videos)?;
    let rows = parse_captions_tsv(&read_text(&args.captions)?)?;
    let transcripts = match &args.transcripts {
        Some(p) => parse_transcripts_jsonl(&read_text(p)?)?,
        None => Default::default(),
    };
    let adapters = backend::adapters(&cfg)?;
    let (videos, captions, warnings) = prepare_corpus(&videos, &rows, &transcripts, &adapters, &cfg.v2t)?;
    let truth = ground_truth(&rows);
    let metrics = match args.subset {
        Subset::All => evaluate(&videos, &captions, &truth, &DEFAULT_KS)?,
        Subset::Long => evaluate_subset_long_transcript(&videos, &captions, &truth, &DEFAULT_KS, cfg.v2t.gate_chars)?,
    };
    let mut echo = RunEcho::new("v2t", &cfg).path("videos", &args.videos).path("captions", &args.captions);
    if let Some(p) = &args.transcripts {
        echo = echo.path("transcripts", p);
    }
    echo = echo.input("subset", format!("{:?}", args.subset).to_lowercase());
    Ok(print(&render(&Out { metrics, warnings, run: echo }, ctx.pretty)?)?)
}

use std::io::BufRead;
use std::path::Path;

use serde::Serialize;
use socratic_core::foundation::AdapterSet;
use socratic_core::reasoning::{execute, Answer, AskConfig, FrameIndex, Modality, Question, SearchIndexes};
use socratic_core::retrieval::RetrievalIndex;
use socratic_core::world_state::{clock, ClockFormat, FrameStream, WorldStateHistory};
use socratic_core::Error;

use super::{read_text, Ctx};
use crate::backend;
use crate::cli::{AskArgs, ForceModality};
use crate::config::RunEcho;
use crate::failure::{CliResult, Failure};
use crate::output::{print, render};

#[derive(Serialize)]
struct Out<'a> {
    #[serde(flatten)]
    answer: &'a Answer,
    run: &'a RunEcho,
}

fn load_frame_index(dir: &Path) -> Result<FrameIndex, Error> {
    FrameIndex::from_keys_with_timestamp_ids(RetrievalIndex::load(dir)?.keys().clone())
}

fn indexes(args: &AskArgs, adapters: &AdapterSet) -> Result<SearchIndexes, Error> {
    let mut idx = SearchIndexes::default();
    if let Some(path) = &args.frames {
        let stream = FrameStream::from_jsonl(&read_text(path)?)?;
        idx.image = Some(FrameIndex::images(&stream)?);
        if stream.frames().iter().any(|f| f.audio.is_some()) {
            idx.audio = Some(FrameIndex::audio(&stream, adapters)?);
        }
    }
    if let Some(dir) = &args.index {
        idx.image = Some(load_frame_index(dir)?);
    }
    if let Some(dir) = &args.audio_index {
        idx.audio = Some(load_frame_index(dir)?);
    }
    Ok(idx)
}

fn pretty(answer: &Answer) -> String {
    let mut lines = Vec::new();
    if let Some(t) = &answer.text {
        lines.push(t.clone());
    }
    if let Some(e) = &answer.explanation {
        lines.push(format!("  because {e}"));
    }
    for r in answer.retrieved.iter().flatten() {
        lines.push(format!("{}  frame {}  score {:.4}", clock(r.t_ms, ClockFormat::Twelve), r.frame, r.score));
    }
    lines.extend(answer.warnings.iter().map(|w| format!("  warning: {w}")));
    lines.join("\n")
}

pub fn run(args: AskArgs, ctx: &Ctx) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let adapters = backend::adapters(cfg)?;
    let history = args.history.as_deref().map(WorldStateHistory::load).transpose()?;
    let indexes = indexes(&args, &adapters)?;
    let ask = AskConfig { explain: args.explain, search: cfg.search, ..AskConfig::default() };
    let mut echo = RunEcho::new("ask", cfg).input("explain", args.explain);
    for (key, path) in [("history", &args.history), ("index", &args.index), ("audio_index", &args.audio_index), ("frames", &args.frames)] {
        if let Some(p) = path {
            echo = echo.path(key, p);
        }
    }

    let answer_one = |text: &str| -> CliResult<String> {
        let mut q = Question::new(text)?;
        if let Some(m) = args.modality {
            q = q.forced(match m {
                ForceModality::Text => Modality::TextAnswer,
                ForceModality::Image => Modality::ImageSearch,
                ForceModality::Audio => Modality::AudioSearch,
            });
        }
        let answer = execute(&q, history.as_ref(), &indexes, &adapters, &ask)?;
        Ok(if ctx.pretty { pretty(&answer) } else { render(&Out { answer: &answer, run: &echo.clone().input("question", &q.text) }, false)? })
    };

    if let Some(q) = &args.question {
        return print(&answer_one(q)?).map_err(Failure::from);
    }
    // REPL: one answer per input line; a failed question is reported and skipped.
    for line in std::io::stdin().lock().lines() {
        let line = line.map_err(|e| Error::io("<stdin>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        match answer_one(&line) {
            Ok(text) => print(&text)?,
            Err(f) => eprintln!("{}", serde_json::to_string(&serde_json::json!({ "error": f })).expect("failure serializes")),
        }
    }
    Ok(())
}

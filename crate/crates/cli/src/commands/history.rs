use serde::Serialize;
use socratic_core::caption::EgocentricCaptioner;
use socratic_core::reasoning::{extract_search_entity, Question};
use socratic_core::world_state::{
    compile_history, recursive_summarize, render_history, select_by_search, select_uniform, union_indices, ClockFormat,
    FrameStream, Source, WorldStateHistory,
};
use socratic_core::Error;

use super::{read_text, Ctx};
use crate::backend;
use crate::cli::{HistoryArgs, Mode};
use crate::config::RunEcho;
use crate::failure::{CliResult, Failure};
use crate::output::{print, render, write_atomic};

/// The log plus the run echo; readers of the log ignore `run`.
#[derive(Serialize)]
struct Out<'a> {
    #[serde(flatten)]
    history: &'a WorldStateHistory,
    run: RunEcho,
}

pub fn run(args: HistoryArgs, ctx: &Ctx) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let stream = FrameStream::from_jsonl(&read_text(&args.frames)?)?;
    let adapters = backend::adapters(cfg)?;
    let vlm = adapters.vlm()?;
    let mut echo = RunEcho::new("history", cfg).path("frames", &args.frames).input("interval_ms", args.interval);

    let mut entities = args.entity.clone();
    if args.mode != Mode::Uniform && entities.is_empty() {
        let q = args.question.as_deref().ok_or_else(|| Failure::usage("search selection needs --question or --entity"))?;
        echo = echo.input("question", q);
        let entity = extract_search_entity(&Question::new(q)?, adapters.lm()?, socratic_core::data::ENTITY_FEW_SHOT)?
            .ok_or_else(|| Error::Unparseable { raw: format!("no search entity in {q:?}") })?;
        entities.push(entity);
    }

    let search = || -> Result<Vec<usize>, Error> {
        let queries = entities.iter().map(|e| vlm.embed_text(e)).collect::<Result<Vec<_>, _>>()?;
        select_by_search(&stream, &queries, &stream.image_keys()?, &cfg.search)
    };
    let (indices, source) = match args.mode {
        Mode::Uniform => (select_uniform(&stream, args.interval)?, Source::Uniform),
        Mode::Search => (search()?, Source::Search),
        Mode::Hybrid => (union_indices(&select_uniform(&stream, args.interval)?, &search()?), Source::Hybrid),
    };

    let captioner = EgocentricCaptioner::bundled(cfg.caption.clone(), vlm)?;
    let mut history = compile_history(&stream, &indices, &captioner, &adapters, source)?;
    if !entities.is_empty() {
        history = history.with_search_entities(entities);
    }
    if args.condense {
        history = recursive_summarize(&history, adapters.lm()?, &cfg.condense)?;
    }

    // Files always hold JSON so that `ask --history` can read them back.
    let json = render(&Out { history: &history, run: echo }, false)?;
    match &args.out {
        Some(path) => write_atomic(path, format!("{json}\n").as_bytes())?,
        None if ctx.pretty => print(&render_history(&history, ClockFormat::Twelve))?,
        None => print(&json)?,
    }
    Ok(())
}

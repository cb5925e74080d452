use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use socratic_core::foundation::smeb::SmebMatrix;
use socratic_core::retrieval::{mips_exact, Algo, KeyMatrix, RetrievalIndex};
use socratic_core::seed::seeded_rng;
use socratic_core::v2t::ids_sidecar;
use socratic_core::world_state::FrameStream;
use socratic_core::Error;

use super::{read_text, Ctx};
use crate::cli::{AlgoArg, IndexBuildArgs, IndexCommand, IndexQueryArgs, IndexRecallArgs};
use crate::config::RunEcho;
use crate::failure::CliResult;
use crate::output::{print, render};

fn algo(a: AlgoArg) -> Algo {
    match a {
        AlgoArg::Exact => Algo::Exact,
        AlgoArg::Lsh => Algo::Lsh,
        AlgoArg::Mem => Algo::Mem,
        AlgoArg::Rft => Algo::Rft,
    }
}

/// SMEB rows (ids from trailer or sidecar), or frames JSONL with timestamp ids.
pub(crate) fn load_keys(path: &Path) -> Result<KeyMatrix, Error> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        let stream = FrameStream::from_jsonl(&read_text(path)?)?;
        let ids = stream.timestamps().iter().map(u64::to_string).collect();
        return stream.image_keys()?.with_ids(ids);
    }
    let m = SmebMatrix::load(path)?;
    let side = ids_sidecar(path);
    let sidecar = (m.ids.is_none() && side.exists()).then(|| read_text(&side)).transpose()?;
    let keys = KeyMatrix::from_smeb(m)?;
    match sidecar {
        Some(text) => keys.with_ids(serde_json::from_str(&text)?),
        None => Ok(keys),
    }
}

fn parse_query(csv: &str) -> Result<Vec<f32>, Error> {
    csv.split(',')
        .map(|s| s.trim().parse::<f32>().map_err(|_| Error::format("--query", format!("{s:?} is not a number"))))
        .collect()
}

fn queries(args: &IndexQueryArgs) -> Result<Vec<Vec<f32>>, Error> {
    match (&args.query, &args.queries) {
        (Some(csv), _) => Ok(vec![parse_query(csv)?]),
        (None, Some(path)) => {
            let m = SmebMatrix::load(path)?;
            Ok((0..m.count()).map(|i| m.row(i).to_vec()).collect())
        }
        (None, None) => unreachable!("clap requires --query or --queries"),
    }
}

#[derive(Serialize)]
struct Out {
    #[serde(flatten)]
    body: Value,
    run: RunEcho,
}

fn emit(body: Value, echo: RunEcho, pretty: bool) -> CliResult<()> {
    Ok(print(&render(&Out { body, run: echo }, pretty)?)?)
}

pub fn run(cmd: IndexCommand, ctx: &Ctx) -> CliResult<()> {
    match cmd {
        IndexCommand::Build(a) => build(a, ctx),
        IndexCommand::Query(a) => query(a, ctx),
        IndexCommand::Recall(a) => recall(a, ctx),
    }
}

fn build(args: IndexBuildArgs, ctx: &Ctx) -> CliResult<()> {
    let mut cfg = ctx.cfg.clone();
    let p = &mut cfg.index;
    p.lsh.tables = args.tables.unwrap_or(p.lsh.tables);
    p.lsh.bits = args.bits.unwrap_or(p.lsh.bits);
    p.lsh.probe_radius = args.probe_radius.unwrap_or(p.lsh.probe_radius);
    p.features.features = args.features.unwrap_or(p.features.features);
    let keys = load_keys(&args.keys)?;
    let index = RetrievalIndex::build(&keys, algo(args.algo), &cfg.index)?;
    index.save(&args.out)?;
    let echo = RunEcho::new("index build", &cfg).path("keys", &args.keys).path("out", &args.out);
    let body = json!({"index": args.out.display().to_string(), "algo": index.algo(), "dim": keys.dim(), "count": keys.count()});
    emit(body, echo, ctx.pretty)
}

fn query(args: IndexQueryArgs, ctx: &Ctx) -> CliResult<()> {
    let index = RetrievalIndex::load(&args.index)?;
    let keys = index.keys();
    let mut results = Vec::new();
    for (n, q) in queries(&args)?.iter().enumerate() {
        results.push(match &index {
            RetrievalIndex::Exact(_) | RetrievalIndex::Lsh(_) => {
                let hits: Vec<Value> = index
                    .search(q, args.k)?
                    .into_iter()
                    .map(|h| json!({"index": h.index, "id": keys.id(h.index), "score": h.score}))
                    .collect();
                json!({"hits": hits})
            }
            RetrievalIndex::Memory { memory, .. } => json!({"energy": memory.energy(q)?}),
            RetrievalIndex::Rft { tree, .. } => {
                let mut rng = seeded_rng(&[b"cli-rft", &ctx.cfg.seed.to_le_bytes(), &(n as u64).to_le_bytes()]);
                let draws: Vec<usize> = tree.sample_many(q, args.samples, &mut rng)?.into_iter().map(|d| d.index).collect();
                json!({"draws": draws})
            }
        });
    }
    let echo = RunEcho::new("index query", &ctx.cfg).path("index", &args.index).input("k", args.k);
    emit(json!({"algo": index.algo(), "results": results}), echo, ctx.pretty)
}

fn recall(args: IndexRecallArgs, ctx: &Ctx) -> CliResult<()> {
    let index = RetrievalIndex::load(&args.index)?;
    let keys = index.keys();
    let k = args.k.min(keys.count());
    let m = SmebMatrix::load(&args.queries)?;
    if m.count() == 0 {
        return Err(Error::Empty("queries").into());
    }
    let mut found = 0usize;
    for i in 0..m.count() {
        let q = m.row(i);
        let truth: Vec<usize> = mips_exact(q, keys, k)?.into_iter().map(|h| h.index).collect();
        found += index.search(q, k)?.iter().filter(|h| truth.contains(&h.index)).count();
    }
    let recall = found as f64 / (k * m.count()) as f64;
    let echo = RunEcho::new("index recall", &ctx.cfg).path("index", &args.index).path("queries", &args.queries);
    emit(json!({"algo": index.algo(), "k": k, "recall": recall, "n_queries": m.count()}), echo, ctx.pretty)
}

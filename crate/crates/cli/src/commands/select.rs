use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use socratic_core::foundation::mock::SyntheticWorld;
use socratic_core::foundation::MediaRef;
use socratic_core::selection::{run_selection, SelectionInputs, SelectionReport};
use socratic_core::Error;

use super::{read_text, Ctx};
use crate::backend::{embedder_spec, lm_spec, vlm_spec};
use crate::cli::SelectArgs;
use crate::config::RunEcho;
use crate::failure::CliResult;
use crate::output::{print, render};

#[derive(Serialize)]
struct Out {
    #[serde(flatten)]
    report: SelectionReport,
    run: RunEcho,
}

fn spec_id(spec: &str) -> &str {
    spec.split(['@', '=']).next().unwrap_or(spec)
}

pub fn run(args: SelectArgs, ctx: &Ctx) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let frames: Vec<MediaRef> = read_text(&args.frames)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(MediaRef::image)
        .collect();
    if frames.is_empty() {
        return Err(Error::Empty("frame locators").into());
    }
    let world = Arc::new(SyntheticWorld::bundled());
    let candidates = args.vlms.iter().map(|s| vlm_spec(s, cfg, &world)).collect::<Result<Vec<_>, _>>()?;
    // A bare id names a candidate; anything else is a spec of its own.
    let baseline = match args.vlms.iter().position(|s| spec_id(s) == args.baseline_vlm) {
        Some(i) => candidates[i].clone(),
        None => vlm_spec(&args.baseline_vlm, cfg, &world)?,
    };
    let inputs = SelectionInputs {
        frames: &frames,
        candidates,
        weak_lm: lm_spec(&args.weak_lm, cfg)?,
        strong_lm: lm_spec(&args.strong_lm, cfg)?,
        baseline_vlm: baseline,
        heldout: embedder_spec(&args.heldout)?,
    };
    let mut report = run_selection(&inputs, &cfg.caption)?;
    let mut echo = RunEcho::new("select", cfg)
        .path("frames", &args.frames)
        .input("vlms", args.vlms.join(","))
        .input("weak_lm", &args.weak_lm)
        .input("strong_lm", &args.strong_lm)
        .input("baseline_vlm", &args.baseline_vlm)
        .input("heldout", &args.heldout);
    if let Some(path) = &args.reference {
        let reference: BTreeMap<String, f64> =
            serde_json::from_str(&read_text(path)?).map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
        let name = path.file_stem().map_or("reference".into(), |s| s.to_string_lossy().into_owned());
        report = report.with_correlation(&name, &reference)?;
        echo = echo.path("reference", path);
    }
    Ok(print(&render(&Out { report, run: echo }, ctx.pretty)?)?)
}

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;
use socratic_core::foundation::mock::{SyntheticWorld, SynthFrame};
use socratic_core::foundation::smeb::SmebMatrix;
use socratic_core::retrieval::lsh::gaussian_matrix;
use socratic_core::selection::graded_frames;
use socratic_core::v2t::{write_captions_tsv, write_transcripts_jsonl, CaptionRow};
use socratic_core::world_state::{demo_day, DemoSpec};
use socratic_core::Error;

use super::Ctx;
use crate::backend::mock_adapters;
use crate::cli::{SynthCommand, SynthFramesArgs, SynthKeysArgs, SynthOutArgs, SynthV2tArgs};
use crate::failure::CliResult;
use crate::output::{print, render, write_atomic};

pub fn run(cmd: SynthCommand, ctx: &Ctx) -> CliResult<()> {
    let world = Arc::new(SyntheticWorld::bundled());
    let written = match cmd {
        SynthCommand::Frames(a) => frames(a, ctx, world)?,
        SynthCommand::V2t(a) => v2t(a, ctx, &world)?,
        SynthCommand::Keys(a) => keys(a, ctx)?,
        SynthCommand::SelectFrames(a) => select_frames(a, &world)?,
    };
    Ok(print(&render(&json!({"written": written, "seed": ctx.cfg.seed}), ctx.pretty)?)?)
}

fn frames(args: SynthFramesArgs, ctx: &Ctx, world: Arc<SyntheticWorld>) -> Result<Vec<String>, Error> {
    let adapters = mock_adapters(&ctx.cfg, world.clone());
    let spec = DemoSpec { frames_per_scene: args.per_scene, step_ms: args.step_ms, noise: args.noise, audio: args.audio, ..DemoSpec::default() };
    let day = demo_day(&world, adapters.vlm()?, &spec)?;
    write_atomic(&args.out, day.stream.to_jsonl().as_bytes())?;
    Ok(vec![args.out.display().to_string()])
}

/// A spoken line of at least 100 characters mentioning the video's topic.
fn long_transcript(i: usize) -> String {
    let mut t = format!("okay so today I want to talk about topic{i}, and honestly topic{i} is something I care about");
    while t.chars().count() < 100 {
        t.push_str(" a lot");
    }
    t
}

/// Videos cycle through the scenes, so repeats look alike and only the
/// per-video topic, spoken in long transcripts, tells them apart.
fn v2t(args: SynthV2tArgs, ctx: &Ctx, world: &Arc<SyntheticWorld>) -> Result<Vec<String>, Error> {
    if args.videos == 0 {
        return Err(Error::Precondition("--videos must be positive".into()));
    }
    if !(0.0..=1.0).contains(&args.coverage) {
        return Err(Error::Precondition(format!("--coverage {} must be in [0, 1]", args.coverage)));
    }
    let covered = (args.coverage * args.videos as f64).round() as usize;
    let scenes = world.scenes();
    let (mut ids, mut data, mut rows, mut transcripts) = (Vec::new(), Vec::new(), Vec::new(), BTreeMap::new());
    for i in 0..args.videos {
        let scene = &scenes[i % scenes.len()];
        let activity = &scene.activities[0];
        let frame = SynthFrame {
            entities: vec![(scene.place.clone(), 1.0), (activity.clone(), 1.0)],
            noise: args.noise,
            seed: ctx.cfg.seed.wrapping_add(i as u64 + 1),
            say: None,
        };
        let id = format!("video{i:04}");
        data.extend_from_slice(world.embed_frame(&frame.locator(), 0.0, 0)?.values());
        rows.push(CaptionRow { caption_id: format!("{id}-a"), video_id: id.clone(), text: format!("{activity} in the {}", scene.place) });
        rows.push(CaptionRow { caption_id: format!("{id}-b"), video_id: id.clone(), text: format!("a video about topic{i} while {activity}") });
        transcripts.insert(id.clone(), if i < covered { long_transcript(i) } else { "hi there".to_string() });
        ids.push(id);
    }
    let dir = &args.out_dir;
    let smeb = SmebMatrix::new(world.dim(), data, Some(ids))?;
    let paths = [dir.join("videos.smeb"), dir.join("captions.tsv"), dir.join("transcripts.jsonl")];
    write_atomic(&paths[0], &smeb.to_bytes())?;
    write_atomic(&paths[1], write_captions_tsv(&rows).as_bytes())?;
    write_atomic(&paths[2], write_transcripts_jsonl(&transcripts).as_bytes())?;
    Ok(paths.iter().map(|p| p.display().to_string()).collect())
}

fn keys(args: SynthKeysArgs, ctx: &Ctx) -> Result<Vec<String>, Error> {
    if args.n == 0 || args.dim == 0 {
        return Err(Error::Precondition("--n and --dim must be positive".into()));
    }
    let mut data = gaussian_matrix(b"cli-keys", ctx.cfg.seed, args.n, args.dim);
    for row in data.chunks_exact_mut(args.dim) {
        let norm = row.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
        row.iter_mut().for_each(|x| *x = (*x as f64 / norm) as f32);
    }
    write_atomic(&args.out, &SmebMatrix::new(args.dim, data, None)?.to_bytes())?;
    Ok(vec![args.out.display().to_string()])
}

fn select_frames(args: SynthOutArgs, world: &SyntheticWorld) -> Result<Vec<String>, Error> {
    let lines: String = graded_frames(world).into_iter().map(|m| m.locator + "\n").collect();
    write_atomic(&args.out, lines.as_bytes())?;
    Ok(vec![args.out.display().to_string()])
}

use serde::Serialize;
use socratic_core::caption::{caption_internet_image, EgocentricCaptioner, InternetVocabularies, RankedEntities, Scored};
use socratic_core::foundation::MediaRef;

use super::{read_embedding, Ctx};
use crate::backend;
use crate::cli::CaptionArgs;
use crate::config::RunEcho;
use crate::failure::CliResult;
use crate::output::{print, render};

#[derive(Serialize)]
struct MomentDetections<'a> {
    places: &'a RankedEntities,
    objects: &'a RankedEntities,
    activities: &'a RankedEntities,
}

#[derive(Serialize)]
struct MomentOut<'a> {
    caption: String,
    t_ms: u64,
    detections: MomentDetections<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sound: Option<&'a Scored>,
    run: RunEcho,
}

pub fn run(args: CaptionArgs, ctx: &Ctx) -> CliResult<()> {
    let mut cfg = ctx.cfg.clone();
    // Internet images list ten objects unless the config file overrides captioning.
    if args.internet && cfg.caption == Default::default() {
        cfg.caption = socratic_core::caption::CaptionConfig::internet();
    }
    if let Some(n) = args.candidates {
        cfg.caption.caption_candidates = n;
    }
    if let Some(t) = args.temperature {
        cfg.caption.caption_temperature = t;
    }
    cfg.caption.validate()?;
    let adapters = backend::adapters(&cfg)?;
    let vlm = adapters.vlm()?;

    let mut echo = RunEcho::new("caption", &cfg).input("mode", if args.internet { "internet" } else { "egocentric" });
    let image = match (&args.image, &args.embedding) {
        (Some(loc), _) => {
            echo = echo.input("image", loc);
            vlm.embed_image(&MediaRef::image(loc.clone()))?
        }
        (None, Some(path)) => {
            echo = echo.path("embedding", path);
            read_embedding(path)?
        }
        (None, None) => unreachable!("clap requires --image or --embedding"),
    };

    if args.internet {
        let vocabs = InternetVocabularies::bundled(vlm)?;
        let caption = caption_internet_image(&image, &vocabs, adapters.lm()?, vlm, &cfg.caption)?;
        if ctx.pretty {
            let lines: Vec<String> = caption.candidates.iter().map(|c| format!("  {:+.4}  {}", c.score, c.text)).collect();
            print(&format!("{}\n{}", caption.caption, lines.join("\n")))?;
        } else {
            #[derive(Serialize)]
            struct Out<'a> {
                #[serde(flatten)]
                caption: &'a socratic_core::caption::ImageCaption,
                run: RunEcho,
            }
            print(&render(&Out { caption: &caption, run: echo }, false)?)?;
        }
        return Ok(());
    }

    let audio = args.audio.map(MediaRef::audio);
    if let Some(a) = &audio {
        echo = echo.input("audio", &a.locator);
    }
    let captioner = EgocentricCaptioner::bundled(cfg.caption.clone(), vlm)?;
    let m = captioner.describe(args.t_ms, &image, audio.as_ref(), &adapters)?;
    if ctx.pretty {
        return Ok(print(&m.first_person())?);
    }
    let out = MomentOut {
        caption: m.first_person(),
        t_ms: m.t_ms,
        detections: MomentDetections { places: &m.places, objects: &m.objects, activities: &m.activities },
        sound: m.sound.as_ref(),
        run: echo,
    };
    Ok(print(&render(&out, false)?)?)
}

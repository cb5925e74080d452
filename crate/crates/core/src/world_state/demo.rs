use super::stream::{Frame, FrameStream};
use crate::error::Result;
use crate::foundation::mock::{SynthFrame, SyntheticWorld};
use crate::foundation::{MediaRef, VisionLanguageModel};

/// A synthetic day walking through every scene of a mock world.
#[derive(Clone, Debug)]
pub struct DemoDay {
    pub stream: FrameStream,
    /// Ground-truth activity of each frame.
    pub planted: Vec<String>,
    pub locators: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DemoSpec {
    pub frames_per_scene: usize,
    pub start_ms: u64,
    pub step_ms: u64,
    /// Per-frame noise written into each locator.
    pub noise: f64,
    /// Attach the scene's first sound as an audio clip.
    pub audio: bool,
}

impl Default for DemoSpec {
    fn default() -> Self {
        Self { frames_per_scene: 4, start_ms: 8 * 3_600_000, step_ms: 7 * 60_000, noise: 0.0, audio: false }
    }
}

/// Frame `j` of scene `s` shows the place with its first activity, plus its
/// first three objects; timestamps advance by `step_ms`.
pub fn demo_day(world: &SyntheticWorld, vlm: &dyn VisionLanguageModel, spec: &DemoSpec) -> Result<DemoDay> {
    let mut frames = Vec::new();
    let mut planted = Vec::new();
    let mut locators = Vec::new();
    for scene in world.scenes() {
        for j in 0..spec.frames_per_scene {
            let mut entities = vec![(scene.place.clone(), 1.0)];
            entities.extend(scene.objects.iter().take(3).map(|o| (o.clone(), 1.0)));
            entities.push((scene.activities[0].clone(), 1.0));
            let locator = SynthFrame { entities, noise: spec.noise, seed: j as u64 + 1, say: None }.locator();
            let t_ms = spec.start_ms + frames.len() as u64 * spec.step_ms;
            let audio = (spec.audio && !scene.sounds.is_empty()).then(|| MediaRef::audio(format!("synth:{}", scene.sounds[0])));
            frames.push(Frame { t_ms, image: vlm.embed_image(&MediaRef::image(locator.clone()))?, audio });
            planted.push(scene.activities[0].clone());
            locators.push(locator);
        }
    }
    Ok(DemoDay { stream: FrameStream::new(frames)?, planted, locators })
}

use std::collections::HashSet;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data;
use crate::error::{Error, Result};
use crate::foundation::embedding::Embedding;
use crate::seed::seeded_rng as rng_from;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub place: String,
    pub objects: Vec<String>,
    pub activities: Vec<String>,
    pub sounds: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorldSpec {
    pub dim: usize,
    pub seed: u64,
    pub scenes: Vec<Scene>,
}

/// Closed world where every known phrase owns a fixed random unit vector.
///
/// Text that is not a known phrase embeds as the normalized sum of the known
/// phrases it contains (longest match first, whole words); text containing no
/// known phrase gets its own hashed vector.
#[derive(Clone, Debug)]
pub struct SyntheticWorld {
    dim: usize,
    seed: u64,
    scenes: Vec<Scene>,
    known: HashSet<String>,
    max_words: usize,
}

/// Parsed `synth:` locator.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SynthFrame {
    pub entities: Vec<(String, f64)>,
    pub noise: f64,
    pub seed: u64,
    pub say: Option<String>,
}

pub const SYNTH_PREFIX: &str = "synth:";

impl SynthFrame {
    /// Grammar: `synth:label[@weight];label…[|noise=σ][|seed=n][|say=text]`.
    /// `say=` must come last and consumes the rest of the string.
    pub fn parse(locator: &str) -> Result<Self> {
        let body = locator
            .strip_prefix(SYNTH_PREFIX)
            .ok_or_else(|| Error::UnknownLocator(locator.to_string()))?;
        let (body, say) = match body.find("|say=") {
            Some(i) => (&body[..i], Some(body[i + 5..].to_string())),
            None => (body, None),
        };
        let mut parts = body.split('|');
        let mut frame = SynthFrame { say, ..Default::default() };
        for ent in parts.next().unwrap_or("").split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (label, weight) = match ent.rsplit_once('@') {
                Some((l, w)) => {
                    let w: f64 = w.parse().map_err(|_| Error::UnknownLocator(locator.to_string()))?;
                    (l, w)
                }
                None => (ent, 1.0),
            };
            frame.entities.push((label.to_string(), weight));
        }
        for kv in parts {
            let bad = || Error::UnknownLocator(locator.to_string());
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            match k {
                "noise" => frame.noise = v.parse().map_err(|_| bad())?,
                "seed" => frame.seed = v.parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        Ok(frame)
    }

    pub fn locator(&self) -> String {
        let mut s = String::from(SYNTH_PREFIX);
        let ents: Vec<String> = self
            .entities
            .iter()
            .map(|(l, w)| if *w == 1.0 { l.clone() } else { format!("{l}@{w}") })
            .collect();
        s.push_str(&ents.join(";"));
        if self.noise != 0.0 {
            s.push_str(&format!("|noise={}", self.noise));
        }
        if self.seed != 0 {
            s.push_str(&format!("|seed={}", self.seed));
        }
        if let Some(say) = &self.say {
            s.push_str("|say=");
            s.push_str(say);
        }
        s
    }
}

/// Builds a noise-free locator from plain labels.
pub fn synth_locator<S: AsRef<str>>(labels: &[S]) -> String {
    let frame = SynthFrame {
        entities: labels.iter().map(|l| (l.as_ref().to_string(), 1.0)).collect(),
        ..Default::default()
    };
    frame.locator()
}


fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// Lowercase, keep letters/digits/apostrophes/hyphens, split on the rest.
pub(crate) fn words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '-'))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

impl SyntheticWorld {
    pub fn new(spec: WorldSpec, extra_labels: impl IntoIterator<Item = String>) -> Result<Self> {
        if spec.dim == 0 {
            return Err(Error::Precondition("world dim must be positive".into()));
        }
        let mut known: HashSet<String> = extra_labels.into_iter().map(|l| words(&l).join(" ")).collect();
        for s in &spec.scenes {
            known.insert(words(&s.place).join(" "));
            for l in s.objects.iter().chain(&s.activities).chain(&s.sounds) {
                known.insert(words(l).join(" "));
            }
        }
        known.remove("");
        let max_words = known.iter().map(|k| k.split(' ').count()).max().unwrap_or(1);
        Ok(Self { dim: spec.dim, seed: spec.seed, scenes: spec.scenes, known, max_words })
    }

    /// The bundled world: 12 scenes over the 365-place / 600-object vocabularies.
    pub fn bundled() -> Self {
        let spec: WorldSpec = serde_json::from_str(data::MOCK_WORLD).expect("bundled world parses");
        let extra = data::parse_label_lines(data::PLACES)
            .into_iter()
            .chain(data::parse_label_lines(data::OBJECTS))
            .chain(data::IMAGE_TYPES.iter().map(|s| s.to_string()))
            .chain(data::PEOPLE_COUNTS.iter().map(|s| s.to_string()));
        Self::new(spec, extra).expect("bundled world is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scenes(&self) -> &[Scene] {
        &self.scenes
    }

    pub fn scene(&self, place: &str) -> Option<&Scene> {
        self.scenes.iter().find(|s| s.place == place)
    }

    pub fn is_known(&self, phrase: &str) -> bool {
        self.known.contains(&words(phrase).join(" "))
    }

    /// Fixed unit vector of a phrase, independent of whether it is known.
    pub fn phrase_vector(&self, phrase: &str) -> Vec<f64> {
        let key = words(phrase).join(" ");
        let mut rng = rng_from(&[b"label", &self.seed.to_le_bytes(), key.as_bytes()]);
        let v = gaussian(&mut rng, self.dim);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    }

    /// Known phrases contained in `text`, greedy longest-first over whole words.
    pub fn known_phrases(&self, text: &str) -> Vec<String> {
        let ws = words(text);
        let mut found = Vec::new();
        let mut i = 0;
        while i < ws.len() {
            let max_len = self.max_words.min(ws.len() - i);
            let hit = (1..=max_len).rev().find(|&len| self.known.contains(&ws[i..i + len].join(" ")));
            match hit {
                Some(len) => {
                    found.push(ws[i..i + len].join(" "));
                    i += len;
                }
                None => i += 1,
            }
        }
        found
    }

    pub fn embed_text(&self, text: &str) -> Result<Embedding> {
        if text.trim().is_empty() {
            return Err(Error::Empty("label"));
        }
        let key = words(text).join(" ");
        let v = if self.known.contains(&key) || key.is_empty() {
            self.phrase_vector(text)
        } else {
            let phrases = self.known_phrases(text);
            if phrases.is_empty() {
                self.phrase_vector(text)
            } else {
                let mut acc = vec![0f64; self.dim];
                for p in &phrases {
                    for (a, x) in acc.iter_mut().zip(self.phrase_vector(p)) {
                        *a += x;
                    }
                }
                acc
            }
        };
        Embedding::from_f64(&v)?.normalize()
    }

    /// normalize(Σ wᵢ·v(eᵢ) + σ_frame·g₁ + σ_model·g₂), gᵢ ~ N(0, I).
    ///
    /// `g₁` is keyed by the locator, `g₂` by (model_seed, locator), so one
    /// model sees the same frame identically on every call.
    pub fn embed_frame(&self, locator: &str, model_sigma: f64, model_seed: u64) -> Result<Embedding> {
        let frame = SynthFrame::parse(locator)?;
        let mut acc = vec![0f64; self.dim];
        for (label, w) in &frame.entities {
            for (a, x) in acc.iter_mut().zip(self.phrase_vector(label)) {
                *a += w * x;
            }
        }
        if frame.noise != 0.0 {
            let mut rng = rng_from(&[b"frame-noise", &self.seed.to_le_bytes(), &frame.seed.to_le_bytes(), locator.as_bytes()]);
            for (a, g) in acc.iter_mut().zip(gaussian(&mut rng, self.dim)) {
                *a += frame.noise * g;
            }
        }
        if model_sigma != 0.0 {
            let mut rng = rng_from(&[b"model-noise", &self.seed.to_le_bytes(), &model_seed.to_le_bytes(), locator.as_bytes()]);
            for (a, g) in acc.iter_mut().zip(gaussian(&mut rng, self.dim)) {
                *a += model_sigma * g;
            }
        }
        Embedding::from_f64(&acc)?.normalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::embedding::cosine_score;

    #[test]
    fn locator_roundtrip() {
        let l = "synth:kitchen;mug@0.5|noise=0.1|seed=7|say=hi | there";
        let f = SynthFrame::parse(l).unwrap();
        assert_eq!(f.entities, vec![("kitchen".into(), 1.0), ("mug".into(), 0.5)]);
        assert_eq!(f.noise, 0.1);
        assert_eq!(f.seed, 7);
        assert_eq!(f.say.as_deref(), Some("hi | there"));
        assert_eq!(f.locator(), l);
    }

    #[test]
    fn bad_locators_rejected() {
        assert!(matches!(SynthFrame::parse("file:x.jpg"), Err(Error::UnknownLocator(_))));
        assert!(SynthFrame::parse("synth:a|bogus=1").is_err());
        assert!(SynthFrame::parse("synth:a@x").is_err());
    }

    #[test]
    fn single_entity_frame_matches_label_exactly() {
        let w = SyntheticWorld::bundled();
        let f = w.embed_frame(&synth_locator(&["kitchen"]), 0.0, 0).unwrap();
        let t = w.embed_text("kitchen").unwrap();
        assert!((cosine_score(&f, &t).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn compositional_text_uses_longest_phrases() {
        let w = SyntheticWorld::bundled();
        assert_eq!(w.known_phrases("This image shows a dining room."), vec!["dining room"]);
        assert_eq!(w.known_phrases("making coffee in the kitchen"), vec!["making coffee", "kitchen"]);
    }

    #[test]
    fn silent_frame_has_zero_norm() {
        let w = SyntheticWorld::bundled();
        assert!(matches!(w.embed_frame("synth:", 0.0, 0), Err(Error::ZeroNorm)));
    }
}

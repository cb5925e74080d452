//! Python bindings over the mock backend. Structured results cross the
//! boundary as plain dicts.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;
use socratic_core::caption::{caption_internet_image, CaptionConfig, EgocentricCaptioner, InternetVocabularies};
use socratic_core::foundation::mock::{HashEmbedder, MockAlm, MockLm, MockVlm, SyntheticWorld};
use socratic_core::foundation::{cosine_score, AdapterSet, Embedding, MediaRef, VisionLanguageModel};
use socratic_core::reasoning::{execute, AskConfig, FrameIndex, Modality, Question, SearchIndexes};
use socratic_core::retrieval::{Algo, BuildParams, KeyMatrix, RetrievalIndex};
use socratic_core::selection::{graded_frames as core_graded_frames, run_selection, SelectionInputs};
use socratic_core::v2t::{
    evaluate, evaluate_subset_long_transcript, ground_truth, prepare_corpus, CaptionRow, V2tConfig, DEFAULT_KS,
};
use socratic_core::world_state::{
    compile_history, demo_day, render_history, select_by_search, select_uniform, union_indices, ClockFormat,
    DemoSpec, FrameStream as CoreStream, Source, WorldStateHistory,
};
use socratic_core::Error;

create_exception!(socratic_py, SocraticError, PyValueError, "A pipeline step failed; the message names the cause.");

fn err(e: Error) -> PyErr {
    SocraticError::new_err(e.to_string())
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for Result<T, Error> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(err)
    }
}

/// Any serializable value as the equivalent Python object.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| err(Error::Json(e)))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn vector(values: Vec<f32>) -> PyResult<Embedding> {
    Embedding::new(values).py_err()
}

/// A timestamped frame stream.
#[pyclass(module = "socratic_py", frozen)]
struct FrameStream {
    inner: CoreStream,
}

#[pymethods]
impl FrameStream {
    /// Parses frames JSONL: one `{t_ms, embedding, audio?}` object per line.
    #[staticmethod]
    fn from_jsonl(text: &str) -> PyResult<Self> {
        Ok(Self { inner: CoreStream::from_jsonl(text).py_err()? })
    }

    fn to_jsonl(&self) -> String {
        self.inner.to_jsonl()
    }

    fn timestamps(&self) -> Vec<u64> {
        self.inner.frames().iter().map(|f| f.t_ms).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// An event log in time order.
#[pyclass(module = "socratic_py", frozen)]
struct History {
    inner: WorldStateHistory,
}

#[pymethods]
impl History {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: WorldStateHistory::from_json(text).py_err()? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// One `clock: sentence` line per event; `clock` is "12" or "24".
    #[pyo3(signature = (clock = "12"))]
    fn render(&self, clock: &str) -> PyResult<String> {
        let format = match clock {
            "12" => ClockFormat::Twelve,
            "24" => ClockFormat::TwentyFour,
            other => return Err(PyValueError::new_err(format!("clock must be \"12\" or \"24\", got {other:?}"))),
        };
        Ok(render_history(&self.inner, format))
    }

    fn events<'py>(&self, py: Python<'py>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.events)
    }

    fn __len__(&self) -> usize {
        self.inner.events.len()
    }
}

/// A maximum inner product index over stored rows.
#[pyclass(module = "socratic_py", frozen)]
struct Index {
    inner: RetrievalIndex,
}

#[pymethods]
impl Index {
    /// `algo` is one of exact, lsh, mem or rft.
    #[staticmethod]
    #[pyo3(signature = (rows, algo = "exact", ids = None, seed = 0))]
    fn build(rows: Vec<Vec<f32>>, algo: &str, ids: Option<Vec<String>>, seed: u64) -> PyResult<Self> {
        let mut keys = KeyMatrix::from_rows(&rows).py_err()?;
        if let Some(ids) = ids {
            keys = keys.with_ids(ids).py_err()?;
        }
        let algo: Algo = algo.parse().py_err()?;
        let mut params = BuildParams::default();
        params.lsh.seed = seed;
        params.features.seed = seed;
        Ok(Self { inner: RetrievalIndex::build(&keys, algo, &params).py_err()? })
    }

    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: RetrievalIndex::load(&dir).py_err()? })
    }

    fn save(&self, dir: PathBuf) -> PyResult<()> {
        self.inner.save(&dir).py_err()
    }

    /// Top-`k` `(row, score)` pairs, best first (exact and lsh only).
    #[pyo3(signature = (query, k = 5))]
    fn search(&self, query: Vec<f32>, k: usize) -> PyResult<Vec<(usize, f64)>> {
        Ok(self.inner.search(&query, k).py_err()?.into_iter().map(|h| (h.index, h.score)).collect())
    }

    #[getter]
    fn algo(&self) -> String {
        format!("{:?}", self.inner.algo()).to_lowercase()
    }

    fn __len__(&self) -> usize {
        self.inner.keys().count()
    }
}

/// Deterministic models over the bundled synthetic world.
#[pyclass(module = "socratic_py", frozen)]
struct MockBackend {
    world: Arc<SyntheticWorld>,
    adapters: AdapterSet,
    seed: u64,
    caption: CaptionConfig,
}

impl MockBackend {
    fn vlm(&self) -> PyResult<&dyn VisionLanguageModel> {
        self.adapters.vlm().py_err()
    }

    fn image(&self, locator: &str) -> PyResult<Embedding> {
        self.vlm()?.embed_image(&MediaRef::image(locator)).py_err()
    }
}

fn mock_lm(kind: &str, seed: u64) -> PyResult<MockLm> {
    let lm = match kind {
        "strong" => MockLm::strong(),
        "weak" => MockLm::weak(),
        other => return Err(PyValueError::new_err(format!("lm must be \"strong\" or \"weak\", got {other:?}"))),
    };
    Ok(lm.with_seed(seed))
}

#[pymethods]
impl MockBackend {
    #[new]
    #[pyo3(signature = (seed = 0, lm = "strong", vlm_sigma = 0.0))]
    fn new(seed: u64, lm: &str, vlm_sigma: f64) -> PyResult<Self> {
        let world = Arc::new(SyntheticWorld::bundled());
        let adapters = AdapterSet {
            lm_generate: Some(Arc::new(mock_lm(lm, seed)?)),
            lm_embed: Some(Arc::new(HashEmbedder::bundled())),
            vlm: Some(Arc::new(MockVlm::new("mock-vlm", world.clone()).with_noise(vlm_sigma, seed))),
            alm: Some(Arc::new(MockAlm::new("mock-alm", world.clone()))),
        };
        Ok(Self { world, adapters, seed, caption: CaptionConfig::default() })
    }

    /// Image embedding of a `synth:` locator.
    fn embed_image(&self, locator: &str) -> PyResult<Vec<f32>> {
        Ok(self.image(locator)?.into_values())
    }

    /// Text embedding in the shared image-text space.
    fn embed_text(&self, text: &str) -> PyResult<Vec<f32>> {
        Ok(self.vlm()?.embed_text(text).py_err()?.into_values())
    }

    /// First-person caption of one egocentric frame with its detections.
    #[pyo3(signature = (locator, t_ms = 0, audio = None))]
    fn caption<'py>(&self, py: Python<'py>, locator: &str, t_ms: u64, audio: Option<String>) -> PyResult<Bound<'py, PyDict>> {
        let captioner = EgocentricCaptioner::bundled(self.caption.clone(), self.vlm()?).py_err()?;
        let audio = audio.map(MediaRef::audio);
        let m = captioner.describe(t_ms, &self.image(locator)?, audio.as_ref(), &self.adapters).py_err()?;
        let out = PyDict::new(py);
        out.set_item("caption", m.first_person())?;
        out.set_item("t_ms", m.t_ms)?;
        out.set_item("places", to_py(py, &m.places)?)?;
        out.set_item("objects", to_py(py, &m.objects)?)?;
        out.set_item("activities", to_py(py, &m.activities)?)?;
        out.set_item("sound", to_py(py, &m.sound)?)?;
        Ok(out)
    }

    /// Internet-image caption: sampled candidates reranked by the VLM.
    #[pyo3(signature = (locator, candidates = None, temperature = None))]
    fn caption_internet(&self, py: Python<'_>, locator: &str, candidates: Option<usize>, temperature: Option<f64>) -> PyResult<Py<PyAny>> {
        let mut cfg = CaptionConfig::internet();
        if let Some(n) = candidates {
            cfg.caption_candidates = n;
        }
        if let Some(t) = temperature {
            cfg.caption_temperature = t;
        }
        cfg.validate().py_err()?;
        let vlm = self.vlm()?;
        let vocabs = InternetVocabularies::bundled(vlm).py_err()?;
        let lm = self.adapters.lm().py_err()?;
        to_py(py, &caption_internet_image(&self.image(locator)?, &vocabs, lm, vlm, &cfg).py_err()?)
    }

    /// A day visiting every scene, `frames_per_scene` frames each.
    #[pyo3(signature = (frames_per_scene = 4, noise = 0.0, audio = false))]
    fn demo_day(&self, frames_per_scene: usize, noise: f64, audio: bool) -> PyResult<FrameStream> {
        let spec = DemoSpec { frames_per_scene, noise, audio, ..DemoSpec::default() };
        Ok(FrameStream { inner: demo_day(&self.world, self.vlm()?, &spec).py_err()?.stream })
    }

    /// Captions the frames that the `mode` selection picks.
    #[pyo3(signature = (stream, mode = "uniform", interval_ms = 300_000, entities = None))]
    fn history(&self, stream: &FrameStream, mode: &str, interval_ms: u64, entities: Option<Vec<String>>) -> PyResult<History> {
        let s = &stream.inner;
        let entities = entities.unwrap_or_default();
        let search = || -> PyResult<Vec<usize>> {
            let vlm = self.vlm()?;
            let queries = entities.iter().map(|e| vlm.embed_text(e)).collect::<Result<Vec<_>, _>>().py_err()?;
            select_by_search(s, &queries, &s.image_keys().py_err()?, &Default::default()).py_err()
        };
        let (indices, source) = match mode {
            "uniform" => (select_uniform(s, interval_ms).py_err()?, Source::Uniform),
            "search" => (search()?, Source::Search),
            "hybrid" => (union_indices(&select_uniform(s, interval_ms).py_err()?, &search()?), Source::Hybrid),
            other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
        };
        let captioner = EgocentricCaptioner::bundled(self.caption.clone(), self.vlm()?).py_err()?;
        let mut h = compile_history(s, &indices, &captioner, &self.adapters, source).py_err()?;
        if !entities.is_empty() {
            h = h.with_search_entities(entities);
        }
        Ok(History { inner: h })
    }

    /// Routes and answers one question. `stream` enables image and audio search.
    #[pyo3(signature = (question, history = None, stream = None, explain = false, modality = None))]
    fn ask(
        &self,
        py: Python<'_>,
        question: &str,
        history: Option<PyRef<'_, History>>,
        stream: Option<PyRef<'_, FrameStream>>,
        explain: bool,
        modality: Option<&str>,
    ) -> PyResult<Py<PyAny>> {
        let mut q = Question::new(question).py_err()?;
        if let Some(m) = modality {
            q = q.forced(match m {
                "text" => Modality::TextAnswer,
                "image" => Modality::ImageSearch,
                "audio" => Modality::AudioSearch,
                other => return Err(PyValueError::new_err(format!("unknown modality {other:?}"))),
            });
        }
        let mut indexes = SearchIndexes::default();
        if let Some(s) = &stream {
            indexes.image = Some(FrameIndex::images(&s.inner).py_err()?);
            if s.inner.frames().iter().any(|f| f.audio.is_some()) {
                indexes.audio = Some(FrameIndex::audio(&s.inner, &self.adapters).py_err()?);
            }
        }
        let cfg = AskConfig { explain, ..AskConfig::default() };
        let answer = execute(&q, history.as_deref().map(|h| &h.inner), &indexes, &self.adapters, &cfg).py_err()?;
        to_py(py, &answer)
    }

    /// Caption-to-video ranking metrics. `videos` maps id to embedding,
    /// `captions` holds `(caption_id, video_id, text)` rows.
    #[pyo3(signature = (videos, captions, transcripts = None, gate_chars = 100, long_only = false))]
    fn v2t(
        &self,
        py: Python<'_>,
        videos: Vec<(String, Vec<f32>)>,
        captions: Vec<(String, String, String)>,
        transcripts: Option<BTreeMap<String, String>>,
        gate_chars: usize,
        long_only: bool,
    ) -> PyResult<Py<PyAny>> {
        let videos = videos.into_iter().map(|(id, v)| Ok((id, vector(v)?))).collect::<PyResult<Vec<_>>>()?;
        let rows: Vec<CaptionRow> =
            captions.into_iter().map(|(caption_id, video_id, text)| CaptionRow { caption_id, video_id, text }).collect();
        let cfg = V2tConfig { gate_chars, ..V2tConfig::default() };
        let (videos, caps, _warnings) =
            prepare_corpus(&videos, &rows, &transcripts.unwrap_or_default(), &self.adapters, &cfg).py_err()?;
        let truth = ground_truth(&rows);
        let m = if long_only {
            evaluate_subset_long_transcript(&videos, &caps, &truth, &DEFAULT_KS, gate_chars)
        } else {
            evaluate(&videos, &caps, &truth, &DEFAULT_KS)
        };
        to_py(py, &m.py_err()?)
    }

    /// Scores mock candidate VLMs, given as id to perception noise, against
    /// captions from `baseline`.
    #[pyo3(signature = (locators, candidates, baseline))]
    fn select(&self, py: Python<'_>, locators: Vec<String>, candidates: BTreeMap<String, f64>, baseline: &str) -> PyResult<Py<PyAny>> {
        let frames: Vec<MediaRef> = locators.into_iter().map(MediaRef::image).collect();
        let models: BTreeMap<String, Arc<dyn VisionLanguageModel>> = candidates
            .into_iter()
            .map(|(id, sigma)| {
                let m: Arc<dyn VisionLanguageModel> = Arc::new(MockVlm::new(id.clone(), self.world.clone()).with_noise(sigma, self.seed));
                (id, m)
            })
            .collect();
        let baseline_vlm = models
            .get(baseline)
            .cloned()
            .ok_or_else(|| PyValueError::new_err(format!("baseline {baseline:?} is not a candidate")))?;
        let inputs = SelectionInputs {
            frames: &frames,
            candidates: models.into_values().collect(),
            weak_lm: Arc::new(mock_lm("weak", self.seed)?),
            strong_lm: Arc::new(mock_lm("strong", self.seed)?),
            baseline_vlm,
            heldout: Arc::new(HashEmbedder::new("held-out-sentence-48879", 512, 0xbeef)),
        };
        to_py(py, &run_selection(&inputs, &self.caption).py_err()?)
    }
}

/// Three graded selection frames per scene, as locators.
#[pyfunction]
fn graded_frames() -> Vec<String> {
    core_graded_frames(&SyntheticWorld::bundled()).into_iter().map(|m| m.locator).collect()
}

/// Cosine similarity of two vectors.
#[pyfunction]
fn cosine(a: Vec<f32>, b: Vec<f32>) -> PyResult<f64> {
    cosine_score(&vector(a)?, &vector(b)?).py_err()
}

#[pymodule]
fn socratic_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SocraticError", m.py().get_type::<SocraticError>())?;
    m.add_class::<FrameStream>()?;
    m.add_class::<History>()?;
    m.add_class::<Index>()?;
    m.add_class::<MockBackend>()?;
    m.add_function(wrap_pyfunction!(graded_frames, m)?)?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    Ok(())
}

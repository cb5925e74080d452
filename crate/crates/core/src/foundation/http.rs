//! JSON-over-HTTP backend and a local stub server speaking the same protocol.
//!
//! Protocol:
//! * `POST /v1/complete {prompt, temperature, max_tokens, stop, n}` → `{choices:[{text}]}`
//! * `POST /v1/embed {kind, payload}` → `{dim, values}`
//! * `POST /v1/transcribe {payload, options?}` → `{text}`
//!
//! A `413` reply with `{size, limit}` maps to a context-overflow error.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::adapters::{
    AdapterSet, AudioLanguageModel, CompletionParams, LanguageModel, MediaKind, MediaRef, TextEmbedder,
    TranscribeOptions, VisionLanguageModel,
};
use super::embedding::Embedding;
use crate::error::{Error, Result};

pub const ENV_LM: &str = "SM_LM_ENDPOINT";
pub const ENV_VLM: &str = "SM_VLM_ENDPOINT";
pub const ENV_ALM: &str = "SM_ALM_ENDPOINT";
pub const ENV_EMBED: &str = "SM_EMBED_ENDPOINT";
pub const ENV_TIMEOUT: &str = "SM_HTTP_TIMEOUT_MS";
pub const ENV_MAX_INFLIGHT: &str = "SM_HTTP_MAX_INFLIGHT";

pub const DEFAULT_TIMEOUT_MS: u64 = 30_000;
pub const DEFAULT_MAX_INFLIGHT: usize = 8;

/// Counting semaphore bounding in-flight requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn acquire(&self) -> GateGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HttpSettings {
    pub timeout_ms: u64,
    pub max_inflight: usize,
}

impl Default for HttpSettings {
    fn default() -> Self {
        Self { timeout_ms: DEFAULT_TIMEOUT_MS, max_inflight: DEFAULT_MAX_INFLIGHT }
    }
}

impl HttpSettings {
    pub fn from_env() -> Result<Self> {
        let mut s = Self::default();
        if let Ok(v) = std::env::var(ENV_TIMEOUT) {
            s.timeout_ms = v.parse().map_err(|_| Error::Precondition(format!("{ENV_TIMEOUT}={v:?} is not an integer")))?;
        }
        if let Ok(v) = std::env::var(ENV_MAX_INFLIGHT) {
            s.max_inflight = v
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Precondition(format!("{ENV_MAX_INFLIGHT}={v:?} must be a positive integer")))?;
        }
        Ok(s)
    }
}

/// Carries one protocol request to a model and returns its JSON reply.
pub trait Transport: Send + Sync {
    fn name(&self) -> &str;
    fn call(&self, path: &str, body: &Value) -> Result<Value>;
}

/// Blocking HTTP transport with a timeout and an in-flight cap.
pub struct HttpTransport {
    name: String,
    base: String,
    agent: ureq::Agent,
    gate: Gate,
}

#[derive(Deserialize)]
struct OverflowReply {
    size: usize,
    limit: usize,
}

impl HttpTransport {
    pub fn new(base: impl Into<String>, settings: &HttpSettings) -> Self {
        let base = base.into().trim_end_matches('/').to_string();
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(settings.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            name: format!("http:{base}"),
            base,
            agent,
            gate: Gate { free: Mutex::new(settings.max_inflight.max(1)), cv: Condvar::new() },
        }
    }
}

impl Transport for HttpTransport {
    fn name(&self) -> &str {
        &self.name
    }

    fn call(&self, path: &str, body: &Value) -> Result<Value> {
        let _permit = self.gate.acquire();
        let url = format!("{}{}", self.base, path);
        let fail = |m: String| Error::backend(&self.name, m);
        let resp = self.agent.post(&url).send_json(body).map_err(|e| fail(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.into_body().read_to_string().map_err(|e| fail(e.to_string()))?;
        reply_to_result(&self.name, path, status, &text)
    }
}

pub(crate) fn reply_to_result(backend: &str, path: &str, status: u16, text: &str) -> Result<Value> {
    let fail = |m: String| Error::backend(backend, m);
    match status {
        200..=299 => serde_json::from_str(text).map_err(|e| fail(format!("bad reply from {path}: {e}"))),
        413 => match serde_json::from_str::<OverflowReply>(text) {
            Ok(o) => Err(Error::ContextOverflow { size: o.size, limit: o.limit }),
            Err(_) => Err(fail(format!("413 from {path}: {text}"))),
        },
        _ => Err(fail(format!("status {status} from {path}: {text}"))),
    }
}

/// A model reached through the JSON protocol. Implements every adapter
/// trait; the role it plays is decided by where it sits in an [`AdapterSet`].
pub struct RemoteModel<T> {
    transport: T,
    transcribe_options: TranscribeOptions,
}

pub type HttpModel = RemoteModel<HttpTransport>;

#[derive(Deserialize)]
struct CompleteReply {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

#[derive(Deserialize)]
struct EmbedReply {
    dim: usize,
    values: Vec<f32>,
}

#[derive(Deserialize)]
struct TranscribeReply {
    text: String,
}

impl HttpModel {
    pub fn http(base: impl Into<String>, settings: &HttpSettings) -> Self {
        RemoteModel::new(HttpTransport::new(base, settings))
    }
}

impl<T: Transport> RemoteModel<T> {
    pub fn new(transport: T) -> Self {
        Self { transport, transcribe_options: TranscribeOptions::new() }
    }

    pub fn with_transcribe_options(mut self, options: TranscribeOptions) -> Self {
        self.transcribe_options = options;
        self
    }

    fn post<R: for<'de> Deserialize<'de>>(&self, path: &str, body: &Value) -> Result<R> {
        let v = self.transport.call(path, body)?;
        serde_json::from_value(v).map_err(|e| Error::backend(self.transport.name(), format!("bad reply from {path}: {e}")))
    }

    fn embed_kind(&self, kind: &str, payload: &str) -> Result<Embedding> {
        let r: EmbedReply = self.post("/v1/embed", &json!({"kind": kind, "payload": payload}))?;
        if r.values.len() != r.dim {
            return Err(Error::backend(
                self.transport.name(),
                format!("declared dim {} but sent {} values", r.dim, r.values.len()),
            ));
        }
        Embedding::new(r.values)
    }
}

impl<T: Transport> LanguageModel for RemoteModel<T> {
    fn id(&self) -> &str {
        self.transport.name()
    }

    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<Vec<String>> {
        super::adapters::require_prompt(prompt)?;
        params.validate()?;
        let body = json!({
            "prompt": prompt,
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
            "stop": params.stop,
            "n": params.n,
        });
        let r: CompleteReply = self.post("/v1/complete", &body)?;
        Ok(r.choices.into_iter().map(|c| c.text).collect())
    }
}

impl<T: Transport> TextEmbedder for RemoteModel<T> {
    fn id(&self) -> &str {
        self.transport.name()
    }

    fn embed(&self, text: &str) -> Result<Embedding> {
        if text.trim().is_empty() {
            return Err(Error::Empty("text"));
        }
        self.embed_kind("text", text)
    }
}

impl<T: Transport> VisionLanguageModel for RemoteModel<T> {
    fn id(&self) -> &str {
        self.transport.name()
    }

    fn embed_text(&self, label: &str) -> Result<Embedding> {
        self.embed_kind("text", label)
    }

    fn embed_image(&self, media: &MediaRef) -> Result<Embedding> {
        media.expect(MediaKind::Image)?;
        self.embed_kind("image", &media.locator)
    }
}

impl<T: Transport> AudioLanguageModel for RemoteModel<T> {
    fn id(&self) -> &str {
        self.transport.name()
    }

    fn embed_text(&self, label: &str) -> Result<Embedding> {
        self.embed_kind("text", label)
    }

    fn embed_audio(&self, media: &MediaRef) -> Result<Embedding> {
        media.expect(MediaKind::Audio)?;
        self.embed_kind("audio", &media.locator)
    }

    fn transcribe(&self, media: &MediaRef) -> Result<String> {
        media.expect(MediaKind::Audio)?;
        let mut body = json!({"payload": media.locator});
        if !self.transcribe_options.is_empty() {
            body["options"] = serde_json::to_value(&self.transcribe_options)?;
        }
        Ok(self.post::<TranscribeReply>("/v1/transcribe", &body)?.text)
    }
}

/// Adapters for every endpoint variable that is set; unset roles stay absent.
pub fn adapters_from_env() -> Result<AdapterSet> {
    let settings = HttpSettings::from_env()?;
    let model = |var: &str| std::env::var(var).ok().map(|u| Arc::new(HttpModel::http(u, &settings)));
    let mut set = AdapterSet::default();
    if let Some(m) = model(ENV_LM) {
        set.lm_generate = Some(m);
    }
    if let Some(m) = model(ENV_EMBED) {
        set.lm_embed = Some(m);
    }
    if let Some(m) = model(ENV_VLM) {
        set.vlm = Some(m);
    }
    if let Some(m) = model(ENV_ALM) {
        set.alm = Some(m);
    }
    Ok(set)
}

/// Minimal HTTP/1.1 server that answers the protocol from local adapters.
///
/// Meant for conformance tests and offline demos; one thread per connection,
/// `Connection: close` on every reply.
pub struct StubServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl StubServer {
    pub fn start(adapters: AdapterSet) -> Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0").map_err(|e| Error::io("127.0.0.1:0", e))?;
        let addr = listener.local_addr().map_err(|e| Error::io("stub listener", e))?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let adapters = Arc::new(adapters);
        let handle = std::thread::spawn(move || {
            for conn in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                if let Ok(stream) = conn {
                    let adapters = adapters.clone();
                    std::thread::spawn(move || {
                        let _ = serve_one(stream, &adapters);
                    });
                }
            }
        });
        Ok(Self { addr, stop, handle: Some(handle) })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn serve_one(stream: TcpStream, adapters: &AdapterSet) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line == "\r\n" || line == "\n" {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.trim().eq_ignore_ascii_case("content-length") {
                content_length = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let path = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
    let (status, reply) = match serde_json::from_slice::<Value>(&body) {
        Ok(req) => dispatch(&path, &req, adapters),
        Err(e) => (400, json!({"error": e.to_string()})),
    };
    let payload = serde_json::to_vec(&reply).unwrap_or_default();
    let reason = match status {
        200 => "OK",
        400 => "Bad Request",
        404 => "Not Found",
        413 => "Payload Too Large",
        _ => "Error",
    };
    let mut out = stream;
    write!(
        out,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        payload.len()
    )?;
    out.write_all(&payload)?;
    out.flush()
}

pub(crate) fn dispatch(path: &str, req: &Value, adapters: &AdapterSet) -> (u16, Value) {
    let s = |k: &str| req.get(k).and_then(Value::as_str).unwrap_or("").to_string();
    let result: Result<Value> = (|| match path {
        "/v1/complete" => {
            let params = CompletionParams {
                temperature: req.get("temperature").and_then(Value::as_f64).unwrap_or(0.0),
                max_tokens: req.get("max_tokens").and_then(Value::as_u64).unwrap_or(64) as usize,
                stop: serde_json::from_value(req.get("stop").cloned().unwrap_or(json!([])))?,
                n: req.get("n").and_then(Value::as_u64).unwrap_or(1) as usize,
            };
            let texts = adapters.lm()?.complete(&s("prompt"), &params)?;
            Ok(json!({"choices": texts.into_iter().map(|t| json!({"text": t})).collect::<Vec<_>>()}))
        }
        "/v1/embed" => {
            let payload = s("payload");
            let e = match s("kind").as_str() {
                "image" => adapters.vlm()?.embed_image(&MediaRef::image(payload))?,
                "audio" => adapters.alm()?.embed_audio(&MediaRef::audio(payload))?,
                "text" => match (&adapters.vlm, &adapters.alm, &adapters.lm_embed) {
                    (Some(v), _, _) => v.embed_text(&payload)?,
                    (None, Some(a), _) => a.embed_text(&payload)?,
                    (None, None, Some(t)) => t.embed(&payload)?,
                    _ => return Err(Error::MissingAdapter("text embedder")),
                },
                other => return Err(Error::Precondition(format!("unknown embed kind {other:?}"))),
            };
            Ok(json!({"dim": e.dim(), "values": e.values()}))
        }
        "/v1/transcribe" => Ok(json!({"text": adapters.alm()?.transcribe(&MediaRef::audio(s("payload")))?})),
        _ => Err(Error::UnknownLocator(path.to_string())),
    })();
    match result {
        Ok(v) => (200, v),
        Err(Error::ContextOverflow { size, limit }) => (413, json!({"size": size, "limit": limit})),
        Err(Error::UnknownLocator(p)) if p == path => (404, json!({"error": format!("no route {p}")})),
        Err(e) => (400, json!({"error": e.to_string()})),
    }
}

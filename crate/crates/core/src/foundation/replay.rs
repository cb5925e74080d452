//! Content-addressed record/replay of protocol exchanges.
//!
//! Each exchange is stored as `<dir>/<key>.json` where `key` is the hex
//! SHA-256 of `role \n path \n canonical-json(request)`. Canonical JSON is
//! serde_json's compact form with sorted object keys.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::adapters::AdapterSet;
use super::http::{dispatch, reply_to_result, RemoteModel, Transport};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub role: String,
    pub path: String,
    pub request: Value,
    pub response: Value,
}

pub fn fixture_key(role: &str, path: &str, request: &Value) -> String {
    let canonical = serde_json::to_string(request).expect("json value serializes");
    let mut h = Sha256::new();
    h.update(role.as_bytes());
    h.update(b"\n");
    h.update(path.as_bytes());
    h.update(b"\n");
    h.update(canonical.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Clone)]
enum Mode {
    Replay,
    /// Serve stored fixtures; on a miss, call the inner adapters and store.
    Record(Arc<AdapterSet>),
}

pub struct ReplayTransport {
    name: String,
    role: String,
    dir: PathBuf,
    mode: Mode,
}

impl ReplayTransport {
    pub fn replay(role: &str, dir: impl Into<PathBuf>) -> Self {
        let dir = dir.into();
        Self { name: format!("replay:{role}"), role: role.to_string(), dir, mode: Mode::Replay }
    }

    pub fn record(role: &str, dir: impl Into<PathBuf>, inner: AdapterSet) -> Self {
        let mut t = Self::replay(role, dir);
        t.name = format!("record:{role}");
        t.mode = Mode::Record(Arc::new(inner));
        t
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }
}

pub fn write_fixture(dir: &Path, fixture: &Fixture) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let key = fixture_key(&fixture.role, &fixture.path, &fixture.request);
    let path = dir.join(format!("{key}.json"));
    let tmp = dir.join(format!(".{key}.tmp"));
    let body = serde_json::to_string_pretty(fixture)? + "\n";
    std::fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

impl Transport for ReplayTransport {
    fn name(&self) -> &str {
        &self.name
    }

    fn call(&self, path: &str, body: &Value) -> Result<Value> {
        let key = fixture_key(&self.role, path, body);
        let file = self.path_for(&key);
        match std::fs::read_to_string(&file) {
            Ok(text) => {
                let f: Fixture = serde_json::from_str(&text)
                    .map_err(|e| Error::format(file.display().to_string(), e.to_string()))?;
                if f.request != *body || f.path != path || f.role != self.role {
                    return Err(Error::format(file.display().to_string(), "fixture does not match its key"));
                }
                Ok(f.response)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => match &self.mode {
                Mode::Replay => Err(Error::backend(
                    &self.name,
                    format!("no fixture {key} for {path} {}", truncate(&body.to_string(), 160)),
                )),
                Mode::Record(inner) => {
                    let (status, reply) = dispatch(path, body, inner);
                    let response = reply_to_result(&self.name, path, status, &reply.to_string())?;
                    let fixture =
                        Fixture { role: self.role.clone(), path: path.to_string(), request: body.clone(), response };
                    write_fixture(&self.dir, &fixture)?;
                    Ok(fixture.response)
                }
            },
            Err(e) => Err(Error::io(file, e)),
        }
    }
}

fn truncate(s: &str, n: usize) -> String {
    match s.char_indices().nth(n) {
        Some((i, _)) => format!("{}…", &s[..i]),
        None => s.to_string(),
    }
}

fn only(inner: &AdapterSet, role: &str) -> AdapterSet {
    let mut set = AdapterSet::default();
    match role {
        "lm" => set.lm_generate = inner.lm_generate.clone(),
        "embed" => set.lm_embed = inner.lm_embed.clone(),
        "vlm" => set.vlm = inner.vlm.clone(),
        "alm" => set.alm = inner.alm.clone(),
        _ => {}
    }
    set
}

/// Four replaying adapters over one fixture directory. With `inner`, misses
/// are answered by the matching inner adapter and recorded.
pub fn replay_adapters(dir: &Path, inner: Option<&AdapterSet>) -> AdapterSet {
    let make = |role: &str| {
        let t = match inner {
            Some(set) => ReplayTransport::record(role, dir, only(set, role)),
            None => ReplayTransport::replay(role, dir),
        };
        Arc::new(RemoteModel::new(t))
    };
    AdapterSet {
        lm_generate: Some(make("lm")),
        lm_embed: Some(make("embed")),
        vlm: Some(make("vlm")),
        alm: Some(make("alm")),
    }
}

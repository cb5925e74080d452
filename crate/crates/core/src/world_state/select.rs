use serde::{Deserialize, Serialize};

use super::stream::FrameStream;
use crate::error::{Error, Result};
use crate::foundation::Embedding;
use crate::retrieval::{score_all, top_n_local_maxima, KeyMatrix};

/// For each grid point `t₀ + j·interval` up to the last timestamp, the
/// first frame at or after it. Sorted and duplicate-free.
pub fn select_uniform(stream: &FrameStream, interval_ms: u64) -> Result<Vec<usize>> {
    if interval_ms == 0 {
        return Err(Error::Precondition("interval_ms must be positive".into()));
    }
    let t0 = stream.frames()[0].t_ms;
    let mut grid = t0;
    let mut out = Vec::new();
    for (i, f) in stream.frames().iter().enumerate() {
        if f.t_ms >= grid {
            out.push(i);
            grid = t0 + interval_ms * ((f.t_ms - t0) / interval_ms + 1);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchModality {
    Image,
    Audio,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub n_per_entity: usize,
    /// Half-width of the local-maximum neighbourhood, in frames.
    pub window: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { n_per_entity: 3, window: 2 }
    }
}

/// Scores of every frame in `keys` against each query, then the union of
/// each query's top local maxima, in time order.
pub fn select_by_search(stream: &FrameStream, queries: &[Embedding], keys: &KeyMatrix, cfg: &SearchConfig) -> Result<Vec<usize>> {
    if queries.is_empty() {
        return Err(Error::Empty("search entities"));
    }
    if keys.count() != stream.len() {
        return Err(Error::Precondition(format!("index has {} rows for {} frames", keys.count(), stream.len())));
    }
    let mut picked = Vec::new();
    for q in queries {
        let q = q.clone().normalize()?;
        picked.extend(top_n_local_maxima(&score_all(q.values(), keys)?, cfg.n_per_entity, cfg.window)?);
    }
    picked.sort_unstable();
    picked.dedup();
    Ok(picked)
}

/// Sorted union of two selections.
pub fn union_indices(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

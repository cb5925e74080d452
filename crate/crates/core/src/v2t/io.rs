use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::GroundTruth;
use super::records::{prepare_video, CaptionRecord, V2tConfig, VideoRecord};
use crate::error::{Error, Result};
use crate::foundation::smeb::SmebMatrix;
use crate::foundation::{AdapterSet, Embedding};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionRow {
    pub caption_id: String,
    pub video_id: String,
    pub text: String,
}

const TSV_HEADER: &str = "caption_id\tvideo_id\ttext";

/// `caption_id \t video_id \t text` lines; an optional header line and blank
/// lines are skipped. Tabs inside the text are kept.
pub fn parse_captions_tsv(src: &str) -> Result<Vec<CaptionRow>> {
    let mut rows = Vec::new();
    for (n, line) in src.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || (n == 0 && line == TSV_HEADER) {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let (Some(c), Some(v), Some(t)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::format("captions TSV", format!("line {}: expected 3 tab-separated fields", n + 1)));
        };
        if c.is_empty() || v.is_empty() || t.trim().is_empty() {
            return Err(Error::format("captions TSV", format!("line {}: empty field", n + 1)));
        }
        rows.push(CaptionRow { caption_id: c.into(), video_id: v.into(), text: t.into() });
    }
    if rows.is_empty() {
        return Err(Error::Empty("captions"));
    }
    Ok(rows)
}

pub fn write_captions_tsv(rows: &[CaptionRow]) -> String {
    let mut out = format!("{TSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!("{}\t{}\t{}\n", r.caption_id, r.video_id, r.text));
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TranscriptLine {
    video_id: String,
    transcript: String,
}

pub fn parse_transcripts_jsonl(src: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in src.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let t: TranscriptLine = serde_json::from_str(line).map_err(|e| Error::format("transcripts JSONL", format!("line {}: {e}", n + 1)))?;
        if out.insert(t.video_id.clone(), t.transcript).is_some() {
            return Err(Error::format("transcripts JSONL", format!("duplicate video {}", t.video_id)));
        }
    }
    Ok(out)
}

pub fn write_transcripts_jsonl(transcripts: &BTreeMap<String, String>) -> String {
    transcripts
        .iter()
        .map(|(v, t)| serde_json::to_string(&TranscriptLine { video_id: v.clone(), transcript: t.clone() }).expect("serializes") + "\n")
        .collect()
}

/// Sidecar holding a JSON array of ids, used when the SMEB file has none.
pub fn ids_sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".ids.json");
    PathBuf::from(s)
}

/// Video embeddings with ids from the SMEB trailer or the sidecar.
pub fn load_video_embeddings(path: &Path) -> Result<Vec<(String, Embedding)>> {
    let m = SmebMatrix::load(path)?;
    let ids = match m.ids.clone() {
        Some(ids) => ids,
        None => {
            let side = ids_sidecar(path);
            let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
            let ids: Vec<String> = serde_json::from_str(&text)?;
            if ids.len() != m.count() {
                return Err(Error::format("video ids", format!("{} ids for {} rows", ids.len(), m.count())));
            }
            ids
        }
    };
    ids.into_iter().enumerate().map(|(i, id)| Ok((id, Embedding::new(m.row(i).to_vec())?))).collect()
}

pub fn ground_truth(rows: &[CaptionRow]) -> GroundTruth {
    let mut gt = GroundTruth::new();
    for r in rows {
        gt.entry(r.video_id.clone()).or_default().push(r.caption_id.clone());
    }
    gt
}

/// Embeds captions and summarizes gated transcripts. Warnings from videos
/// whose summary came back empty are returned in video order.
pub fn prepare_corpus(
    videos: &[(String, Embedding)],
    captions: &[CaptionRow],
    transcripts: &BTreeMap<String, String>,
    adapters: &AdapterSet,
    cfg: &V2tConfig,
) -> Result<(Vec<VideoRecord>, Vec<CaptionRecord>, Vec<String>)> {
    let (lm, embedder, vlm) = (adapters.lm()?, adapters.embedder()?, adapters.vlm()?);
    let caps = captions.par_iter().map(|c| CaptionRecord::embed(&c.caption_id, &c.text, vlm, embedder)).collect::<Result<Vec<_>>>()?;
    let prepared = videos
        .par_iter()
        .map(|(id, visual)| prepare_video(id, visual.clone(), transcripts.get(id).cloned(), lm, embedder, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    let vids = prepared
        .into_iter()
        .map(|(v, w)| {
            warnings.extend(w);
            v
        })
        .collect();
    Ok((vids, caps, warnings))
}

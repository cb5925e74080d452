use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fusion::{rank_of, score_row};
use super::records::{passes_gate, CaptionRecord, VideoRecord};
use crate::error::{Error, Result};

pub const DEFAULT_KS: [usize; 3] = [1, 5, 10];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetrievalMetrics {
    /// k → percentage of queries with rank ≤ k.
    pub r_at: BTreeMap<usize, f64>,
    #[serde(rename = "mdr")]
    pub median_rank: f64,
    pub n_queries: usize,
    pub n_fused: usize,
}

/// R@k as percentages and the median rank (mean of the middle two for an
/// even count).
pub fn metrics_from_ranks(ranks: &[usize], ks: &[usize], n_fused: usize) -> Result<RetrievalMetrics> {
    if ranks.is_empty() {
        return Err(Error::Empty("ranks"));
    }
    if ranks.contains(&0) {
        return Err(Error::Precondition("ranks are 1-based".into()));
    }
    let n = ranks.len();
    let r_at = ks.iter().map(|&k| (k, 100.0 * ranks.iter().filter(|&&r| r <= k).count() as f64 / n as f64)).collect();
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    let median_rank = if n % 2 == 1 { sorted[n / 2] as f64 } else { (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0 };
    Ok(RetrievalMetrics { r_at, median_rank, n_queries: n, n_fused })
}

/// Video id → ids of its reference captions.
pub type GroundTruth = HashMap<String, Vec<String>>;

/// Best rank of each video's reference captions.
pub fn video_ranks(videos: &[VideoRecord], captions: &[CaptionRecord], truth: &GroundTruth) -> Result<Vec<usize>> {
    let by_id: HashMap<&str, usize> = captions.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
    videos
        .par_iter()
        .map(|v| {
            let refs = truth.get(&v.id).filter(|r| !r.is_empty()).ok_or_else(|| Error::format("ground truth", format!("no caption for video {}", v.id)))?;
            let targets = refs
                .iter()
                .map(|id| by_id.get(id.as_str()).copied().ok_or_else(|| Error::format("ground truth", format!("caption {id} not in pool"))))
                .collect::<Result<Vec<_>>>()?;
            let scores = score_row(v, captions)?;
            Ok(targets.into_iter().map(|t| rank_of(&scores, captions, t)).min().expect("nonempty"))
        })
        .collect()
}

pub fn evaluate(videos: &[VideoRecord], captions: &[CaptionRecord], truth: &GroundTruth, ks: &[usize]) -> Result<RetrievalMetrics> {
    if videos.is_empty() {
        return Err(Error::Empty("videos"));
    }
    let ranks = video_ranks(videos, captions, truth)?;
    metrics_from_ranks(&ranks, ks, videos.iter().filter(|v| v.is_fused()).count())
}

/// [`evaluate`] restricted to videos whose transcript passes the gate.
pub fn evaluate_subset_long_transcript(
    videos: &[VideoRecord],
    captions: &[CaptionRecord],
    truth: &GroundTruth,
    ks: &[usize],
    gate_chars: usize,
) -> Result<RetrievalMetrics> {
    let subset: Vec<VideoRecord> = videos.iter().filter(|v| passes_gate(v.transcript.as_deref(), gate_chars)).cloned().collect();
    if subset.is_empty() {
        return Err(Error::Empty("long-transcript subset"));
    }
    evaluate(&subset, captions, truth, ks)
}

use std::cmp::Ordering;

use rayon::prelude::*;

use super::records::{CaptionRecord, VideoRecord};
use crate::error::Result;
use crate::foundation::cosine_score;

/// Visual cosine, times the summary/caption sentence cosine on the fused
/// path. Factors are used as-is, so two negatives multiply to a positive.
pub fn fused_score(video: &VideoRecord, caption: &CaptionRecord) -> Result<f64> {
    let visual = cosine_score(&caption.vlm_embedding, &video.visual)?;
    match &video.summary_embedding {
        Some(s) => Ok(visual * cosine_score(&caption.sentence_embedding, s)?),
        None => Ok(visual),
    }
}

/// Score descending, then caption id ascending.
pub fn caption_order(a: (f64, &str), b: (f64, &str)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

pub fn score_row(video: &VideoRecord, captions: &[CaptionRecord]) -> Result<Vec<f64>> {
    captions.iter().map(|c| fused_score(video, c)).collect()
}

/// `videos × captions` fused scores, rows computed in parallel.
pub fn score_matrix(videos: &[VideoRecord], captions: &[CaptionRecord]) -> Result<Vec<Vec<f64>>> {
    videos.par_iter().map(|v| score_row(v, captions)).collect()
}

/// Caption indices from best to worst for one video.
pub fn rank_captions_for_video(video: &VideoRecord, captions: &[CaptionRecord]) -> Result<Vec<usize>> {
    let scores = score_row(video, captions)?;
    let mut order: Vec<usize> = (0..captions.len()).collect();
    order.sort_by(|&a, &b| caption_order((scores[a], &captions[a].id), (scores[b], &captions[b].id)));
    Ok(order)
}

/// 1-based rank of caption `target` under [`caption_order`].
pub fn rank_of(scores: &[f64], captions: &[CaptionRecord], target: usize) -> usize {
    let t = (scores[target], captions[target].id.as_str());
    1 + (0..captions.len()).filter(|&j| j != target && caption_order((scores[j], &captions[j].id), t) == Ordering::Less).count()
}

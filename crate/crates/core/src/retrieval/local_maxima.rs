use crate::error::{Error, Result};

/// Indices of the `n` highest local maxima of `scores`.
///
/// An equal-valued run `a..=b` is a local maximum when its value is ≥ every
/// score within `window` positions of the run and strictly above the smallest
/// of them; it counts once, at `a`. Results are ordered by score descending,
/// earlier index first on ties. When no position qualifies (e.g. constant
/// input) the global argmax is returned alone.
pub fn top_n_local_maxima(scores: &[f64], n: usize, window: usize) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(Error::Empty("score sequence"));
    }
    if n == 0 || window == 0 {
        return Err(Error::Precondition("n and window must be at least 1".into()));
    }
    let len = scores.len();
    let mut peaks = Vec::new();
    let mut a = 0;
    while a < len {
        let s = scores[a];
        let mut b = a;
        while b + 1 < len && scores[b + 1] == s {
            b += 1;
        }
        let hood = &scores[a.saturating_sub(window)..=(b + window).min(len - 1)];
        let min = hood.iter().copied().fold(f64::INFINITY, f64::min);
        if hood.iter().all(|&u| s >= u) && s > min {
            peaks.push(a);
        }
        a = b + 1;
    }
    if peaks.is_empty() {
        let best = (0..len).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });
        return Ok(vec![best]);
    }
    peaks.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    peaks.truncate(n);
    Ok(peaks)
}

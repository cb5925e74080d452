use rayon::prelude::*;

use super::keys::{top_k, Hit, KeyMatrix};
use crate::error::{Error, Result};
use crate::foundation::embedding::check_dim;

const PAR_THRESHOLD: usize = 4096;

/// Dot product of `query` with every key, in key order.
pub fn score_all(query: &[f32], keys: &KeyMatrix) -> Result<Vec<f64>> {
    check_dim(keys.dim(), query.len())?;
    let n = keys.count();
    Ok(if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(|i| keys.dot_row(i, query)).collect()
    } else {
        (0..n).map(|i| keys.dot_row(i, query)).collect()
    })
}

/// Exact maximum-inner-product search by linear scan.
pub fn mips_exact(query: &[f32], keys: &KeyMatrix, k: usize) -> Result<Vec<Hit>> {
    if k == 0 || k > keys.count() {
        return Err(Error::Precondition(format!("k={k} must be in 1..={}", keys.count())));
    }
    let scores = score_all(query, keys)?;
    let hits = scores.into_iter().enumerate().map(|(index, score)| Hit { index, score }).collect();
    Ok(top_k(hits, k))
}

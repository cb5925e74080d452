use std::collections::HashMap;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::keys::{top_k, Hit, KeyMatrix};
use crate::error::{Error, Result};
use crate::foundation::embedding::{check_dim, dot, l2};
use crate::seed::seeded_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LshParams {
    /// Number of hash tables.
    pub tables: usize,
    /// Bits per code, at most 64.
    pub bits: usize,
    /// Hamming radius probed around the query's code.
    pub probe_radius: usize,
    pub seed: u64,
}

impl Default for LshParams {
    fn default() -> Self {
        Self { tables: 16, bits: 12, probe_radius: 1, seed: 0 }
    }
}

/// Signed-random-projection LSH over a key matrix.
///
/// Unnormalized keys are lifted to the unit sphere with
/// `x ↦ (x, √(M² − ‖x‖²)) / M`, `M` the largest key norm, so that angular
/// buckets respect inner-product order; queries are lifted as `(q, 0)`.
#[derive(Clone, Debug)]
pub struct SrpLshIndex {
    params: LshParams,
    keys: KeyMatrix,
    /// Largest key norm when the lift is active.
    lift: Option<f64>,
    hash_dim: usize,
    /// `tables × bits` rows of length `hash_dim`.
    projections: Vec<f32>,
    buckets: Vec<HashMap<u64, Vec<u32>>>,
}

/// Query outcome including the candidate-set size before re-ranking.
#[derive(Clone, Debug, PartialEq)]
pub struct LshResult {
    pub hits: Vec<Hit>,
    pub candidates: usize,
}

/// Row-major `rows × dim` standard normal matrix from a seed and a tag.
pub fn gaussian_matrix(tag: &[u8], seed: u64, rows: usize, dim: usize) -> Vec<f32> {
    let mut rng = seeded_rng(&[tag, &seed.to_le_bytes(), &(rows as u64).to_le_bytes(), &(dim as u64).to_le_bytes()]);
    (0..rows * dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

impl SrpLshIndex {
    pub fn build(keys: &KeyMatrix, params: LshParams) -> Result<Self> {
        if params.bits == 0 || params.bits > 64 {
            return Err(Error::Precondition(format!("bits={} must be in 1..=64", params.bits)));
        }
        if params.tables == 0 {
            return Err(Error::Precondition("at least one table is required".into()));
        }
        let lift = (!keys.is_unit()).then(|| keys.max_norm());
        let hash_dim = keys.dim() + usize::from(lift.is_some());
        let projections = gaussian_matrix(b"srp", params.seed, params.tables * params.bits, hash_dim);
        let mut index = Self { params, keys: keys.clone(), lift, hash_dim, projections, buckets: Vec::new() };
        let codes: Vec<Vec<u64>> = (0..keys.count())
            .into_par_iter()
            .map(|i| {
                let x = index.lift_key(keys.row(i));
                (0..params.tables).map(|t| index.code(t, &x).0).collect()
            })
            .collect();
        index.buckets = (0..params.tables)
            .map(|t| {
                let mut table: HashMap<u64, Vec<u32>> = HashMap::new();
                for (i, c) in codes.iter().enumerate() {
                    table.entry(c[t]).or_default().push(i as u32);
                }
                table
            })
            .collect();
        Ok(index)
    }

    pub fn params(&self) -> LshParams {
        self.params
    }

    pub fn keys(&self) -> &KeyMatrix {
        &self.keys
    }

    pub fn projections(&self) -> &[f32] {
        &self.projections
    }

    pub fn hash_dim(&self) -> usize {
        self.hash_dim
    }

    pub fn is_lifted(&self) -> bool {
        self.lift.is_some()
    }

    pub fn buckets(&self, table: usize) -> &HashMap<u64, Vec<u32>> {
        &self.buckets[table]
    }

    fn lift_key(&self, x: &[f32]) -> Vec<f32> {
        match self.lift {
            None => x.to_vec(),
            Some(m) => {
                let n2 = dot(x, x);
                let mut v: Vec<f32> = x.iter().map(|&a| (a as f64 / m) as f32).collect();
                v.push(((m * m - n2).max(0.0).sqrt() / m) as f32);
                v
            }
        }
    }

    fn lift_query(&self, q: &[f32]) -> Vec<f32> {
        let mut v = q.to_vec();
        if self.lift.is_some() {
            v.push(0.0);
        }
        v
    }

    /// Code and per-bit margins `|pⱼ·x|` in table `t`; bit j is set iff pⱼ·x > 0.
    fn code(&self, t: usize, x: &[f32]) -> (u64, Vec<f64>) {
        let b = self.params.bits;
        let mut code = 0u64;
        let mut margins = Vec::with_capacity(b);
        for j in 0..b {
            let row = (t * b + j) * self.hash_dim;
            let p = dot(&self.projections[row..row + self.hash_dim], x);
            if p > 0.0 {
                code |= 1 << j;
            }
            margins.push(p.abs());
        }
        (code, margins)
    }

    /// Codes of `x` in every table (lifted as a key would be).
    pub fn key_codes(&self, x: &[f32]) -> Result<Vec<u64>> {
        check_dim(self.keys.dim(), x.len())?;
        let x = self.lift_key(x);
        Ok((0..self.params.tables).map(|t| self.code(t, &x).0).collect())
    }

    /// Codes of a query in every table.
    pub fn query_codes(&self, q: &[f32]) -> Result<Vec<u64>> {
        check_dim(self.keys.dim(), q.len())?;
        let q = self.lift_query(q);
        Ok((0..self.params.tables).map(|t| self.code(t, &q).0).collect())
    }

    pub fn query(&self, q: &[f32], k: usize) -> Result<Vec<Hit>> {
        Ok(self.query_with(q, k, self.params.probe_radius)?.hits)
    }

    /// Multi-probe query: buckets within Hamming distance `radius` of the
    /// query code in each table, probed in order of increasing flipped
    /// margin, then exact re-ranking of the union.
    pub fn query_with(&self, q: &[f32], k: usize, radius: usize) -> Result<LshResult> {
        check_dim(self.keys.dim(), q.len())?;
        if k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        if l2(q) == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let lifted = self.lift_query(q);
        let mut seen = vec![false; self.keys.count()];
        let mut hits = Vec::new();
        for t in 0..self.params.tables {
            let (code, margins) = self.code(t, &lifted);
            for flips in probe_sequence(&margins, radius) {
                let probe = flips.iter().fold(code, |c, &j| c ^ (1 << j));
                if let Some(bucket) = self.buckets[t].get(&probe) {
                    for &i in bucket {
                        let i = i as usize;
                        if !seen[i] {
                            seen[i] = true;
                            hits.push(Hit { index: i, score: self.keys.dot_row(i, q) });
                        }
                    }
                }
            }
        }
        let candidates = hits.len();
        Ok(LshResult { hits: top_k(hits, k), candidates })
    }
}

/// Bit subsets of size ≤ `radius`, ordered by total flipped margin, then
/// lexicographically.
pub fn probe_sequence(margins: &[f64], radius: usize) -> Vec<Vec<usize>> {
    let b = margins.len();
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&x, &y| margins[x].total_cmp(&margins[y]).then(x.cmp(&y)));
    let mut out: Vec<(f64, Vec<usize>)> = vec![(0.0, vec![])];
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..radius.min(b) {
        let mut next = Vec::new();
        for set in &frontier {
            let start = set.last().map_or(0, |&p| p + 1);
            for pos in start..b {
                let mut s = set.clone();
                s.push(pos);
                next.push(s);
            }
        }
        for s in &next {
            let bits: Vec<usize> = s.iter().map(|&p| order[p]).collect();
            let cost = bits.iter().map(|&j| margins[j]).sum();
            out.push((cost, bits));
        }
        frontier = next;
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out.into_iter().map(|(_, s)| s).collect()
}

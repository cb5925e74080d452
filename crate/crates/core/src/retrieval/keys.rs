use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::embedding::{check_dim, dot, l2, Embedding};
use crate::foundation::smeb::SmebMatrix;

/// Row-major `count × dim` key matrix; immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyMatrix {
    dim: usize,
    data: Vec<f32>,
    ids: Option<Vec<String>>,
}

/// One scored key.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub index: usize,
    pub score: f64,
}

impl KeyMatrix {
    pub fn new(dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("key dim must be positive".into()));
        }
        if data.is_empty() {
            return Err(Error::Empty("key matrix"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: data.len() % dim });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { dim, data, ids: None })
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.count() {
            return Err(Error::Precondition(format!("{} ids for {} keys", ids.len(), self.count())));
        }
        self.ids = Some(ids);
        Ok(self)
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().ok_or(Error::Empty("key matrix"))?.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            check_dim(dim, r.as_ref().len())?;
            data.extend_from_slice(r.as_ref());
        }
        Self::new(dim, data)
    }

    pub fn from_embeddings(rows: &[Embedding]) -> Result<Self> {
        let rows: Vec<&[f32]> = rows.iter().map(Embedding::values).collect();
        Self::from_rows(&rows)
    }

    pub fn from_smeb(m: SmebMatrix) -> Result<Self> {
        let keys = Self::new(m.dim, m.data)?;
        match m.ids {
            Some(ids) => keys.with_ids(ids),
            None => Ok(keys),
        }
    }

    pub fn to_smeb(&self) -> SmebMatrix {
        SmebMatrix { dim: self.dim, data: self.data.clone(), ids: self.ids.clone() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    pub fn id(&self, i: usize) -> Option<&str> {
        self.ids.as_ref().map(|v| v[i].as_str())
    }

    pub fn dot_row(&self, i: usize, q: &[f32]) -> f64 {
        dot(self.row(i), q)
    }

    pub fn max_norm(&self) -> f64 {
        self.rows().map(l2).fold(0.0, f64::max)
    }

    /// True when every row has unit norm within 1e-4.
    pub fn is_unit(&self) -> bool {
        self.rows().all(|r| (l2(r) - 1.0).abs() <= 1e-4)
    }
}

/// Score descending, then index ascending.
pub fn hit_order(a: &Hit, b: &Hit) -> std::cmp::Ordering {
    b.score.total_cmp(&a.score).then(a.index.cmp(&b.index))
}

/// Top `k` of `hits` under [`hit_order`], sorted.
pub fn top_k(mut hits: Vec<Hit>, k: usize) -> Vec<Hit> {
    if k < hits.len() {
        hits.select_nth_unstable_by(k, hit_order);
        hits.truncate(k);
    }
    hits.sort_by(hit_order);
    hits
}

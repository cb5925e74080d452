use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-4;

/// Fixed-dimension vector in a shared similarity space.
///
/// Values are stored as `f32`; every reduction accumulates in `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f32>", into = "Vec<f32>")]
pub struct Embedding {
    values: Vec<f32>,
    normalized: bool,
}

impl Embedding {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("embedding"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let n = l2(&values);
        Ok(Self { normalized: (n - 1.0).abs() <= NORM_TOL, values })
    }

    /// Builds a unit vector; fails on zero norm.
    pub fn normalized(values: Vec<f32>) -> Result<Self> {
        Self::new(values)?.normalize()
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| v as f32).collect())
    }

    pub fn normalize(self) -> Result<Self> {
        if self.normalized {
            return Ok(self);
        }
        let n = l2(&self.values);
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let values = self.values.iter().map(|&v| (v as f64 / n) as f32).collect();
        Ok(Self { values, normalized: true })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        l2(&self.values)
    }

    pub fn dot(&self, other: &Embedding) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(dot(&self.values, &other.values))
    }

    /// Arithmetic mean of equal-dimension vectors, normalized.
    pub fn mean(items: &[Embedding]) -> Result<Embedding> {
        let first = items.first().ok_or(Error::Empty("embedding list"))?;
        let mut acc = vec![0f64; first.dim()];
        for e in items {
            check_dim(first.dim(), e.dim())?;
            for (a, &v) in acc.iter_mut().zip(&e.values) {
                *a += v as f64;
            }
        }
        let n = items.len() as f64;
        Embedding::from_f64(&acc.iter().map(|a| a / n).collect::<Vec<_>>())?.normalize()
    }
}

impl TryFrom<Vec<f32>> for Embedding {
    type Error = Error;
    fn try_from(values: Vec<f32>) -> Result<Self> {
        Embedding::new(values)
    }
}

impl From<Embedding> for Vec<f32> {
    fn from(e: Embedding) -> Self {
        e.values
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

#[inline]
pub fn l2(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity, clamped to [-1, 1] against rounding.
pub fn cosine_score(a: &Embedding, b: &Embedding) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(&a.values, &b.values) / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn e(v: &[f32]) -> Embedding {
        Embedding::new(v.to_vec()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let v = e(&[0.3, -1.2, 4.0]);
        assert_abs_diff_eq!(cosine_score(&v, &v).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(cosine_score(&e(&[1.0, 0.0]), &e(&[0.0, 1.0])).unwrap(), 0.0);
        // 1*2 + 2*1 + 2*2 = 8 over norms 3 * 3
        let c = cosine_score(&e(&[1.0, 2.0, 2.0]), &e(&[2.0, 1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(c, 8.0 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine_score(&e(&[1.0]), &e(&[1.0, 0.0])),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
        assert!(matches!(cosine_score(&e(&[0.0, 0.0]), &e(&[1.0, 0.0])), Err(Error::ZeroNorm)));
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(Embedding::new(vec![1.0, f32::NAN]), Err(Error::NonFinite(1))));
        assert!(Embedding::new(vec![]).is_err());
    }

    #[test]
    fn normalize_sets_flag() {
        let n = e(&[3.0, 4.0]).normalize().unwrap();
        assert!(n.is_normalized());
        assert_abs_diff_eq!(n.norm(), 1.0, epsilon = 1e-6);
        assert!(!e(&[3.0, 4.0]).is_normalized());
    }

    #[test]
    fn serde_roundtrip_is_plain_array() {
        let v = e(&[0.1, 0.2]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[0.1,0.2]");
        assert_eq!(serde_json::from_str::<Embedding>(&s).unwrap(), v);
    }
}

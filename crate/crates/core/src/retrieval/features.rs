use serde::{Deserialize, Serialize};

use super::lsh::gaussian_matrix;
use crate::error::{Error, Result};
use crate::foundation::embedding::{check_dim, dot};

/// Positive random features for the softmax kernel `exp(x·y)`.
///
/// `φ(x) = m^{-1/2} · exp(−‖x‖²/2) · (exp(w₁·x), …, exp(w_m·x))` with rows
/// `wᵢ ~ N(0, I)` drawn from a seed, so `E[φ(x)·φ(y)] = exp(x·y)` and every
/// coordinate is strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomFeatureMap {
    m: usize,
    dim: usize,
    seed: u64,
    w: Vec<f32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureParams {
    pub features: usize,
    pub seed: u64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self { features: 4096, seed: 0 }
    }
}

impl RandomFeatureMap {
    pub fn new(dim: usize, params: FeatureParams) -> Result<Self> {
        if dim == 0 || params.features == 0 {
            return Err(Error::Precondition("feature map needs positive dim and feature count".into()));
        }
        let w = gaussian_matrix(b"favor+", params.seed, params.features, dim);
        Ok(Self { m: params.features, dim, seed: params.seed, w })
    }

    pub fn features(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> FeatureParams {
        FeatureParams { features: self.m, seed: self.seed }
    }

    /// Projection matrix, `m × dim` row-major.
    pub fn matrix(&self) -> &[f32] {
        &self.w
    }

    pub fn same_as(&self, other: &RandomFeatureMap) -> bool {
        self.m == other.m && self.dim == other.dim && self.seed == other.seed
    }

    /// `φ(x)`; fails if an exponent overflows.
    pub fn apply(&self, x: &[f32]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        let half_sq = dot(x, x) / 2.0;
        let scale = (self.m as f64).sqrt().recip();
        let phi: Vec<f64> = self
            .w
            .chunks_exact(self.dim)
            .map(|row| scale * (dot(row, x) - half_sq).exp())
            .collect();
        if let Some(i) = phi.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(phi)
    }

    /// Unbiased estimate of `exp(x·y)`.
    pub fn kernel_estimate(&self, x: &[f32], y: &[f32]) -> Result<f64> {
        let (a, b) = (self.apply(x)?, self.apply(y)?);
        Ok(dot64(&a, &b))
    }
}

#[inline]
pub fn dot64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

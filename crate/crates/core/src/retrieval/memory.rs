use super::features::{dot64, RandomFeatureMap};
use super::keys::KeyMatrix;
use crate::error::{Error, Result};
use crate::foundation::embedding::{check_dim, dot};

/// All stored patterns folded into one feature-space vector `S = Σᵢ φ(kᵢ)`.
///
/// `S` has exactly `m` coordinates whatever the number of patterns.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedMemory {
    map: RandomFeatureMap,
    summary: Vec<f64>,
    patterns: usize,
}

/// Arithmetic operations spent on one energy query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpCount {
    pub multiply_adds: usize,
}

impl CompressedMemory {
    pub fn empty(map: RandomFeatureMap) -> Self {
        let m = map.features();
        Self { map, summary: vec![0.0; m], patterns: 0 }
    }

    pub fn store(keys: &KeyMatrix, map: RandomFeatureMap) -> Result<Self> {
        let mut mem = Self::empty(map);
        for row in keys.rows() {
            mem.insert(row)?;
        }
        Ok(mem)
    }

    pub fn insert(&mut self, key: &[f32]) -> Result<()> {
        let phi = self.map.apply(key)?;
        for (s, p) in self.summary.iter_mut().zip(phi) {
            *s += p;
        }
        self.patterns += 1;
        Ok(())
    }

    /// Memory of the union of both pattern sets; requires the same feature map.
    pub fn merge(&self, other: &CompressedMemory) -> Result<CompressedMemory> {
        if !self.map.same_as(&other.map) {
            return Err(Error::Precondition("memories use different feature maps".into()));
        }
        let summary = self.summary.iter().zip(&other.summary).map(|(a, b)| a + b).collect();
        Ok(Self { map: self.map.clone(), summary, patterns: self.patterns + other.patterns })
    }

    pub fn summary(&self) -> &[f64] {
        &self.summary
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns
    }

    pub fn feature_map(&self) -> &RandomFeatureMap {
        &self.map
    }

    /// `Ê(q) = −φ(q)·S`.
    pub fn energy(&self, query: &[f32]) -> Result<f64> {
        Ok(self.energy_counted(query)?.0)
    }

    /// Energy plus the work done: `m·dim` for `φ(q)` and `m` for the dot
    /// product, none of it depending on the pattern count.
    pub fn energy_counted(&self, query: &[f32]) -> Result<(f64, OpCount)> {
        if self.patterns == 0 {
            return Err(Error::Empty("compressed memory"));
        }
        let phi = self.map.apply(query)?;
        let m = self.map.features();
        let ops = OpCount { multiply_adds: m * self.map.dim() + m };
        Ok((-dot64(&phi, &self.summary), ops))
    }
}

/// `E(q) = −Σᵢ exp(q·kᵢ)` by direct summation.
pub fn exact_energy(keys: &KeyMatrix, query: &[f32]) -> Result<f64> {
    check_dim(keys.dim(), query.len())?;
    Ok(-keys.rows().map(|k| dot(k, query).exp()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::super::features::FeatureParams;
    use super::*;

    fn map() -> RandomFeatureMap {
        RandomFeatureMap::new(3, FeatureParams { features: 128, seed: 2 }).unwrap()
    }

    #[test]
    fn empty_memory_has_no_energy() {
        assert!(matches!(CompressedMemory::empty(map()).energy(&[0.; 3]), Err(Error::Empty(_))));
    }

    #[test]
    fn store_is_additive() {
        let a = KeyMatrix::new(3, vec![0.1, 0.2, 0.3, -0.5, 0.0, 0.5]).unwrap();
        let b = KeyMatrix::new(3, vec![0.7, -0.1, 0.0]).unwrap();
        let both = KeyMatrix::new(3, [a.data(), b.data()].concat()).unwrap();
        let merged = CompressedMemory::store(&a, map()).unwrap().merge(&CompressedMemory::store(&b, map()).unwrap()).unwrap();
        let direct = CompressedMemory::store(&both, map()).unwrap();
        assert_eq!(merged.pattern_count(), 3);
        for (x, y) in merged.summary().iter().zip(direct.summary()) {
            assert!((x - y).abs() <= 1e-12 * y.abs());
        }
    }

    #[test]
    fn op_count_ignores_pattern_count() {
        let small = KeyMatrix::new(3, vec![0.1; 3]).unwrap();
        let large = KeyMatrix::new(3, vec![0.1; 300]).unwrap();
        let q = [0.2, 0.1, 0.0];
        let (_, a) = CompressedMemory::store(&small, map()).unwrap().energy_counted(&q).unwrap();
        let (_, b) = CompressedMemory::store(&large, map()).unwrap().energy_counted(&q).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.multiply_adds, 128 * 3 + 128);
    }
}

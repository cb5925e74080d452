use rand::Rng;

use super::features::{dot64, RandomFeatureMap};
use super::keys::KeyMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
struct Node {
    sum: Vec<f64>,
    lo: usize,
    hi: usize,
    children: Option<(usize, usize)>,
}

/// Balanced binary tree over the feature vectors of the keys.
///
/// Leaves hold `φ(kᵢ)`; each internal node holds the sum of its two
/// children. Sampling descends from the root choosing a child with
/// probability proportional to `φ(q)·S_child`, which draws key `i` with
/// probability `φ(q)·φ(kᵢ) / Σⱼ φ(q)·φ(kⱼ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomFeatureTree {
    map: RandomFeatureMap,
    nodes: Vec<Node>,
    count: usize,
}

/// A draw plus the number of tree nodes it touched.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Draw {
    pub index: usize,
    pub visits: usize,
}

impl RandomFeatureTree {
    pub fn build(keys: &KeyMatrix, map: RandomFeatureMap) -> Result<Self> {
        if keys.dim() != map.dim() {
            return Err(Error::DimensionMismatch { expected: map.dim(), got: keys.dim() });
        }
        let leaves = keys.rows().map(|r| map.apply(r)).collect::<Result<Vec<_>>>()?;
        let mut nodes = Vec::with_capacity(2 * leaves.len());
        build_node(&mut nodes, &leaves, 0, leaves.len());
        Ok(Self { map, nodes, count: leaves.len() })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn feature_map(&self) -> &RandomFeatureMap {
        &self.map
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Node sums in build order, each of length `m`.
    pub fn node_sums(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.iter().map(|n| n.sum.as_slice())
    }

    /// Root-to-leaf edge count of the deepest leaf.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i].children {
                None => 0,
                Some((l, r)) => 1 + walk(nodes, l).max(walk(nodes, r)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Largest relative gap between a node sum and the sum of its children.
    pub fn max_sum_defect(&self) -> f64 {
        self.nodes
            .iter()
            .filter_map(|n| n.children.map(|c| (n, c)))
            .flat_map(|(n, (l, r))| {
                n.sum.iter().zip(&self.nodes[l].sum).zip(&self.nodes[r].sum).map(|((s, a), b)| {
                    let expect = a + b;
                    (s - expect).abs() / expect.abs().max(f64::MIN_POSITIVE)
                })
            })
            .fold(0.0, f64::max)
    }

    /// Largest relative gap between a node sum and the direct sum of its leaves.
    pub fn max_leaf_sum_defect(&self) -> f64 {
        let leaf_of: Vec<&Node> = {
            let mut v: Vec<&Node> = self.nodes.iter().filter(|n| n.children.is_none()).collect();
            v.sort_by_key(|n| n.lo);
            v
        };
        self.nodes
            .iter()
            .map(|n| {
                let m = n.sum.len();
                (0..m)
                    .map(|j| {
                        let direct: f64 = leaf_of[n.lo..n.hi].iter().map(|l| l.sum[j]).sum();
                        (n.sum[j] - direct).abs() / direct.abs().max(f64::MIN_POSITIVE)
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    pub fn sample<R: Rng + ?Sized>(&self, query: &[f32], rng: &mut R) -> Result<usize> {
        Ok(self.sample_counted(query, rng)?.index)
    }

    pub fn sample_counted<R: Rng + ?Sized>(&self, query: &[f32], rng: &mut R) -> Result<Draw> {
        let phi = self.map.apply(query)?;
        Ok(self.descend(&phi, rng))
    }

    /// `n` draws sharing one evaluation of `φ(q)`.
    pub fn sample_many<R: Rng + ?Sized>(&self, query: &[f32], n: usize, rng: &mut R) -> Result<Vec<Draw>> {
        let phi = self.map.apply(query)?;
        Ok((0..n).map(|_| self.descend(&phi, rng)).collect())
    }

    fn descend<R: Rng + ?Sized>(&self, phi: &[f64], rng: &mut R) -> Draw {
        let mut visits = 1;
        let mut at = 0;
        while let Some((l, r)) = self.nodes[at].children {
            let wl = dot64(phi, &self.nodes[l].sum);
            let wr = dot64(phi, &self.nodes[r].sum);
            let u: f64 = rng.random::<f64>() * (wl + wr);
            at = if u < wl { l } else { r };
            visits += 1;
        }
        Draw { index: self.nodes[at].lo, visits }
    }

    /// Closed-form law `P(i) = φ(q)·φ(kᵢ) / Σⱼ φ(q)·φ(kⱼ)`.
    pub fn distribution_exact(&self, query: &[f32]) -> Result<Vec<f64>> {
        let phi = self.map.apply(query)?;
        let mut w = vec![0.0; self.count];
        for n in self.nodes.iter().filter(|n| n.children.is_none()) {
            w[n.lo] = dot64(&phi, &n.sum);
        }
        let total: f64 = w.iter().sum();
        Ok(w.into_iter().map(|x| x / total).collect())
    }

    /// Probability of reaching leaf `i` as the product of branch choices.
    pub fn path_probability(&self, query: &[f32], index: usize) -> Result<f64> {
        if index >= self.count {
            return Err(Error::Precondition(format!("index {index} out of range")));
        }
        let phi = self.map.apply(query)?;
        let mut at = 0;
        let mut p = 1.0;
        while let Some((l, r)) = self.nodes[at].children {
            let wl = dot64(&phi, &self.nodes[l].sum);
            let wr = dot64(&phi, &self.nodes[r].sum);
            let go_left = index < self.nodes[l].hi;
            p *= if go_left { wl } else { wr } / (wl + wr);
            at = if go_left { l } else { r };
        }
        Ok(p)
    }
}

/// Appends the subtree over `leaves[lo..hi]`, returning its node id. The
/// left half takes the extra leaf, so depth is ⌈log₂ n⌉.
fn build_node(nodes: &mut Vec<Node>, leaves: &[Vec<f64>], lo: usize, hi: usize) -> usize {
    let id = nodes.len();
    nodes.push(Node { sum: Vec::new(), lo, hi, children: None });
    if hi - lo == 1 {
        nodes[id].sum = leaves[lo].clone();
        return id;
    }
    let mid = lo + (hi - lo).div_ceil(2);
    let l = build_node(nodes, leaves, lo, mid);
    let r = build_node(nodes, leaves, mid, hi);
    nodes[id].sum = nodes[l].sum.iter().zip(&nodes[r].sum).map(|(a, b)| a + b).collect();
    nodes[id].children = Some((l, r));
    id
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

//! On-disk indexes: `meta.json` plus SMEB matrices.
//!
//! Every persisted structure is a deterministic function of the keys and
//! the build parameters. Loading rebuilds it and refuses files whose bytes
//! differ from the rebuild.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::exact::mips_exact;
use super::features::{FeatureParams, RandomFeatureMap};
use super::keys::{Hit, KeyMatrix};
use super::lsh::{LshParams, SrpLshIndex};
use super::memory::CompressedMemory;
use super::rft::RandomFeatureTree;
use crate::error::{Error, Result};
use crate::foundation::smeb::SmebMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Exact,
    Lsh,
    Mem,
    Rft,
}

impl FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Algo::Exact),
            "lsh" => Ok(Algo::Lsh),
            "mem" => Ok(Algo::Mem),
            "rft" => Ok(Algo::Rft),
            other => Err(Error::Precondition(format!("unknown algo {other:?}; expected exact|lsh|mem|rft"))),
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Exact => "exact",
            Algo::Lsh => "lsh",
            Algo::Mem => "mem",
            Algo::Rft => "rft",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildParams {
    #[serde(default)]
    pub lsh: LshParams,
    #[serde(default)]
    pub features: FeatureParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexMeta {
    pub algo: Algo,
    pub params: serde_json::Value,
    pub seed: u64,
    pub dim: usize,
    pub count: usize,
}

#[derive(Clone, Debug)]
pub enum RetrievalIndex {
    Exact(KeyMatrix),
    Lsh(SrpLshIndex),
    Memory { keys: KeyMatrix, memory: CompressedMemory },
    Rft { keys: KeyMatrix, tree: RandomFeatureTree },
}

const META: &str = "meta.json";
const KEYS: &str = "keys.smeb";

impl RetrievalIndex {
    pub fn build(keys: &KeyMatrix, algo: Algo, params: &BuildParams) -> Result<Self> {
        Ok(match algo {
            Algo::Exact => RetrievalIndex::Exact(keys.clone()),
            Algo::Lsh => RetrievalIndex::Lsh(SrpLshIndex::build(keys, params.lsh)?),
            Algo::Mem => RetrievalIndex::Memory {
                keys: keys.clone(),
                memory: CompressedMemory::store(keys, RandomFeatureMap::new(keys.dim(), params.features)?)?,
            },
            Algo::Rft => RetrievalIndex::Rft {
                keys: keys.clone(),
                tree: RandomFeatureTree::build(keys, RandomFeatureMap::new(keys.dim(), params.features)?)?,
            },
        })
    }

    pub fn algo(&self) -> Algo {
        match self {
            RetrievalIndex::Exact(_) => Algo::Exact,
            RetrievalIndex::Lsh(_) => Algo::Lsh,
            RetrievalIndex::Memory { .. } => Algo::Mem,
            RetrievalIndex::Rft { .. } => Algo::Rft,
        }
    }

    pub fn keys(&self) -> &KeyMatrix {
        match self {
            RetrievalIndex::Exact(k) => k,
            RetrievalIndex::Lsh(i) => i.keys(),
            RetrievalIndex::Memory { keys, .. } | RetrievalIndex::Rft { keys, .. } => keys,
        }
    }

    /// Top-k by inner product; only exact and LSH indexes answer this.
    pub fn search(&self, query: &[f32], k: usize) -> Result<Vec<Hit>> {
        match self {
            RetrievalIndex::Exact(keys) => mips_exact(query, keys, k.min(keys.count())),
            RetrievalIndex::Lsh(i) => i.query(query, k),
            _ => Err(Error::Precondition(format!("{} index does not answer top-k queries", self.algo()))),
        }
    }

    fn meta(&self) -> IndexMeta {
        let keys = self.keys();
        let (params, seed) = match self {
            RetrievalIndex::Exact(_) => (serde_json::json!({}), 0),
            RetrievalIndex::Lsh(i) => (serde_json::to_value(i.params()).unwrap(), i.params().seed),
            RetrievalIndex::Memory { memory, .. } => {
                let p = memory.feature_map().params();
                (serde_json::to_value(p).unwrap(), p.seed)
            }
            RetrievalIndex::Rft { tree, .. } => {
                let p = tree.feature_map().params();
                (serde_json::to_value(p).unwrap(), p.seed)
            }
        };
        IndexMeta { algo: self.algo(), params, seed, dim: keys.dim(), count: keys.count() }
    }

    /// Derived matrices written next to the keys, by file name.
    fn artifacts(&self) -> Vec<(&'static str, SmebMatrix)> {
        let f32s = |v: &[f64]| v.iter().map(|&x| x as f32).collect::<Vec<f32>>();
        match self {
            RetrievalIndex::Exact(_) => vec![],
            RetrievalIndex::Lsh(i) => {
                vec![("projections.smeb", SmebMatrix { dim: i.hash_dim(), data: i.projections().to_vec(), ids: None })]
            }
            RetrievalIndex::Memory { memory, .. } => {
                let map = memory.feature_map();
                vec![
                    ("features.smeb", SmebMatrix { dim: map.dim(), data: map.matrix().to_vec(), ids: None }),
                    ("summary.smeb", SmebMatrix { dim: map.features(), data: f32s(memory.summary()), ids: None }),
                ]
            }
            RetrievalIndex::Rft { tree, .. } => {
                let map = tree.feature_map();
                let nodes: Vec<f32> = tree.node_sums().flat_map(f32s).collect();
                vec![
                    ("features.smeb", SmebMatrix { dim: map.dim(), data: map.matrix().to_vec(), ids: None }),
                    ("nodes.smeb", SmebMatrix { dim: map.features(), data: nodes, ids: None }),
                ]
            }
        }
    }

    /// Writes into a sibling temp directory, then renames it into place.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        let name = dir.file_name().ok_or_else(|| Error::Precondition(format!("bad index path {}", dir.display())))?;
        let tmp = parent.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
        if tmp.exists() {
            std::fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
        }
        std::fs::create_dir(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let meta = serde_json::to_string_pretty(&self.meta())? + "\n";
        write(&tmp.join(META), meta.as_bytes())?;
        write(&tmp.join(KEYS), &self.keys().to_smeb().to_bytes())?;
        for (file, m) in self.artifacts() {
            write(&tmp.join(file), &m.to_bytes())?;
        }
        let old: Option<PathBuf> = dir.exists().then(|| parent.join(format!(".{}.old-{}", name.to_string_lossy(), std::process::id())));
        if let Some(old) = &old {
            std::fs::rename(dir, old).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::rename(&tmp, dir).map_err(|e| Error::io(dir, e))?;
        if let Some(old) = old {
            std::fs::remove_dir_all(&old).map_err(|e| Error::io(&old, e))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let meta_path = dir.join(META);
        let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: IndexMeta = serde_json::from_str(&text)?;
        let keys = KeyMatrix::from_smeb(SmebMatrix::load(&dir.join(KEYS))?)?;
        if keys.dim() != meta.dim || keys.count() != meta.count {
            return Err(Error::format(meta_path.display().to_string(), "meta dim/count disagree with keys"));
        }
        let mut params = BuildParams::default();
        match meta.algo {
            Algo::Exact => {}
            Algo::Lsh => params.lsh = serde_json::from_value(meta.params.clone())?,
            Algo::Mem | Algo::Rft => params.features = serde_json::from_value(meta.params.clone())?,
        }
        let index = Self::build(&keys, meta.algo, &params)?;
        for (file, m) in index.artifacts() {
            let path = dir.join(file);
            let stored = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if stored != m.to_bytes() {
                return Err(Error::format(path.display().to_string(), "does not match deterministic rebuild from keys and seed"));
            }
        }
        Ok(index)
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

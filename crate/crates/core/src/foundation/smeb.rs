//! `SMEB` embedding corpus files.
//!
//! Layout (little-endian): `"SMEB"`, u32 version = 1, u32 dim, u64 count,
//! count × dim f32 row-major, then optionally a u64 byte length followed by a
//! UTF-8 JSON array of `count` string ids.

use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SMEB";
pub const VERSION: u32 = 1;
const HEADER: usize = 4 + 4 + 4 + 8;

#[derive(Clone, Debug, PartialEq)]
pub struct SmebMatrix {
    pub dim: usize,
    pub data: Vec<f32>,
    pub ids: Option<Vec<String>>,
}

impl SmebMatrix {
    pub fn new(dim: usize, data: Vec<f32>, ids: Option<Vec<String>>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::format("SMEB", format!("{} values do not form rows of dim {dim}", data.len())));
        }
        if let Some(ids) = &ids {
            if ids.len() != data.len() / dim {
                return Err(Error::format("SMEB", format!("{} ids for {} rows", ids.len(), data.len() / dim)));
            }
        }
        Ok(Self { dim, data, ids })
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER + self.data.len() * 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.count() as u64).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        if let Some(ids) = &self.ids {
            let json = serde_json::to_vec(ids).expect("string list serializes");
            out.extend_from_slice(&(json.len() as u64).to_le_bytes());
            out.extend_from_slice(&json);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| Error::format("SMEB", m);
        if bytes.len() < HEADER || &bytes[..4] != MAGIC {
            return Err(bad("missing SMEB magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let dim = u32_at(8) as usize;
        let count = u64_at(12) as usize;
        let body = count
            .checked_mul(dim)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| bad("size overflow".into()))?;
        let end = HEADER + body;
        if bytes.len() < end {
            return Err(bad(format!("truncated: need {end} bytes, have {}", bytes.len())));
        }
        let data = bytes[HEADER..end]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let rest = &bytes[end..];
        let ids = if rest.is_empty() {
            None
        } else {
            if rest.len() < 8 {
                return Err(bad("dangling bytes after matrix".into()));
            }
            let len = u64::from_le_bytes(rest[..8].try_into().unwrap()) as usize;
            if rest.len() != 8 + len {
                return Err(bad(format!("id block declares {len} bytes, has {}", rest.len() - 8)));
            }
            Some(serde_json::from_slice::<Vec<String>>(&rest[8..])?)
        };
        if dim == 0 {
            return Err(bad("dim must be positive".into()));
        }
        Self::new(dim, data, ids)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_exact() {
        let m = SmebMatrix::new(2, vec![1.0, -2.0], None).unwrap();
        let b = m.to_bytes();
        assert_eq!(&b[..4], b"SMEB");
        assert_eq!(&b[4..8], &[1, 0, 0, 0]);
        assert_eq!(&b[8..12], &[2, 0, 0, 0]);
        assert_eq!(&b[12..20], &[1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&b[20..24], &1.0f32.to_le_bytes());
        assert_eq!(b.len(), 28);
    }

    #[test]
    fn roundtrip_with_ids() {
        let m = SmebMatrix::new(1, vec![0.5, 0.25], Some(vec!["a".into(), "b".into()])).unwrap();
        let b = m.to_bytes();
        assert_eq!(SmebMatrix::from_bytes(&b).unwrap(), m);
        assert_eq!(&b[28..36], &9u64.to_le_bytes());
        assert_eq!(&b[36..], br#"["a","b"]"#);
    }

    #[test]
    fn rejects_corrupt_input() {
        let mut b = SmebMatrix::new(1, vec![1.0], None).unwrap().to_bytes();
        assert!(SmebMatrix::from_bytes(&b[..b.len() - 1]).is_err());
        b.push(0);
        assert!(SmebMatrix::from_bytes(&b).is_err());
        assert!(SmebMatrix::from_bytes(b"SMEX\x01\0\0\0").is_err());
        assert!(SmebMatrix::new(1, vec![1.0], Some(vec![])).is_err());
    }
}

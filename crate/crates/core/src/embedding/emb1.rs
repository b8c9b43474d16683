//! `EMB1`: little-endian binary container for one layer of per-sample
//! feature vectors.
//!
//! ```text
//! magic "EMB1" | version u16 = 1 | tag_len u8 | tag (ASCII) | dim u32 | count u32
//! count × ( id_len u16 | id (UTF-8) | domain u8 (0 id, 1 selfie) | dim × f32 )
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{EmbeddingError, FeatureMeta, FeatureVector, LayerSelector};
use crate::dataset::{Domain, SampleKey};

pub const EMB1_MAGIC: [u8; 4] = *b"EMB1";
pub const EMB1_VERSION: u16 = 1;

/// Decoded contents of an `EMB1` file.
#[derive(Clone, Debug, PartialEq)]
pub struct Emb1File {
    pub layer: String,
    pub dim: usize,
    pub records: Vec<(SampleKey, Vec<f32>)>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|b| b[0])
    }

    fn u16(&mut self) -> Option<u16> {
        self.take(2).map(|b| u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Parses an `EMB1` byte buffer. Values are returned exactly as stored.
pub fn read_emb1(bytes: &[u8]) -> Result<Emb1File, EmbeddingError> {
    let mut c = Cursor { bytes, pos: 0 };
    let truncated = |c: &Cursor| EmbeddingError::TruncatedHeader { offset: c.pos };

    let magic = c.take(4).ok_or_else(|| truncated(&c))?;
    if magic != EMB1_MAGIC {
        return Err(EmbeddingError::BadMagic {
            found: [magic[0], magic[1], magic[2], magic[3]],
        });
    }
    let version = c.u16().ok_or_else(|| truncated(&c))?;
    if version != EMB1_VERSION {
        return Err(EmbeddingError::VersionMismatch(version));
    }
    let tag_len = c.u8().ok_or_else(|| truncated(&c))? as usize;
    let tag = c.take(tag_len).ok_or_else(|| truncated(&c))?;
    if !tag.is_ascii() {
        return Err(EmbeddingError::BadTag(String::from_utf8_lossy(tag).into_owned()));
    }
    let layer = String::from_utf8(tag.to_vec()).expect("ascii");
    let dim = c.u32().ok_or_else(|| truncated(&c))? as usize;
    let count = c.u32().ok_or_else(|| truncated(&c))? as usize;

    let mut records = Vec::with_capacity(count.min(1 << 16));
    for index in 0..count {
        let start = c.pos;
        let trunc = EmbeddingError::TruncatedRecord { index, offset: start };
        let id_len = c.u16().ok_or(trunc)? as usize;
        let id = c
            .take(id_len)
            .ok_or(EmbeddingError::TruncatedRecord { index, offset: start })?;
        let id = std::str::from_utf8(id)
            .map_err(|_| EmbeddingError::BadId { index })?
            .to_string();
        let domain = match c.u8().ok_or(EmbeddingError::TruncatedRecord { index, offset: start })? {
            0 => Domain::IdDocument,
            1 => Domain::Selfie,
            value => return Err(EmbeddingError::BadDomain { index, value }),
        };
        let payload = c
            .take(dim * 4)
            .ok_or(EmbeddingError::TruncatedRecord { index, offset: start })?;
        let values = payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        records.push((SampleKey::new(id, domain), values));
    }
    if c.pos != bytes.len() {
        return Err(EmbeddingError::TrailingBytes {
            extra: bytes.len() - c.pos,
        });
    }
    Ok(Emb1File { layer, dim, records })
}

impl Emb1File {
    pub fn to_bytes(&self) -> Result<Vec<u8>, EmbeddingError> {
        if !self.layer.is_ascii() || self.layer.len() > u8::MAX as usize {
            return Err(EmbeddingError::BadTag(self.layer.clone()));
        }
        let mut out = Vec::with_capacity(16 + self.records.len() * (self.dim * 4 + 16));
        out.extend_from_slice(&EMB1_MAGIC);
        out.extend_from_slice(&EMB1_VERSION.to_le_bytes());
        out.push(self.layer.len() as u8);
        out.extend_from_slice(self.layer.as_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.records.len() as u32).to_le_bytes());
        for (key, values) in &self.records {
            assert_eq!(values.len(), self.dim, "record {key} has the wrong dimension");
            out.extend_from_slice(&(key.subject.len() as u16).to_le_bytes());
            out.extend_from_slice(key.subject.as_bytes());
            out.push(match key.domain {
                Domain::IdDocument => 0,
                Domain::Selfie => 1,
            });
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }
}

/// Writes feature vectors of one layer as `EMB1` (values narrowed to f32).
pub fn write_emb1(path: &Path, layer: LayerSelector, vectors: &[FeatureVector]) -> Result<(), EmbeddingError> {
    let dim = vectors.first().map_or(0, FeatureVector::dim);
    let file = Emb1File {
        layer: layer.tag().to_string(),
        dim,
        records: vectors
            .iter()
            .map(|v| (v.meta().sample.clone(), v.values().iter().map(|&x| x as f32).collect()))
            .collect(),
    };
    fs::write(path, file.to_bytes()?).map_err(|source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads the pre-activation vectors of `layer` from an `EMB1` file.
///
/// Rectified selectors read their pre-activation layer (`fc6` reads an
/// `fc6n` file); the vectors are returned unrectified.
pub fn load_external(path: &Path, layer: LayerSelector) -> Result<BTreeMap<SampleKey, FeatureVector>, EmbeddingError> {
    let bytes = fs::read(path).map_err(|source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file = read_emb1(&bytes)?;
    let stored = layer.stored();
    if file.layer != stored.tag() {
        return Err(EmbeddingError::LayerMismatch {
            requested: layer.tag().to_string(),
            found: file.layer,
        });
    }
    if stored.is_network_layer() && file.dim != stored.expected_dim() {
        return Err(EmbeddingError::DimMismatch {
            layer: stored,
            expected: stored.expected_dim(),
            found: file.dim,
        });
    }
    let mut map = BTreeMap::new();
    for (key, values) in file.records {
        let meta = FeatureMeta {
            embedder: "emb1".into(),
            layer: stored,
            rectified: false,
            sample: key.clone(),
        };
        let v = FeatureVector::new(values.into_iter().map(f64::from).collect(), meta)?;
        if map.insert(key.clone(), v).is_some() {
            return Err(EmbeddingError::DuplicateRecord(key));
        }
    }
    Ok(map)
}

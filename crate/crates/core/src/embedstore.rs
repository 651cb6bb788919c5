//! CPEB embedding files and deterministic mock embedding backends.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0  | 4 | magic `CPEB` |
//! | 4  | 4 | version (`u32`, = 1) |
//! | 8  | 4 | `n_layers` (`u32`, including layer 0) |
//! | 12 | 4 | `dim` (`u32`) |
//! | 16 | 8 | `n_instances` (`u64`) |
//! | 24 | 8 | dataset manifest hash (`u64`, FNV-1a of the manifest line) |
//! | 32 | 8·n | instance ids (`u64`) |
//! | … | 4·L·n·d | `f32` payload, layer-major: `[layer][instance][dim]` |

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::ArrayView2;
use rayon::prelude::*;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::hash::{mix64, mix_words};
use crate::tasks::TaskDataset;

pub const MAGIC: [u8; 4] = *b"CPEB";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("not a CPEB file")]
    BadMagic,
    #[error("unsupported CPEB version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated at byte {0}")]
    Truncated(usize),
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("instance order mismatch at index {0}")]
    OrderMismatch(usize),
    #[error("instance count {found} does not match dataset count {expected}")]
    CountMismatch { expected: usize, found: usize },
    #[error("dataset manifest hash mismatch (file {found:016x}, dataset {expected:016x})")]
    ManifestMismatch { expected: u64, found: u64 },
    #[error("non-finite value at layer {layer}, instance {instance}, dim {dim}")]
    NonFinite { layer: usize, instance: usize, dim: usize },
    #[error("invalid shape: {0}")]
    Shape(String),
}

/// Per-layer vectors for every instance of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub n_layers: usize,
    pub dim: usize,
    pub instance_ids: Vec<u64>,
    pub manifest_hash: u64,
    /// Layer-major `[layer][instance][dim]`.
    pub vectors: Vec<f32>,
}

impl EmbeddingSet {
    pub fn n_instances(&self) -> usize {
        self.instance_ids.len()
    }

    pub fn layer(&self, layer: usize) -> ArrayView2<'_, f32> {
        let n = self.n_instances();
        let block = n * self.dim;
        ArrayView2::from_shape((n, self.dim), &self.vectors[layer * block..(layer + 1) * block])
            .expect("layer block has n·dim values")
    }

    pub fn validate(&self) -> std::result::Result<(), FormatError> {
        if self.n_layers == 0 || self.dim == 0 {
            return Err(FormatError::Shape("n_layers and dim must be at least 1".into()));
        }
        let expected = self.n_layers * self.n_instances() * self.dim;
        if self.vectors.len() != expected {
            return Err(FormatError::Shape(format!(
                "{} values for {} layers × {} instances × {} dims",
                self.vectors.len(),
                self.n_layers,
                self.n_instances(),
                self.dim
            )));
        }
        if let Some(pos) = self.vectors.iter().position(|v| !v.is_finite()) {
            let per_layer = self.n_instances() * self.dim;
            return Err(FormatError::NonFinite {
                layer: pos / per_layer,
                instance: (pos % per_layer) / self.dim,
                dim: pos % self.dim,
            });
        }
        Ok(())
    }

    /// Check that this set belongs to `dataset` row for row.
    pub fn check_alignment(&self, dataset: &TaskDataset) -> std::result::Result<(), FormatError> {
        if self.n_instances() != dataset.instances.len() {
            return Err(FormatError::CountMismatch {
                expected: dataset.instances.len(),
                found: self.n_instances(),
            });
        }
        if let Some(k) = self
            .instance_ids
            .iter()
            .zip(&dataset.instances)
            .position(|(id, inst)| *id != inst.instance_id)
        {
            return Err(FormatError::OrderMismatch(k));
        }
        let expected = dataset.manifest_hash();
        if self.manifest_hash != expected {
            return Err(FormatError::ManifestMismatch { expected, found: self.manifest_hash });
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> std::result::Result<Vec<u8>, FormatError> {
        self.validate()?;
        let mut out =
            Vec::with_capacity(HEADER_LEN + 8 * self.n_instances() + 4 * self.vectors.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&to_u32(self.n_layers, "n_layers")?.to_le_bytes());
        out.extend_from_slice(&to_u32(self.dim, "dim")?.to_le_bytes());
        out.extend_from_slice(&(self.n_instances() as u64).to_le_bytes());
        out.extend_from_slice(&self.manifest_hash.to_le_bytes());
        for id in &self.instance_ids {
            out.extend_from_slice(&id.to_le_bytes());
        }
        for v in &self.vectors {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, FormatError> {
        if bytes.len() < 4 || bytes[..4] != MAGIC {
            return Err(FormatError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(FormatError::Truncated(bytes.len()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let n_layers = u32_at(8) as usize;
        let dim = u32_at(12) as usize;
        let n = usize::try_from(u64_at(16)).map_err(|_| FormatError::Truncated(bytes.len()))?;
        let manifest_hash = u64_at(24);

        let ids_end = n
            .checked_mul(8)
            .and_then(|b| b.checked_add(HEADER_LEN))
            .ok_or(FormatError::Truncated(bytes.len()))?;
        let n_values = n_layers
            .checked_mul(n)
            .and_then(|v| v.checked_mul(dim))
            .ok_or(FormatError::Truncated(bytes.len()))?;
        let total = n_values
            .checked_mul(4)
            .and_then(|b| b.checked_add(ids_end))
            .ok_or(FormatError::Truncated(bytes.len()))?;
        if bytes.len() < total {
            return Err(FormatError::Truncated(bytes.len()));
        }
        if bytes.len() > total {
            return Err(FormatError::TrailingBytes(bytes.len() - total));
        }
        let instance_ids = bytes[HEADER_LEN..ids_end]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let vectors = bytes[ids_end..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let set = EmbeddingSet { n_layers, dim, instance_ids, manifest_hash, vectors };
        set.validate()?;
        Ok(set)
    }
}

fn to_u32(v: usize, what: &str) -> std::result::Result<u32, FormatError> {
    u32::try_from(v).map_err(|_| FormatError::Shape(format!("{what} {v} exceeds u32")))
}

pub fn write_embeddings(set: &EmbeddingSet, path: &Path) -> Result<()> {
    let bytes = set.to_bytes()?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a CPEB file, optionally checking it against the dataset it embeds.
pub fn read_embeddings(path: &Path, dataset: Option<&TaskDataset>) -> Result<EmbeddingSet> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let set = EmbeddingSet::from_bytes(&bytes)?;
    if let Some(ds) = dataset {
        set.check_alignment(ds)?;
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MockBackendKind {
    Random,
    Oracle,
    /// Convex mix `s·Oracle + (1−s)·Random`.
    Leak(f64),
}

impl fmt::Display for MockBackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MockBackendKind::Random => f.write_str("random"),
            MockBackendKind::Oracle => f.write_str("oracle"),
            MockBackendKind::Leak(s) => write!(f, "leak:{s}"),
        }
    }
}

impl FromStr for MockBackendKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "random" => Ok(MockBackendKind::Random),
            "oracle" => Ok(MockBackendKind::Oracle),
            _ => {
                let strength = s
                    .strip_prefix("leak:")
                    .ok_or_else(|| format!("unknown backend {s:?} (random, oracle, leak:<s>)"))?;
                let v: f64 = strength.parse().map_err(|_| format!("bad leak strength {strength:?}"))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("leak strength {v} outside [0, 1]"));
                }
                Ok(MockBackendKind::Leak(v))
            }
        }
    }
}

const RANDOM_STREAM: u64 = 0x52;
const ORACLE_NOISE_STREAM: u64 = 0x4f;
const ORACLE_NOISE_SCALE: f64 = 0.01;

/// Standard normal sample keyed by (seed, stream, layer, instance, coordinate).
fn keyed_normal(seed: u64, stream: u64, layer: usize, instance: u64, coord: usize) -> f64 {
    let key = mix_words(&[seed, stream, layer as u64, instance, coord as u64]);
    let a = mix64(key);
    let b = mix64(key ^ 0xd1b5_4a32_d192_ed03);
    // Box-Muller on two uniforms in (0, 1].
    let u1 = ((a >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
    let u2 = (b >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Synthetic embeddings for `dataset`, independent of thread scheduling.
pub fn mock_embed(
    kind: MockBackendKind,
    dataset: &TaskDataset,
    n_layers: usize,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingSet> {
    if n_layers == 0 || dim == 0 {
        return Err(FormatError::Shape("n_layers and dim must be at least 1".into()).into());
    }
    let needs_oracle = !matches!(kind, MockBackendKind::Random);
    if needs_oracle && dim < dataset.class_count {
        return Err(FormatError::Shape(format!(
            "dim {dim} is smaller than the class count {}",
            dataset.class_count
        ))
        .into());
    }
    let n = dataset.instances.len();
    let classes = dataset.class_count;
    let mut vectors = vec![0f32; n_layers * n * dim];
    vectors.par_chunks_mut(dim).enumerate().for_each(|(row, out)| {
        let layer = row / n;
        let inst = &dataset.instances[row % n];
        let id = inst.instance_id;
        for (d, slot) in out.iter_mut().enumerate() {
            let random = || keyed_normal(seed, RANDOM_STREAM, layer, id, d);
            let oracle = || {
                if d < classes {
                    if d == inst.label as usize {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    ORACLE_NOISE_SCALE * keyed_normal(seed, ORACLE_NOISE_STREAM, layer, id, d)
                }
            };
            let v = match kind {
                MockBackendKind::Random => random(),
                MockBackendKind::Oracle => oracle(),
                MockBackendKind::Leak(s) => s * oracle() + (1.0 - s) * random(),
            };
            *slot = v as f32;
        }
    });
    Ok(EmbeddingSet {
        n_layers,
        dim,
        instance_ids: dataset.instance_ids(),
        manifest_hash: dataset.manifest_hash(),
        vectors,
    })
}

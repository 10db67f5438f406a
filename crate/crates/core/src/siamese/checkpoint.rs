//! Checkpoints are a directory holding `manifest.json` (format version,
//! embedding config, tensor names, shapes and byte offsets) and
//! `params.bin`, the tensors as consecutive little-endian `f32`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::EmbeddingConfig;
use super::model::{ModelParams, SiameseNetwork};
use crate::error::{Error, Result};
use crate::nn::Tensor;

pub const CHECKPOINT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PAYLOAD_FILE: &str = "params.bin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub dtype: String,
    pub config: EmbeddingConfig,
    pub payload_bytes: usize,
    pub tensors: Vec<TensorEntry>,
}

pub fn encode(model: &SiameseNetwork<f32>) -> (Manifest, Vec<u8>) {
    let mut payload = Vec::new();
    let mut tensors = Vec::new();
    for (name, t) in model.params.named_tensors() {
        let offset = payload.len();
        for v in t.values() {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        tensors.push(TensorEntry {
            name,
            shape: t.shape().to_vec(),
            offset,
            bytes: payload.len() - offset,
        });
    }
    let manifest = Manifest {
        format: "fsts-checkpoint".into(),
        version: CHECKPOINT_VERSION,
        dtype: "f32le".into(),
        config: model.config.clone(),
        payload_bytes: payload.len(),
        tensors,
    };
    (manifest, payload)
}

pub fn decode(manifest: &Manifest, payload: &[u8]) -> Result<SiameseNetwork<f32>> {
    if manifest.version != CHECKPOINT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: manifest.version,
            supported: CHECKPOINT_VERSION,
        });
    }
    if manifest.dtype != "f32le" {
        return Err(Error::ManifestMismatch(format!("unsupported dtype `{}`", manifest.dtype)));
    }
    if payload.len() != manifest.payload_bytes {
        return Err(Error::Truncated {
            what: "checkpoint payload",
            needed: manifest.payload_bytes,
            available: payload.len(),
        });
    }
    let mut params = ModelParams::<f32>::init(&manifest.config, 0)?;
    let mut slots = params.named_tensors_mut();
    if slots.len() != manifest.tensors.len() {
        return Err(Error::ManifestMismatch(format!(
            "manifest lists {} tensors, the configured model has {}",
            manifest.tensors.len(),
            slots.len()
        )));
    }
    for ((name, slot), entry) in slots.iter_mut().zip(&manifest.tensors) {
        if *name != entry.name || slot.shape() != entry.shape.as_slice() {
            return Err(Error::ManifestMismatch(format!(
                "expected {name} {:?}, manifest has {} {:?}",
                slot.shape(),
                entry.name,
                entry.shape
            )));
        }
        let end = entry.offset.checked_add(entry.bytes).filter(|&e| e <= payload.len());
        if entry.bytes != slot.len() * 4 || end.is_none() {
            return Err(Error::ManifestMismatch(format!("{}: bad byte range", entry.name)));
        }
        let raw = &payload[entry.offset..entry.offset + entry.bytes];
        let values: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        **slot = Tensor::new(entry.shape.clone(), values)?;
    }
    drop(slots);
    SiameseNetwork::from_parts(manifest.config.clone(), params)
}

pub fn save_checkpoint(model: &SiameseNetwork<f32>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (manifest, payload) = encode(model);
    let payload_path = dir.join(PAYLOAD_FILE);
    fs::write(&payload_path, &payload).map_err(|e| Error::io(&payload_path, e))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
        .map_err(|e| Error::io(&manifest_path, e))
}

pub fn load_checkpoint(dir: impl AsRef<Path>) -> Result<SiameseNetwork<f32>> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::ManifestMismatch(format!("{}: {e}", manifest_path.display())))?;
    let payload_path = dir.join(PAYLOAD_FILE);
    let payload = fs::read(&payload_path).map_err(|e| Error::io(&payload_path, e))?;
    decode(&manifest, &payload)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siamese::config::BlockConfig;

    fn model() -> SiameseNetwork<f32> {
        let cfg = EmbeddingConfig {
            blocks: vec![BlockConfig::new(3, 3, 2), BlockConfig::new(2, 3, 2)],
            dropout_rate: 0.1,
            input_length: 12,
        };
        let mut m = SiameseNetwork::new(cfg, 11).unwrap();
        m.params.blocks[0].running.mean.values_mut()[1] = 0.25;
        m.params.head_bias.values_mut()[0] = -0.75;
        m
    }

    #[test]
    fn round_trip_is_bitwise() {
        let m = model();
        let (manifest, payload) = encode(&m);
        assert_eq!(manifest.tensors.len(), m.params.named_tensors().len());
        let back = decode(&manifest, &payload).unwrap();
        assert_eq!(back, m);
        assert_eq!(encode(&back).1, payload);
    }

    #[test]
    fn truncated_payload_rejected() {
        let (manifest, payload) = encode(&model());
        assert!(matches!(
            decode(&manifest, &payload[..payload.len() - 1]),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn version_and_shape_errors_are_distinct() {
        let (mut manifest, payload) = encode(&model());
        manifest.version = 99;
        assert!(matches!(decode(&manifest, &payload), Err(Error::UnsupportedVersion { .. })));

        let (mut manifest, payload) = encode(&model());
        manifest.tensors[0].shape = vec![3, 3, 1];
        assert!(matches!(decode(&manifest, &payload), Err(Error::ManifestMismatch(_))));

        let (mut manifest, payload) = encode(&model());
        manifest.tensors.pop();
        assert!(matches!(decode(&manifest, &payload), Err(Error::ManifestMismatch(_))));
    }
}

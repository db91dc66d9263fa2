//! Checkpoint serialization.
//!
//! Layout: magic bytes `SAEC`, format version (u32 little-endian),
//! metadata length (u64 little-endian), UTF-8 JSON metadata, then every
//! parameter tensor as raw little-endian f64 in declaration order (encoder
//! then decoder, weight then bias per layer). Round-trips are bit-exact.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Activation, LayerSpec, Model, NnError, Variant};

pub const MAGIC: [u8; 4] = *b"SAEC";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LayerMeta {
    in_dim: usize,
    out_dim: usize,
    activation: String,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    variant: String,
    latent_dim: usize,
    beta: f64,
    seed: u64,
    steps: u64,
    encoder: Vec<LayerMeta>,
    decoder: Vec<LayerMeta>,
}

fn layer_meta(spec: &LayerSpec) -> LayerMeta {
    LayerMeta {
        in_dim: spec.in_dim,
        out_dim: spec.out_dim,
        activation: spec.activation.name().to_string(),
    }
}

fn layer_spec(meta: &LayerMeta) -> Result<LayerSpec, NnError> {
    let activation = Activation::from_str(&meta.activation).map_err(NnError::Checkpoint)?;
    Ok(LayerSpec::new(meta.in_dim, meta.out_dim, activation))
}

pub fn to_bytes(model: &Model) -> Result<Vec<u8>, NnError> {
    let meta = Meta {
        variant: model.variant.name().to_string(),
        latent_dim: model.latent_dim,
        beta: model.beta,
        seed: model.seed,
        steps: model.steps,
        encoder: model.encoder.iter().map(|l| layer_meta(&l.spec)).collect(),
        decoder: model.decoder.iter().map(|l| layer_meta(&l.spec)).collect(),
    };
    let meta_bytes =
        serde_json::to_vec(&meta).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(meta_bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(&meta_bytes);
    for group in model.params() {
        for v in group {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<Model, NnError> {
    let need = |n: usize, at: usize| {
        if bytes.len() < at + n {
            Err(NnError::Checkpoint(format!(
                "truncated at byte {at}: need {n} more bytes, have {}",
                bytes.len().saturating_sub(at)
            )))
        } else {
            Ok(())
        }
    };
    need(4, 0)?;
    if bytes[..4] != MAGIC {
        return Err(NnError::Checkpoint(format!(
            "bad magic {:02x?}, expected {:02x?}",
            &bytes[..4.min(bytes.len())],
            MAGIC
        )));
    }
    need(4, 4)?;
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(NnError::Checkpoint(format!("unsupported version {version}")));
    }
    need(8, 8)?;
    let meta_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    need(meta_len, 16)?;
    let meta: Meta = serde_json::from_slice(&bytes[16..16 + meta_len])
        .map_err(|e| NnError::Checkpoint(format!("metadata: {e}")))?;

    let variant = Variant::from_str(&meta.variant).map_err(NnError::Checkpoint)?;
    let encoder: Vec<LayerSpec> =
        meta.encoder.iter().map(layer_spec).collect::<Result<_, _>>()?;
    let decoder: Vec<LayerSpec> =
        meta.decoder.iter().map(layer_spec).collect::<Result<_, _>>()?;
    let mut model =
        Model::new(variant, &encoder, &decoder, meta.latent_dim, meta.beta, meta.seed)?;
    model.steps = meta.steps;

    let mut offset = 16 + meta_len;
    for group in model.params_mut() {
        for v in group.iter_mut() {
            if bytes.len() < offset + 8 {
                return Err(NnError::Checkpoint(format!(
                    "parameter payload truncated at byte {offset}"
                )));
            }
            *v = f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap());
            offset += 8;
        }
    }
    if offset != bytes.len() {
        return Err(NnError::Checkpoint(format!(
            "{} trailing bytes after parameters",
            bytes.len() - offset
        )));
    }
    Ok(model)
}

pub fn save(model: &Model, path: &Path) -> Result<(), NnError> {
    fs::write(path, to_bytes(model)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Model, NnError> {
    from_bytes(&fs::read(path)?)
}

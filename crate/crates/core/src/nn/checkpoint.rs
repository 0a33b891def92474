//! Checkpoints are JSON documents whose parameters are hex-encoded
//! little-endian `f64` bytes, so `load(save(m))` reproduces every bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LayerSpec, Network, NnError, Vae};

const FORMAT: &str = "privlab-checkpoint";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NetworkRecord {
    layers: Vec<LayerSpec>,
    parameters: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
enum Body {
    Network {
        network: NetworkRecord,
    },
    Vae {
        encoder: NetworkRecord,
        decoder: NetworkRecord,
        latent_dim: usize,
        beta_bits: String,
    },
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    body: Body,
}

fn encode_f64s(values: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    hex::encode(bytes)
}

fn decode_f64s(s: &str) -> Result<Vec<f64>, NnError> {
    let bytes = hex::decode(s).map_err(|e| NnError::Checkpoint(format!("bad parameter hex: {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(NnError::Checkpoint("parameter bytes not a multiple of 8".into()));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

fn record(net: &Network) -> NetworkRecord {
    NetworkRecord {
        layers: net.specs(),
        parameters: encode_f64s(&net.parameters()),
    }
}

fn restore(rec: &NetworkRecord) -> Result<Network, NnError> {
    let mut net = Network::zeroed(&rec.layers)?;
    net.set_parameters(&decode_f64s(&rec.parameters)?)?;
    Ok(net)
}

fn wrap(body: Body) -> Result<String, NnError> {
    serde_json::to_string_pretty(&CheckpointFile {
        format: FORMAT.into(),
        version: VERSION,
        body,
    })
    .map_err(|e| NnError::Checkpoint(e.to_string()))
}

fn unwrap(json: &str) -> Result<Body, NnError> {
    let file: CheckpointFile = serde_json::from_str(json).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    if file.format != FORMAT {
        return Err(NnError::Checkpoint(format!("unknown format {:?}", file.format)));
    }
    if file.version != VERSION {
        return Err(NnError::Checkpoint(format!("unsupported version {}", file.version)));
    }
    Ok(file.body)
}

pub fn network_to_json(net: &Network) -> Result<String, NnError> {
    wrap(Body::Network { network: record(net) })
}

pub fn network_from_json(json: &str) -> Result<Network, NnError> {
    match unwrap(json)? {
        Body::Network { network } => restore(&network),
        Body::Vae { .. } => Err(NnError::Checkpoint("checkpoint holds a VAE, not a network".into())),
    }
}

pub fn vae_to_json(vae: &Vae) -> Result<String, NnError> {
    wrap(Body::Vae {
        encoder: record(vae.encoder()),
        decoder: record(vae.decoder()),
        latent_dim: vae.latent_dim(),
        beta_bits: encode_f64s(&[vae.beta()]),
    })
}

pub fn vae_from_json(json: &str) -> Result<Vae, NnError> {
    match unwrap(json)? {
        Body::Vae {
            encoder,
            decoder,
            latent_dim,
            beta_bits,
        } => {
            let beta = decode_f64s(&beta_bits)?
                .first()
                .copied()
                .ok_or_else(|| NnError::Checkpoint("missing beta".into()))?;
            Vae::from_parts(restore(&encoder)?, restore(&decoder)?, latent_dim, beta)
        }
        Body::Network { .. } => Err(NnError::Checkpoint("checkpoint holds a network, not a VAE".into())),
    }
}

pub fn save_network(net: &Network, path: &Path) -> Result<(), NnError> {
    std::fs::write(path, network_to_json(net)?)?;
    Ok(())
}

pub fn load_network(path: &Path) -> Result<Network, NnError> {
    network_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_vae(vae: &Vae, path: &Path) -> Result<(), NnError> {
    std::fs::write(path, vae_to_json(vae)?)?;
    Ok(())
}

pub fn load_vae(path: &Path) -> Result<Vae, NnError> {
    vae_from_json(&std::fs::read_to_string(path)?)
}

//! Flat binary checkpoint format for network parameters. Layout:
//!
//! ```text
//! bytes 0..8    magic  "RERCKPT1"
//! bytes 8..12   u32 LE obs_dim
//! bytes 12..16  u32 LE hidden
//! bytes 16..20  u32 LE n_actions
//! bytes 20..28  u64 LE run seed
//! then f64 LE arrays, in order:
//!   w1 (hidden x obs_dim, row-major), b1 (hidden),
//!   w2 (n_actions x hidden, row-major), b2 (n_actions)
//! ```
//!
//! Round-trips are bit-exact: floats are stored via their raw bit patterns.

use std::fmt;
use std::path::Path;

use rer_core::nn::MlpParams;

pub const MAGIC: &[u8; 8] = b"RERCKPT1";

#[derive(Debug)]
pub enum CheckpointError {
    Io(std::io::Error),
    BadMagic,
    Truncated { expected: usize, got: usize },
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckpointError::Io(err) => write!(f, "io error: {err}"),
            CheckpointError::BadMagic => write!(f, "not a checkpoint file (bad magic)"),
            CheckpointError::Truncated { expected, got } => {
                write!(f, "checkpoint truncated: expected {expected} bytes, got {got}")
            }
        }
    }
}

impl std::error::Error for CheckpointError {}

impl From<std::io::Error> for CheckpointError {
    fn from(err: std::io::Error) -> Self {
        CheckpointError::Io(err)
    }
}

pub fn save_checkpoint(path: &Path, params: &MlpParams, seed: u64) -> Result<(), CheckpointError> {
    let mut bytes = Vec::with_capacity(28 + 8 * params.num_params());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(params.obs_dim as u32).to_le_bytes());
    bytes.extend_from_slice(&(params.hidden as u32).to_le_bytes());
    bytes.extend_from_slice(&(params.n_actions as u32).to_le_bytes());
    bytes.extend_from_slice(&seed.to_le_bytes());
    for array in [&params.w1, &params.b1, &params.w2, &params.b2] {
        for &v in array.iter() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(MlpParams, u64), CheckpointError> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 28 || &bytes[..8] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let obs_dim = u32_at(8);
    let hidden = u32_at(12);
    let n_actions = u32_at(16);
    let seed = u64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let counts = [hidden * obs_dim, hidden, n_actions * hidden, n_actions];
    let expected = 28 + 8 * counts.iter().sum::<usize>();
    if bytes.len() != expected {
        return Err(CheckpointError::Truncated { expected, got: bytes.len() });
    }
    let mut at = 28;
    let mut read_array = |count: usize| -> Vec<f64> {
        (0..count)
            .map(|_| {
                let v = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
                at += 8;
                v
            })
            .collect()
    };
    let w1 = read_array(counts[0]);
    let b1 = read_array(counts[1]);
    let w2 = read_array(counts[2]);
    let b2 = read_array(counts[3]);
    Ok((MlpParams { obs_dim, hidden, n_actions, w1, b1, w2, b2 }, seed))
}

//! Versioned JSON checkpoints. Floats are written with round-trip precision,
//! so a reloaded model predicts bitwise identically.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint<T> {
    pub format: String,
    pub version: u32,
    pub payload: T,
}

pub fn save_checkpoint<T: Serialize>(path: &Path, format: &str, payload: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Out<'a, T> {
        format: &'a str,
        version: u32,
        payload: &'a T,
    }
    let text = serde_json::to_string(&Out { format, version: CHECKPOINT_VERSION, payload })?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint<T: DeserializeOwned>(path: &Path, format: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ck: Checkpoint<serde_json::Value> = serde_json::from_str(&text)?;
    if ck.format != format {
        return Err(Error::Checkpoint(format!("expected format `{format}`, found `{}`", ck.format)));
    }
    if ck.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("version {} is not supported", ck.version)));
    }
    Ok(serde_json::from_value(ck.payload)?)
}

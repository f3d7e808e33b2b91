//! Model file: a pretty-printed JSON object
//!
//! ```text
//! {
//!   "format": "milsent-model",
//!   "version": 1,
//!   "dim": <d>,
//!   "theta": [<d + 1 numbers>],
//!   "config": { <TrainConfig fields, seed included> }
//! }
//! ```
//!
//! Numbers are written in shortest round-trip form and parsed with exact
//! rounding, so a save/load cycle reproduces every parameter bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{MilModel, TrainConfig};

pub const MODEL_FORMAT: &str = "milsent-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRecord {
    format: String,
    version: u32,
    dim: usize,
    theta: Vec<f64>,
    config: TrainConfig,
}

pub fn write_model<W: Write>(mut writer: W, model: &MilModel) -> std::io::Result<()> {
    let record = ModelRecord {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        dim: model.dim(),
        theta: model.theta().to_vec(),
        config: model.config().clone(),
    };
    serde_json::to_writer_pretty(&mut writer, &record)?;
    writer.write_all(b"\n")?;
    writer.flush()
}

pub fn read_model<R: Read>(reader: R) -> Result<MilModel> {
    let record: ModelRecord =
        serde_json::from_reader(reader).map_err(|e| Error::Model(e.to_string()))?;
    if record.format != MODEL_FORMAT {
        return Err(Error::Model(format!(
            "unexpected format tag `{}`",
            record.format
        )));
    }
    if record.version != MODEL_VERSION {
        return Err(Error::Model(format!(
            "unsupported version {}",
            record.version
        )));
    }
    if record.theta.len() != record.dim + 1 {
        return Err(Error::Model(format!(
            "theta has {} entries, expected dim + 1 = {}",
            record.theta.len(),
            record.dim + 1
        )));
    }
    record
        .config
        .validate()
        .map_err(|e| Error::Model(e.to_string()))?;
    MilModel::new(record.theta, record.config)
}

pub fn save_model(path: impl AsRef<Path>, model: &MilModel) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(BufWriter::new(file), model).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MilModel> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(file))
}

//! Model files: the 8-byte magic `AFMAP001` followed by a JSON document.
//! Floats are written in shortest round-trip form, so a loaded model
//! predicts bit-identically to the saved one.

use std::fs;
use std::path::Path;

use super::MappingModel;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"AFMAP001";

pub fn to_bytes(model: &MappingModel) -> Result<Vec<u8>> {
    let mut out = MAGIC.to_vec();
    serde_json::to_writer(&mut out, model).map_err(|e| Error::Model(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<MappingModel> {
    let body = bytes
        .strip_prefix(MAGIC.as_slice())
        .ok_or_else(|| Error::Model("missing AFMAP001 header".into()))?;
    serde_json::from_slice(body).map_err(|e| Error::Model(e.to_string()))
}

pub fn save_model(model: &MappingModel, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MappingModel> {
    from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

//! File formats: wrapped output documents and tolerant input readers.

use crate::config::{Config, SCHEMA_VERSION};
use crate::CliError;
use prosograph::graph::{BoundaryMap, SyntacticGraph};
use prosograph::Tensor;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// One built sentence: the graph plus the boundary map it was built
/// from, kept together so downstream commands can pool without extra
/// inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub graph: SyntacticGraph,
    pub boundary: BoundaryMap,
}

/// Output of `build-graph`.
#[derive(Debug, Serialize, Deserialize)]
pub struct GraphFile {
    pub schema_version: u32,
    pub config: Config,
    pub sentences: Vec<SentenceRecord>,
}

/// Output of `encode`.
#[derive(Debug, Serialize, Deserialize)]
pub struct TensorFile {
    pub schema_version: u32,
    pub config: Config,
    pub tensor: Tensor,
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn graph_file(config: Config, sentences: Vec<SentenceRecord>) -> GraphFile {
    GraphFile {
        schema_version: SCHEMA_VERSION,
        config,
        sentences,
    }
}

pub fn tensor_file(config: Config, tensor: Tensor) -> TensorFile {
    TensorFile {
        schema_version: SCHEMA_VERSION,
        config,
        tensor,
    }
}

pub fn read_graph_file(path: &Path) -> Result<GraphFile, CliError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Input(format!(
            "{}: not a graph file produced by build-graph ({e})",
            path.display()
        ))
    })
}

/// Read a tensor from either the bare `{"shape","data"}` form or a
/// wrapped output file.
pub fn read_tensor(path: &Path) -> Result<Tensor, CliError> {
    let text = read_to_string(path)?;
    if let Ok(t) = serde_json::from_str::<Tensor>(&text) {
        return Ok(t);
    }
    if let Ok(f) = serde_json::from_str::<TensorFile>(&text) {
        return Ok(f.tensor);
    }
    // surface the bare-form error, which is the documented schema
    match serde_json::from_str::<Tensor>(&text) {
        Err(e) => Err(CliError::Input(format!(
            "{}: not a tensor JSON file ({e})",
            path.display()
        ))),
        Ok(_) => unreachable!(),
    }
}

/// Read a parameter bundle: a JSON map from canonical names to tensors.
pub fn read_bundle(path: &Path) -> Result<BTreeMap<String, Tensor>, CliError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Input(format!(
            "{}: not a parameter bundle (map of name -> tensor): {e}",
            path.display()
        ))
    })
}

/// Read one-or-many JSON documents of the same shape: a bare object is
/// treated as a singleton list.
pub fn read_one_or_many<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = read_to_string(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let items = match value {
        Value::Array(items) => items,
        other => vec![other],
    };
    items
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            serde_json::from_value(v).map_err(|e| {
                CliError::Input(format!("{}: entry {i}: {e}", path.display()))
            })
        })
        .collect()
}

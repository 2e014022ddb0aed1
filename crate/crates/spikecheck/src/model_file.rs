//! Model files: a JSON document holding the network configuration and its
//! weight matrices.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "config": { "T": 4, "tau": 1, "theta": 1.0, "gamma": 1.0, "layer_sizes": [2, 1] },
//!   "weights": [ [[0.6], [0.6]] ],
//!   "note": "optional provenance text"
//! }
//! ```
//!
//! `weights[l]` is the matrix into layer `l + 1`, stored row-major: one row
//! per presynaptic neuron, one column per postsynaptic neuron. Numbers are
//! written in shortest round-trip decimal form, so loading a saved model
//! reproduces every weight bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spikecheck_core::{ModelConfig, SnnModel, WeightMatrix};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub config: ConfigSection,
    pub weights: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSection {
    #[serde(rename = "T")]
    pub time_steps: u32,
    pub tau: u32,
    pub theta: f64,
    pub gamma: f64,
    pub layer_sizes: Vec<usize>,
}

impl ModelFile {
    pub fn from_model(model: &SnnModel, note: Option<&str>) -> Self {
        let c = model.config();
        Self {
            format_version: FORMAT_VERSION,
            config: ConfigSection {
                time_steps: c.time_steps,
                tau: c.tau,
                theta: c.theta,
                gamma: c.gamma,
                layer_sizes: c.layer_sizes.clone(),
            },
            weights: model.weights().iter().map(WeightMatrix::to_rows).collect(),
            note: note.map(str::to_owned),
        }
    }

    pub fn into_model(self) -> Result<SnnModel> {
        let config = ModelConfig {
            time_steps: self.config.time_steps,
            tau: self.config.tau,
            theta: self.config.theta,
            gamma: self.config.gamma,
            layer_sizes: self.config.layer_sizes,
        };
        let mut matrices = Vec::with_capacity(self.weights.len());
        for (l, rows) in self.weights.iter().enumerate() {
            let width = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != width) {
                return Err(Error::Schema(format!("weights[{l}] has rows of different lengths")));
            }
            let data = rows.iter().flatten().copied().collect();
            matrices.push(WeightMatrix::new(rows.len(), width, data)?);
        }
        Ok(SnnModel::new(config, matrices)?)
    }
}

/// Pretty-printed JSON, newline terminated.
pub fn model_to_string(model: &SnnModel, note: Option<&str>) -> String {
    let mut text = serde_json::to_string_pretty(&ModelFile::from_model(model, note))
        .expect("model files always serialize");
    text.push('\n');
    text
}

pub fn model_from_str(text: &str) -> Result<SnnModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("not a JSON document: {e}")))?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => return Err(Error::Schema(format!("unsupported format_version {v}"))),
        None => return Err(Error::Schema("missing or non-integer format_version".into())),
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    file.into_model()
}

pub fn save_model(model: &SnnModel, path: impl AsRef<Path>, note: Option<&str>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_string(model, note)).map_err(Error::io(path))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SnnModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    model_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> SnnModel {
        let config = ModelConfig {
            time_steps: 4,
            tau: 1,
            theta: 1.0,
            gamma: 1.0,
            layer_sizes: vec![2, 1],
        };
        let w = WeightMatrix::from_rows(&[vec![0.6], vec![0.6]]).unwrap();
        SnnModel::new(config, vec![w]).unwrap()
    }

    #[test]
    fn round_trip() {
        let m = example();
        assert_eq!(model_from_str(&model_to_string(&m, Some("x"))).unwrap(), m);
    }

    #[test]
    fn version_is_checked() {
        let text = model_to_string(&example(), None).replace("\"format_version\": 1", "\"format_version\": 2");
        let err = model_from_str(&text).unwrap_err();
        assert!(matches!(err, Error::Schema(ref s) if s.contains("format_version 2")), "{err}");
    }

    #[test]
    fn wrong_shape_is_rejected() {
        let text = model_to_string(&example(), None).replace("\"layer_sizes\": [\n      2,", "\"layer_sizes\": [\n      3,");
        assert!(matches!(model_from_str(&text), Err(Error::Core(_))));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let text = r#"{"format_version":1,"config":{"T":4,"tau":1,"theta":1.0,"gamma":1.0,"layer_sizes":[2,2]},
            "weights":[[[0.5,0.5],[0.5]]]}"#;
        assert!(matches!(model_from_str(text), Err(Error::Schema(_))));
    }

    #[test]
    fn corrupted_field() {
        let text = model_to_string(&example(), None).replace("\"tau\": 1", "\"tau\": \"one\"");
        assert!(matches!(model_from_str(&text), Err(Error::Schema(_))));
    }
}

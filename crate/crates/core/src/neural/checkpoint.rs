use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::net::NetParams;
use super::NeuralError;

pub const FORMAT_VERSION: u32 = 1;

/// On-disk form of one parameter set.
///
/// Floats are written with round-trip precision, so a reload is bit-exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub version: u32,
    pub input: usize,
    pub hidden: usize,
    pub actions: usize,
    pub tensors: Vec<Vec<f64>>,
}

impl ParamsFile {
    pub fn from_params(p: &NetParams) -> Self {
        ParamsFile {
            version: FORMAT_VERSION,
            input: p.input_width(),
            hidden: p.hidden_width(),
            actions: p.action_count(),
            tensors: p.tensors().iter().map(|t| t.to_vec()).collect(),
        }
    }

    pub fn into_params(self) -> Result<NetParams, NeuralError> {
        if self.version != FORMAT_VERSION {
            return Err(NeuralError::Checkpoint(format!("unsupported version {}", self.version)));
        }
        let (i, h, a) = (self.input, self.hidden, self.actions);
        let want = [h * i, h, a * h, a, h, 1];
        if self.tensors.len() != want.len() {
            return Err(NeuralError::Checkpoint(format!("expected 6 tensors, got {}", self.tensors.len())));
        }
        for (t, &w) in self.tensors.iter().zip(&want) {
            if t.len() != w {
                return Err(NeuralError::ShapeMismatch { expected: w, got: t.len() });
            }
        }
        let mut it = self.tensors.into_iter();
        let mut next = || it.next().expect("count checked");
        let shape_err = |e: ndarray::ShapeError| NeuralError::Checkpoint(e.to_string());
        Ok(NetParams {
            w1: Array2::from_shape_vec((h, i), next()).map_err(shape_err)?,
            b1: Array1::from(next()),
            wp: Array2::from_shape_vec((a, h), next()).map_err(shape_err)?,
            bp: Array1::from(next()),
            wv: Array1::from(next()),
            bv: Array1::from(next()),
        })
    }
}

pub fn save_params(p: &NetParams, path: &Path) -> Result<(), NeuralError> {
    let text = serde_json::to_string(&ParamsFile::from_params(p))
        .map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_params(path: &Path) -> Result<NetParams, NeuralError> {
    let text = std::fs::read_to_string(path)?;
    let file: ParamsFile = serde_json::from_str(&text).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    file.into_params()
}

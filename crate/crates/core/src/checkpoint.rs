//! Versioned parameter checkpoints.
//!
//! Checkpoints are JSON with every float serialized in shortest-roundtrip
//! form, so a save/load cycle reproduces evaluations bit for bit. The
//! optional problem block makes a checkpoint self-contained for field
//! reconstruction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::network::NetworkParams;
use crate::physics::{Formulation, ProblemSpec};

pub const CHECKPOINT_FORMAT: &str = "wgpinn-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Problem description stored alongside the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub k: f64,
    pub b: f64,
    pub formulation: Formulation,
    pub n_modes: usize,
}

impl ProblemMeta {
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        Self {
            k: spec.k(),
            b: spec.b(),
            formulation: spec.formulation(),
            n_modes: spec.n_modes(),
        }
    }

    pub fn to_spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::new(self.k, self.b, self.formulation, self.n_modes)
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    layer_sizes: Vec<usize>,
    alphas: Vec<f64>,
    /// Row-major weight entries per layer.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    problem: Option<ProblemMeta>,
}

pub fn save_checkpoint(
    path: &Path,
    params: &NetworkParams,
    problem: Option<&ProblemMeta>,
) -> Result<()> {
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        layer_sizes: params.layer_sizes().to_vec(),
        alphas: params.alphas().to_vec(),
        weights: params
            .weights()
            .iter()
            .map(|w| w.as_slice().to_vec())
            .collect(),
        biases: params
            .biases()
            .iter()
            .map(|b| b.as_slice().to_vec())
            .collect(),
        problem: problem.copied(),
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Config(format!("checkpoint serialization: {e}")))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(NetworkParams, Option<ProblemMeta>)> {
    let text = std::fs::read_to_string(path)?;
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("checkpoint parse: {e}")))?;
    if file.format != CHECKPOINT_FORMAT {
        return Err(Error::Config(format!(
            "not a checkpoint file (format '{}')",
            file.format
        )));
    }
    if file.version != CHECKPOINT_VERSION {
        return Err(Error::Config(format!(
            "unsupported checkpoint version {}",
            file.version
        )));
    }
    let mut weights = Vec::with_capacity(file.weights.len());
    for (i, w) in file.weights.into_iter().enumerate() {
        if i + 1 >= file.layer_sizes.len() {
            return Err(Error::Config("too many weight blocks".into()));
        }
        weights.push(Matrix::from_vec(
            file.layer_sizes[i + 1],
            file.layer_sizes[i],
            w,
        )?);
    }
    let biases = file
        .biases
        .into_iter()
        .map(Vector::from_vec)
        .collect::<Result<Vec<_>>>()?;
    let params = NetworkParams::from_parts(file.layer_sizes, weights, biases, file.alphas)?;
    Ok((params, file.problem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn roundtrip_is_bit_exact() {
        let mut rng = SeededRng::new(11);
        let params = NetworkParams::init(&mut rng, &[2, 7, 5, 2], 2.0).unwrap();
        let spec = ProblemSpec::new(8.0, 2.0, Formulation::Taper, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        save_checkpoint(&path, &params, Some(&ProblemMeta::from_spec(&spec))).unwrap();
        let (loaded, meta) = load_checkpoint(&path).unwrap();
        assert_eq!(params, loaded);
        let meta = meta.unwrap();
        assert_eq!(meta.to_spec().unwrap(), spec);
        // Bit-exact evaluations after reload.
        for &(x, z) in &[(0.3, 0.4), (-1.9, 0.97)] {
            assert_eq!(params.forward(x, z).unwrap(), loaded.forward(x, z).unwrap());
        }
    }

    #[test]
    fn rejects_foreign_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("other.json");
        std::fs::write(&path, "{\"format\": \"something-else\", \"version\": 1, \"layer_sizes\": [], \"alphas\": [], \"weights\": [], \"biases\": []}").unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}

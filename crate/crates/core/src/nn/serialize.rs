//! Trained-parameter manifests: shapes plus row-major values, enough to
//! reload a network and reproduce its predictions bit-exactly (JSON f64
//! serialization round-trips).

use serde::{Deserialize, Serialize};

use super::Network;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamManifest {
    pub tensors: Vec<NamedTensor>,
}

impl Network {
    pub fn export_params(&self) -> ParamManifest {
        ParamManifest {
            tensors: self
                .params()
                .iter()
                .enumerate()
                .map(|(i, p)| NamedTensor {
                    name: format!("p{i}.{}", p.name),
                    shape: p.value.shape().to_vec(),
                    data: p.value.data().to_vec(),
                })
                .collect(),
        }
    }

    /// Load values positionally; every tensor's shape must match the
    /// network's layout.
    pub fn import_params(&mut self, manifest: &ParamManifest) -> Result<()> {
        let mut params = self.params_mut();
        if params.len() != manifest.tensors.len() {
            return Err(Error::invalid_argument(format!(
                "manifest holds {} tensors, network expects {}",
                manifest.tensors.len(),
                params.len()
            )));
        }
        for (p, t) in params.iter_mut().zip(&manifest.tensors) {
            let tensor = Tensor::from_vec(&t.shape, t.data.clone())?;
            p.value.require_shape(&t.shape)?;
            p.value = tensor;
        }
        Ok(())
    }
}

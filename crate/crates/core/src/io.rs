//! JSON file formats for tensors and polynomials.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{dimension, Result};
use crate::hermite::PolynomialSpec;
use crate::space::ValueSpace;
use crate::tensor::CoeffTensor;

/// `{"d", "n", "m", "space", "values"}` with values flat row-major and the
/// value axis innermost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub space: ValueSpace,
    pub values: Vec<f64>,
}

impl TensorFile {
    pub fn into_tensor(self) -> Result<CoeffTensor> {
        if self.space.dim() != self.m {
            return Err(dimension(format!(
                "space has dimension {} but m = {}",
                self.space.dim(),
                self.m
            )));
        }
        CoeffTensor::new(self.d, self.n, self.m, self.values, self.space)
    }
}

impl From<&CoeffTensor> for TensorFile {
    fn from(t: &CoeffTensor) -> Self {
        TensorFile {
            d: t.order(),
            n: t.dim(),
            m: t.value_dim(),
            space: t.space().clone(),
            values: t.values().to_vec(),
        }
    }
}

pub fn tensor_from_json(text: &str) -> Result<CoeffTensor> {
    serde_json::from_str::<TensorFile>(text)?.into_tensor()
}

pub fn tensor_to_json(t: &CoeffTensor) -> Result<String> {
    Ok(serde_json::to_string_pretty(&TensorFile::from(t))?)
}

pub fn load_tensor(path: &Path) -> Result<CoeffTensor> {
    tensor_from_json(&fs::read_to_string(path)?)
}

pub fn save_tensor(path: &Path, t: &CoeffTensor) -> Result<()> {
    fs::write(path, tensor_to_json(t)?)?;
    Ok(())
}

pub fn poly_from_json(text: &str) -> Result<PolynomialSpec> {
    let f: PolynomialSpec = serde_json::from_str(text)?;
    f.validate()?;
    Ok(f)
}

pub fn load_poly(path: &Path) -> Result<PolynomialSpec> {
    poly_from_json(&fs::read_to_string(path)?)
}

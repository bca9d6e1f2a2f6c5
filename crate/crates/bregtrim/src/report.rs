//! JSON file written by `bregtrim fit`.

use serde::{Deserialize, Serialize};

use bregtrim_core::trimmed::empirical_distortion;
use bregtrim_core::{Codebook, Dataset, Divergence, TrimConfig, TrimmedFit};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResultFile {
    pub version: u32,
    pub divergence: String,
    pub k: usize,
    pub q: usize,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub codebook: Vec<Vec<f64>>,
    /// `0` for trimmed points, `1..=k` in lexicographic center order.
    pub labels: Vec<usize>,
    pub trim_radius_sq: f64,
}

impl FitResultFile {
    /// Canonicalizes `fit` (centers in lexicographic order) and records it.
    pub fn new(divergence: &str, config: &TrimConfig, data: &Dataset, mut fit: TrimmedFit) -> Self {
        fit.canonicalize();
        FitResultFile {
            version: FORMAT_VERSION,
            divergence: divergence.to_string(),
            k: config.k,
            q: config.q,
            n: data.len(),
            d: data.dim(),
            seed: config.seed,
            cost: fit.cost,
            iterations: fit.iterations,
            converged: fit.converged,
            codebook: fit.codebook.centers().map(<[f64]>::to_vec).collect(),
            labels: fit.labels,
            trim_radius_sq: fit.trim_radius_sq,
        }
    }

    pub fn codebook(&self) -> Result<Codebook> {
        Ok(Codebook::from_rows(&self.codebook)?)
    }

    /// Trimmed distortion of the stored codebook on `data`.
    pub fn recompute_cost(&self, div: &Divergence, data: &Dataset) -> Result<f64> {
        Ok(empirical_distortion(div, data, &self.codebook()?, self.q)?)
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)
            .map_err(|e| Error::Degenerate(format!("cannot encode result: {e}")))?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BrisqueFeatures, FEATURE_COUNT};
use crate::{Error, Result};

/// Linear scorer over min-max normalized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feat_min: Vec<f64>,
    pub feat_max: Vec<f64>,
}

impl LinearModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("weights", &self.weights), ("feat_min", &self.feat_min), ("feat_max", &self.feat_max)] {
            if v.len() != FEATURE_COUNT {
                return Err(Error::ModelShapeMismatch(format!(
                    "{name} has {} entries, expected {FEATURE_COUNT}",
                    v.len()
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingModel(path.into())),
            Err(e) => return Err(Error::io(path, e)),
        };
        let m: LinearModel = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.into(),
            message: e.to_string(),
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("model serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Maps each feature to `[-1, 1]` over `[feat_min, feat_max]`; a
    /// collapsed range maps to 0.
    pub fn normalize(&self, feats: &BrisqueFeatures) -> Vec<f64> {
        feats
            .values()
            .iter()
            .zip(self.feat_min.iter().zip(&self.feat_max))
            .map(|(&x, (&lo, &hi))| if hi > lo { 2.0 * (x - lo) / (hi - lo) - 1.0 } else { 0.0 })
            .collect()
    }

    pub fn score(&self, feats: &BrisqueFeatures) -> f64 {
        self.normalize(feats)
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x * w)
            .sum::<f64>()
            + self.bias
    }
}

/// Loads the model at `model_path` and scores `feats`.
pub fn score(feats: &BrisqueFeatures, model_path: impl AsRef<Path>) -> Result<f64> {
    Ok(LinearModel::load(model_path)?.score(feats))
}

//! Model files: a versioned JSON document around a trained model.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use xplain_core::model::ModelParameters;
use xplain_core::{Dataset, Fingerprint, Model, ModelKind};

use crate::error::AppError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: u32,
    pub kind: ModelKind,
    pub parameters: ModelParameters,
    pub train_seed: u64,
    pub dataset_fingerprint: Fingerprint,
}

impl ModelDocument {
    pub fn from_model(model: &Model) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: model.kind(),
            parameters: model.parameters().clone(),
            train_seed: model.train_seed(),
            dataset_fingerprint: model.dataset_fingerprint().clone(),
        }
    }

    pub fn into_model(self) -> Result<Model, AppError> {
        if self.format_version != FORMAT_VERSION {
            return Err(AppError::Input(format!(
                "unsupported model format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        Ok(Model::from_parts(
            self.kind,
            self.parameters,
            self.train_seed,
            self.dataset_fingerprint,
        )?)
    }
}

pub fn model_to_json(model: &Model) -> String {
    serde_json::to_string_pretty(&ModelDocument::from_model(model)).expect("model serializes")
}

pub fn model_from_json(text: &str) -> Result<Model, AppError> {
    let doc: ModelDocument = serde_json::from_str(text)
        .map_err(|e| AppError::Input(format!("invalid model file: {e}")))?;
    doc.into_model()
}

pub fn save_model(model: &Model, path: &Path) -> Result<(), AppError> {
    fs::write(path, model_to_json(model) + "\n").map_err(|e| AppError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model, AppError> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    model_from_json(&text)
}

/// Fails unless `model` was trained on exactly this dataset.
pub fn check_fingerprint(model: &Model, dataset: &Dataset) -> Result<(), AppError> {
    let actual = dataset.fingerprint();
    if model.dataset_fingerprint() != &actual {
        return Err(AppError::Input(format!(
            "model was trained on dataset {} but the loaded dataset is {}",
            model.dataset_fingerprint().0,
            actual.0
        )));
    }
    Ok(())
}

/// Reads a CSV file, or the bundled dataset when `path` is `None`.
pub fn load_dataset_file(path: Option<&Path>) -> Result<Dataset, AppError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| AppError::io(p, e))?,
        None => xplain_core::IRIS_CSV.to_string(),
    };
    Ok(xplain_core::load_dataset(&text, None)?)
}

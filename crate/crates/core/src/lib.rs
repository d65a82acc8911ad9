#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod error;
pub mod fingerprint;
mod math;
pub mod model;

pub use dataset::{
    class_prototypes, feature_stats, load_dataset, train_test_split, Dataset, FeatureKind,
    FeatureMeta, FeatureRange, Instance, IRIS_CSV,
};
pub use conformance::{run_conformance, DfCheck};
pub use error::{Error, Result};
pub use fingerprint::Fingerprint;
pub use model::{predict, train_model, Hyperparams, Model, ModelKind, Prediction, Predictor};
pub mod attribution;
pub mod linalg;
pub mod lime;
pub mod shap;
pub mod anchors;
pub mod counterfactual;
pub mod views;
pub mod conformance;

//! Trained classifiers and the [`Predictor`] interface the explainers consume.

mod logistic;
mod tree;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use logistic::LogisticParams;
pub use tree::{DecisionRule, RuleCondition, SplitTest, TreeNode, TreeParams};

use crate::dataset::{Dataset, FeatureKind, Instance};
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::math;

/// Anything that maps a feature vector to per-class scores.
///
/// Trained models return probabilities; explainers only assume a vector of
/// per-class outputs, so test models may return arbitrary reals.
pub trait Predictor {
    fn n_features(&self) -> usize;
    fn n_classes(&self) -> usize;
    fn predict_proba(&self, x: &[f64]) -> Vec<f64>;

    /// Output for one class.
    fn score(&self, x: &[f64], class: usize) -> f64 {
        self.predict_proba(x)[class]
    }

    /// Highest-scoring class, lowest index on ties.
    fn predict_class(&self, x: &[f64]) -> usize {
        math::argmax(&self.predict_proba(x))
    }
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn n_features(&self) -> usize {
        (**self).n_features()
    }
    fn n_classes(&self) -> usize {
        (**self).n_classes()
    }
    fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        (**self).predict_proba(x)
    }
}

/// Wraps a closure as a [`Predictor`].
pub struct FnPredictor {
    n_features: usize,
    n_classes: usize,
    f: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl FnPredictor {
    pub fn new(
        n_features: usize,
        n_classes: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            n_features,
            n_classes,
            f: Box::new(f),
        }
    }
}

impl Predictor for FnPredictor {
    fn n_features(&self) -> usize {
        self.n_features
    }
    fn n_classes(&self) -> usize {
        self.n_classes
    }
    fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    DecisionTree,
    LogisticRegression,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::LogisticRegression => "logistic_regression",
        }
    }
}

impl core::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decision_tree" | "tree" => Ok(ModelKind::DecisionTree),
            "logistic_regression" | "logistic" => Ok(ModelKind::LogisticRegression),
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Training hyperparameters; only the fields of the chosen kind are used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    /// Tree depth limit, 1..=10.
    pub max_depth: usize,
    /// Gradient-descent iterations for logistic regression, at least 1.
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            max_depth: 3,
            iterations: 500,
            learning_rate: 0.5,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self, kind: ModelKind) -> Result<()> {
        match kind {
            ModelKind::DecisionTree if !(1..=10).contains(&self.max_depth) => Err(Error::Config(
                format!("max_depth must be in 1..=10, got {}", self.max_depth),
            )),
            ModelKind::LogisticRegression if self.iterations == 0 => {
                Err(Error::Config("iterations must be at least 1".into()))
            }
            ModelKind::LogisticRegression
                if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) =>
            {
                Err(Error::Config(format!(
                    "learning_rate must be positive, got {}",
                    self.learning_rate
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Feature layout and class names a model was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSchema {
    pub feature_names: Vec<String>,
    pub feature_kinds: Vec<FeatureKind>,
    /// Category count per feature (0 for continuous).
    pub n_categories: Vec<usize>,
    pub class_names: Vec<String>,
}

impl ModelSchema {
    pub fn of(dataset: &Dataset) -> Self {
        Self {
            feature_names: dataset.feature_names(),
            feature_kinds: dataset.features().iter().map(|f| f.kind).collect(),
            n_categories: dataset
                .features()
                .iter()
                .map(|f| f.categories().map_or(0, |c| c.len()))
                .collect(),
            class_names: dataset.class_names().to_vec(),
        }
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_names.len() {
            return Err(Error::Dimension {
                expected: self.feature_names.len(),
                actual: x.len(),
            });
        }
        for (j, &v) in x.iter().enumerate() {
            let ok = match self.feature_kinds[j] {
                FeatureKind::Continuous => v.is_finite(),
                FeatureKind::Categorical => {
                    v.fract() == 0.0 && v >= 0.0 && (v as usize) < self.n_categories[j]
                }
            };
            if !ok {
                return Err(Error::InvalidValue {
                    feature: self.feature_names[j].clone(),
                    message: format!("{v} is not a valid value"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelParameters {
    DecisionTree(TreeParams),
    LogisticRegression(LogisticParams),
}

impl ModelParameters {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParameters::DecisionTree(_) => ModelKind::DecisionTree,
            ModelParameters::LogisticRegression(_) => ModelKind::LogisticRegression,
        }
    }
}

/// An immutable trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    kind: ModelKind,
    parameters: ModelParameters,
    train_seed: u64,
    dataset_fingerprint: Fingerprint,
}

impl Model {
    /// Reassembles a model, checking that `kind` matches the parameters.
    pub fn from_parts(
        kind: ModelKind,
        parameters: ModelParameters,
        train_seed: u64,
        dataset_fingerprint: Fingerprint,
    ) -> Result<Self> {
        if parameters.kind() != kind {
            return Err(Error::Config(format!(
                "model kind `{}` does not match its parameters",
                kind.as_str()
            )));
        }
        Ok(Self {
            kind,
            parameters,
            train_seed,
            dataset_fingerprint,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn parameters(&self) -> &ModelParameters {
        &self.parameters
    }

    pub fn train_seed(&self) -> u64 {
        self.train_seed
    }

    pub fn dataset_fingerprint(&self) -> &Fingerprint {
        &self.dataset_fingerprint
    }

    pub fn schema(&self) -> &ModelSchema {
        match &self.parameters {
            ModelParameters::DecisionTree(t) => &t.schema,
            ModelParameters::LogisticRegression(l) => &l.schema,
        }
    }

    pub fn class_names(&self) -> &[String] {
        &self.schema().class_names
    }

    /// Root-to-leaf rules of a tree model; `None` for other kinds.
    pub fn decision_rules(&self) -> Option<Vec<DecisionRule>> {
        match &self.parameters {
            ModelParameters::DecisionTree(t) => Some(t.rules()),
            ModelParameters::LogisticRegression(_) => None,
        }
    }

    /// Fraction of rows whose predicted class equals the label.
    pub fn accuracy(&self, dataset: &Dataset) -> f64 {
        let correct = dataset
            .rows()
            .iter()
            .zip(dataset.labels())
            .filter(|(row, &label)| self.predict_class(row) == label)
            .count();
        correct as f64 / dataset.len() as f64
    }
}

impl Predictor for Model {
    fn n_features(&self) -> usize {
        self.schema().feature_names.len()
    }

    fn n_classes(&self) -> usize {
        self.schema().class_names.len()
    }

    fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        match &self.parameters {
            ModelParameters::DecisionTree(t) => t.predict_proba(x),
            ModelParameters::LogisticRegression(l) => l.predict_proba(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class_index: usize,
    pub class_name: String,
    pub probabilities: Vec<f64>,
}

impl Prediction {
    pub fn from_probabilities(probabilities: Vec<f64>, class_names: &[String]) -> Self {
        let class_index = math::argmax(&probabilities);
        Self {
            class_index,
            class_name: class_names
                .get(class_index)
                .cloned()
                .unwrap_or_else(|| format!("class {class_index}")),
            probabilities,
        }
    }
}

/// Trains a model. Deterministic in `(dataset, kind, hyperparams, seed)`.
pub fn train_model(
    dataset: &Dataset,
    kind: ModelKind,
    hyperparams: &Hyperparams,
    seed: u64,
) -> Result<Model> {
    hyperparams.validate(kind)?;
    let parameters = match kind {
        ModelKind::DecisionTree => {
            ModelParameters::DecisionTree(tree::fit(dataset, hyperparams.max_depth))
        }
        ModelKind::LogisticRegression => ModelParameters::LogisticRegression(logistic::fit(
            dataset,
            hyperparams.iterations,
            hyperparams.learning_rate,
        )),
    };
    Ok(Model {
        kind,
        parameters,
        train_seed: seed,
        dataset_fingerprint: dataset.fingerprint(),
    })
}

/// Schema-checked prediction with class name.
pub fn predict(model: &Model, instance: &Instance) -> Result<Prediction> {
    model.schema().check(instance.values())?;
    Ok(Prediction::from_probabilities(
        model.predict_proba(instance.values()),
        model.class_names(),
    ))
}

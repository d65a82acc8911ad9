//! One-vs-all logistic regression trained by full-batch gradient descent.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ModelSchema;
use crate::dataset::{Dataset, FeatureKind};
use crate::math;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub schema: ModelSchema,
    /// Training mean per continuous feature (unused slots for categoricals).
    pub means: Vec<f64>,
    /// Training standard deviation per continuous feature, 1 when constant.
    pub scales: Vec<f64>,
    /// One row per class over the encoded inputs.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + math::exp(-z))
}

impl LogisticParams {
    /// All-zero weights and biases.
    pub fn zeros(schema: ModelSchema, dataset: &Dataset) -> Self {
        let (means, scales) = standardization(dataset);
        let dim = encoded_dim(&schema);
        let k = schema.class_names.len();
        Self {
            schema,
            means,
            scales,
            weights: vec![vec![0.0; dim]; k],
            biases: vec![0.0; k],
        }
    }

    /// Standardized continuous values followed by one-hot categoricals.
    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(encoded_dim(&self.schema));
        for (j, &v) in x.iter().enumerate() {
            match self.schema.feature_kinds[j] {
                FeatureKind::Continuous => out.push((v - self.means[j]) / self.scales[j]),
                FeatureKind::Categorical => {
                    for c in 0..self.schema.n_categories[j] {
                        out.push(if v == c as f64 { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        out
    }

    fn scores(&self, encoded: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| b + w.iter().zip(encoded).map(|(a, x)| a * x).sum::<f64>())
            .collect()
    }

    /// Softmax over the one-vs-all scores.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let scores = self.scores(&self.encode(x));
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| math::exp(s - max)).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }
}

fn encoded_dim(schema: &ModelSchema) -> usize {
    schema
        .feature_kinds
        .iter()
        .zip(&schema.n_categories)
        .map(|(k, &n)| match k {
            FeatureKind::Continuous => 1,
            FeatureKind::Categorical => n,
        })
        .sum()
}

fn standardization(dataset: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let n = dataset.len() as f64;
    let m = dataset.n_features();
    let mut means = vec![0.0; m];
    let mut scales = vec![1.0; m];
    for j in 0..m {
        if dataset.features()[j].is_categorical() {
            continue;
        }
        let mean = dataset.rows().iter().map(|r| r[j]).sum::<f64>() / n;
        let var = dataset.rows().iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n;
        means[j] = mean;
        let sd = math::sqrt(var);
        scales[j] = if sd > 1e-12 { sd } else { 1.0 };
    }
    (means, scales)
}

pub(super) fn fit(dataset: &Dataset, iterations: usize, learning_rate: f64) -> LogisticParams {
    let mut params = LogisticParams::zeros(ModelSchema::of(dataset), dataset);
    let encoded: Vec<Vec<f64>> = dataset.rows().iter().map(|r| params.encode(r)).collect();
    let n = encoded.len() as f64;
    let dim = params.weights[0].len();
    for class in 0..dataset.n_classes() {
        let targets: Vec<f64> = dataset
            .labels()
            .iter()
            .map(|&l| if l == class { 1.0 } else { 0.0 })
            .collect();
        let mut w = vec![0.0; dim];
        let mut b = 0.0;
        for _ in 0..iterations {
            let mut grad_w = vec![0.0; dim];
            let mut grad_b = 0.0;
            for (x, &y) in encoded.iter().zip(&targets) {
                let z = b + w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
                let err = sigmoid(z) - y;
                grad_b += err;
                for (g, v) in grad_w.iter_mut().zip(x) {
                    *g += err * v;
                }
            }
            b -= learning_rate * grad_b / n;
            for (wk, g) in w.iter_mut().zip(&grad_w) {
                *wk -= learning_rate * g / n;
            }
        }
        params.weights[class] = w;
        params.biases[class] = b;
    }
    params
}

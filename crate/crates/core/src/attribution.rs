use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributionMethod {
    Lime,
    Shap,
}

/// Signed per-feature contributions to one class output, relative to a base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub target_class: usize,
    /// Present for contrastive attributions: the class contrasted against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foil_class: Option<usize>,
    /// Surrogate intercept (LIME) or background expectation (SHAP).
    pub base_value: f64,
    pub contributions: Vec<f64>,
    pub method: AttributionMethod,
    pub seed: u64,
    /// Perturbed samples (LIME) or evaluated coalitions (SHAP).
    pub sample_count: usize,
}

impl Attribution {
    pub fn total(&self) -> f64 {
        self.base_value + self.contributions.iter().sum::<f64>()
    }

    /// Feature with the largest absolute contribution, lowest index on ties.
    pub fn top_feature(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (j, c) in self.contributions.iter().enumerate() {
            if best.is_none_or(|b| c.abs() > self.contributions[b].abs()) {
                best = Some(j);
            }
        }
        best
    }

    /// Feature indices ordered by descending absolute contribution.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.contributions.len()).collect();
        order.sort_by(|&a, &b| {
            self.contributions[b]
                .abs()
                .total_cmp(&self.contributions[a].abs())
                .then(a.cmp(&b))
        });
        order
    }
}

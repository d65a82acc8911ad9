//! Shapley-value attributions with marginal (interventional) imputation.
//!
//! Exact enumeration over all coalitions is used up to
//! [`ShapConfig::exact_max_features`]; beyond that a kernel-weighted least
//! squares estimate over sampled coalitions takes over.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attribution::{Attribution, AttributionMethod};
use crate::dataset::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::linalg::weighted_least_squares;
use crate::model::Predictor;

/// Default number of background rows drawn from the training data.
pub const DEFAULT_BACKGROUND_SIZE: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapConfig {
    /// Rows supplying values for features outside a coalition.
    pub background: Vec<Vec<f64>>,
    pub exact_max_features: usize,
    pub n_coalition_samples: usize,
}

impl ShapConfig {
    pub fn new(background: Vec<Vec<f64>>) -> Self {
        Self {
            background,
            exact_max_features: 12,
            n_coalition_samples: 2048,
        }
    }

    /// Default configuration with a seeded background sample of `dataset`.
    pub fn from_dataset(dataset: &Dataset, seed: u64) -> Self {
        Self::new(sample_background(dataset, DEFAULT_BACKGROUND_SIZE, seed))
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.background.is_empty() {
            return Err(Error::Config("background must hold at least one row".into()));
        }
        if let Some(row) = self.background.iter().find(|r| r.len() != n_features) {
            return Err(Error::Dimension {
                expected: n_features,
                actual: row.len(),
            });
        }
        if self.exact_max_features == 0 {
            return Err(Error::Config("exact_max_features must be at least 1".into()));
        }
        Ok(())
    }
}

/// `k` distinct rows drawn without replacement (all rows when `k >= n`).
pub fn sample_background(dataset: &Dataset, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = dataset.len();
    if k >= n {
        return dataset.rows().to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, n, k).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| dataset.rows()[i].clone()).collect()
}

fn check_call<P: Predictor + ?Sized>(
    model: &P,
    instance: &Instance,
    target_class: usize,
    config: &ShapConfig,
) -> Result<usize> {
    let m = instance.len();
    if model.n_features() != m {
        return Err(Error::Dimension {
            expected: model.n_features(),
            actual: m,
        });
    }
    if target_class >= model.n_classes() {
        return Err(Error::Config(format!(
            "target class {target_class} out of range for {} classes",
            model.n_classes()
        )));
    }
    config.validate(m)?;
    Ok(m)
}

fn masked_value<P: Predictor + ?Sized>(
    model: &P,
    x: &[f64],
    mask: u64,
    background: &[Vec<f64>],
    target_class: usize,
) -> f64 {
    let mut buf = vec![0.0; x.len()];
    let mut total = 0.0;
    for row in background {
        for j in 0..x.len() {
            buf[j] = if mask >> j & 1 == 1 { x[j] } else { row[j] };
        }
        total += model.score(&buf, target_class);
    }
    total / background.len() as f64
}

/// Mean target output with coalition features taken from the instance and the
/// rest from each background row.
pub fn value_function<P: Predictor + ?Sized>(
    model: &P,
    instance: &Instance,
    target_class: usize,
    coalition: &[usize],
    background: &[Vec<f64>],
) -> Result<f64> {
    if background.is_empty() {
        return Err(Error::Config("background must hold at least one row".into()));
    }
    let m = instance.len();
    if m > 64 {
        return Err(Error::Config("at most 64 features are supported".into()));
    }
    let mut mask = 0u64;
    for &j in coalition {
        if j >= m {
            return Err(Error::Dimension {
                expected: m,
                actual: j + 1,
            });
        }
        mask |= 1 << j;
    }
    Ok(masked_value(model, instance.values(), mask, background, target_class))
}

/// `s!(M-s-1)!/M!` without factorials.
fn shapley_weight(m: usize, s: usize) -> f64 {
    1.0 / (m as f64 * binomial(m - 1, s))
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Exact Shapley values by enumerating all `2^M` coalitions.
///
/// Falls back to [`shap_kernel`] (seed 0) when `M` exceeds
/// `exact_max_features`.
pub fn shap_exact<P: Predictor + ?Sized>(
    model: &P,
    instance: &Instance,
    target_class: usize,
    config: &ShapConfig,
) -> Result<Attribution> {
    let m = check_call(model, instance, target_class, config)?;
    if m > config.exact_max_features || m > 30 {
        return shap_kernel(model, instance, target_class, config, 0);
    }
    let x = instance.values();
    let n_masks = 1usize << m;
    let values: Vec<f64> = (0..n_masks as u64)
        .map(|mask| masked_value(model, x, mask, &config.background, target_class))
        .collect();
    let weights: Vec<f64> = (0..m).map(|s| shapley_weight(m, s)).collect();
    let mut contributions = vec![0.0; m];
    for (j, phi) in contributions.iter_mut().enumerate() {
        let bit = 1usize << j;
        for mask in 0..n_masks {
            if mask & bit == 0 {
                let s = mask.count_ones() as usize;
                *phi += weights[s] * (values[mask | bit] - values[mask]);
            }
        }
    }
    Ok(Attribution {
        target_class,
        foil_class: None,
        base_value: values[0],
        contributions,
        method: AttributionMethod::Shap,
        seed: 0,
        sample_count: n_masks,
    })
}

/// Kernel SHAP weight `(M-1) / (C(M,s)·s·(M-s))` for `1 <= s <= M-1`.
///
/// The empty and full coalitions carry infinite weight and are enforced as
/// constraints instead, reported here as a domain error.
pub fn shap_kernel_weight(m: usize, s: usize) -> Result<f64> {
    if s == 0 || s >= m {
        return Err(Error::Domain(format!(
            "coalition size {s} of {m} is a constraint coalition, not a weighted one"
        )));
    }
    Ok((m - 1) as f64 / (binomial(m, s) * s as f64 * (m - s) as f64))
}

/// Kernel SHAP: constrained weighted least squares over coalitions.
///
/// All non-trivial coalitions are enumerated when there are at most
/// `n_coalition_samples` of them; otherwise coalition sizes are drawn in
/// proportion to their total kernel mass and members uniformly.
pub fn shap_kernel<P: Predictor + ?Sized>(
    model: &P,
    instance: &Instance,
    target_class: usize,
    config: &ShapConfig,
    seed: u64,
) -> Result<Attribution> {
    let m = check_call(model, instance, target_class, config)?;
    if m > 64 {
        return Err(Error::Config("at most 64 features are supported".into()));
    }
    let x = instance.values();
    let bg = &config.background;
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let v_empty = masked_value(model, x, 0, bg, target_class);
    let v_full = masked_value(model, x, full, bg, target_class);
    let delta = v_full - v_empty;
    let attribution = |contributions: Vec<f64>, sample_count: usize| Attribution {
        target_class,
        foil_class: None,
        base_value: v_empty,
        contributions,
        method: AttributionMethod::Shap,
        seed,
        sample_count,
    };
    if m == 1 {
        return Ok(attribution(vec![delta], 2));
    }

    let mut coalitions: Vec<(u64, f64)> = Vec::new();
    let enumerate = m < 63 && (1u64 << m) - 2 <= config.n_coalition_samples as u64;
    if enumerate {
        for mask in 1..full {
            let s = mask.count_ones() as usize;
            coalitions.push((mask, shap_kernel_weight(m, s)?));
        }
    } else {
        if config.n_coalition_samples == 0 {
            return Err(Error::Config("n_coalition_samples must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size_mass: Vec<f64> = (1..m)
            .map(|s| (m - 1) as f64 / (s * (m - s)) as f64)
            .collect();
        let total_mass: f64 = size_mass.iter().sum();
        for _ in 0..config.n_coalition_samples {
            let mut u = rng.gen::<f64>() * total_mass;
            let mut s = m - 1;
            for (i, w) in size_mass.iter().enumerate() {
                if u < *w {
                    s = i + 1;
                    break;
                }
                u -= w;
            }
            let mut mask = 0u64;
            for j in index::sample(&mut rng, m, s).into_iter() {
                mask |= 1 << j;
            }
            coalitions.push((mask, 1.0));
        }
    }

    // eliminate the last feature through the efficiency constraint
    let last = m - 1;
    let mut memo: BTreeMap<u64, f64> = BTreeMap::new();
    let mut design = Vec::with_capacity(coalitions.len());
    let mut targets = Vec::with_capacity(coalitions.len());
    let mut weights = Vec::with_capacity(coalitions.len());
    for &(mask, w) in &coalitions {
        let v = *memo
            .entry(mask)
            .or_insert_with(|| masked_value(model, x, mask, bg, target_class));
        let z_last = (mask >> last & 1) as f64;
        design.push((0..last).map(|j| (mask >> j & 1) as f64 - z_last).collect::<Vec<f64>>());
        targets.push(v - v_empty - z_last * delta);
        weights.push(w);
    }
    let mut phi = weighted_least_squares(&design, &targets, &weights)?;
    let rest: f64 = phi.iter().sum();
    phi.push(delta - rest);
    Ok(attribution(phi, memo.len() + 2))
}

/// Exact SHAP when the feature count allows it, kernel SHAP otherwise.
pub fn shap_explain<P: Predictor + ?Sized>(
    model: &P,
    instance: &Instance,
    target_class: usize,
    config: &ShapConfig,
    seed: u64,
) -> Result<Attribution> {
    if instance.len() <= config.exact_max_features {
        let mut a = shap_exact(model, instance, target_class, config)?;
        a.seed = seed;
        Ok(a)
    } else {
        shap_kernel(model, instance, target_class, config, seed)
    }
}

/// Mean absolute attribution per feature over a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub target_class: usize,
    /// In feature order.
    pub importances: Vec<f64>,
    /// Feature indices by descending importance.
    pub ranking: Vec<usize>,
}

pub fn shap_global_importance<P: Predictor + ?Sized>(
    model: &P,
    dataset: &Dataset,
    target_class: usize,
    config: &ShapConfig,
) -> Result<GlobalImportance> {
    if dataset.is_empty() {
        return Err(Error::DegenerateDataset("dataset has no rows".into()));
    }
    let m = dataset.n_features();
    let mut sums = vec![0.0; m];
    for row in dataset.rows() {
        let a = shap_explain(model, &Instance(row.clone()), target_class, config, 0)?;
        for (s, c) in sums.iter_mut().zip(&a.contributions) {
            *s += c.abs();
        }
    }
    let importances: Vec<f64> = sums.iter().map(|s| s / dataset.len() as f64).collect();
    let mut ranking: Vec<usize> = (0..m).collect();
    ranking.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]).then(a.cmp(&b)));
    Ok(GlobalImportance {
        target_class,
        importances,
        ranking,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfallStep {
    pub label: String,
    pub feature: usize,
    pub delta: f64,
    pub cumulative_after: f64,
}

/// Waterfall chart data: from the base value through each contribution to the
/// prediction, largest contributions first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfallSeries {
    pub start: f64,
    pub end: f64,
    pub steps: Vec<WaterfallStep>,
}

pub fn waterfall_series(
    attribution: &Attribution,
    prediction: f64,
    feature_names: &[String],
) -> Result<WaterfallSeries> {
    if attribution
        .contributions
        .iter()
        .chain(core::iter::once(&attribution.base_value))
        .any(|v| !v.is_finite())
    {
        return Err(Error::Domain("attribution contains non-finite values".into()));
    }
    let gap = (attribution.total() - prediction).abs();
    if !(gap <= 1e-4) {
        return Err(Error::EfficiencyViolation { gap });
    }
    let mut cumulative = attribution.base_value;
    let steps = attribution
        .ranking()
        .into_iter()
        .map(|j| {
            let delta = attribution.contributions[j];
            cumulative += delta;
            WaterfallStep {
                label: feature_names
                    .get(j)
                    .cloned()
                    .unwrap_or_else(|| format!("x{}", j + 1)),
                feature: j,
                delta,
                cumulative_after: cumulative,
            }
        })
        .collect();
    Ok(WaterfallSeries {
        start: attribution.base_value,
        end: prediction,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FnPredictor;

    fn additive() -> FnPredictor {
        FnPredictor::new(2, 1, |x| vec![x[0] + x[1]])
    }

    #[test]
    fn value_function_cases() {
        let model = additive();
        let inst = Instance(vec![3.0, 5.0]);
        let bg = vec![vec![0.0, 0.0]];
        assert_eq!(value_function(&model, &inst, 0, &[0, 1], &bg).unwrap(), 8.0);
        assert_eq!(value_function(&model, &inst, 0, &[], &bg).unwrap(), 0.0);
        assert_eq!(value_function(&model, &inst, 0, &[0], &bg).unwrap(), 3.0);
        assert!(matches!(
            value_function(&model, &inst, 0, &[0], &[]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn additive_model_exact() {
        let cfg = ShapConfig::new(vec![vec![0.0, 0.0]]);
        let a = shap_exact(&additive(), &Instance(vec![3.0, 5.0]), 0, &cfg).unwrap();
        assert_eq!(a.contributions, vec![3.0, 5.0]);
        assert_eq!(a.base_value, 0.0);
    }

    #[test]
    fn constant_model_is_dummy() {
        let model = FnPredictor::new(3, 1, |_| vec![0.42]);
        let cfg = ShapConfig::new(vec![vec![1.0, 2.0, 3.0], vec![0.0, 0.0, 0.0]]);
        let inst = Instance(vec![5.0, 5.0, 5.0]);
        let a = shap_exact(&model, &inst, 0, &cfg).unwrap();
        assert!(a.contributions.iter().all(|c| *c == 0.0));
        assert_eq!(a.base_value, 0.42);
        let k = shap_kernel(&model, &inst, 0, &cfg, 1).unwrap();
        assert!(k.contributions.iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn kernel_weights() {
        assert_eq!(shap_kernel_weight(4, 1).unwrap(), 0.25);
        assert_eq!(shap_kernel_weight(4, 2).unwrap(), 0.125);
        assert_eq!(shap_kernel_weight(2, 1).unwrap(), 0.5);
        assert!(shap_kernel_weight(4, 0).is_err());
        assert!(shap_kernel_weight(4, 4).is_err());
    }

    #[test]
    fn sampled_kernel_is_deterministic_and_efficient() {
        let model = FnPredictor::new(14, 1, |x| vec![x.iter().enumerate().map(|(j, v)| (j as f64 + 1.0) * v).sum::<f64>() + x[0] * x[1]]);
        let mut cfg = ShapConfig::new(vec![vec![0.0; 14], vec![1.0; 14]]);
        cfg.n_coalition_samples = 600;
        let inst = Instance((0..14).map(|j| j as f64 * 0.1).collect());
        let a = shap_explain(&model, &inst, 0, &cfg, 4).unwrap();
        let b = shap_explain(&model, &inst, 0, &cfg, 4).unwrap();
        assert_eq!(a, b);
        let full = model.score(inst.values(), 0);
        assert!((a.total() - full).abs() < 1e-9);
    }

    #[test]
    fn waterfall_telescopes() {
        let a = Attribution {
            target_class: 0,
            foil_class: None,
            base_value: 0.0,
            contributions: vec![3.0, 5.0],
            method: AttributionMethod::Shap,
            seed: 0,
            sample_count: 4,
        };
        let names = vec!["x1".into(), "x2".into()];
        let w = waterfall_series(&a, 8.0, &names).unwrap();
        assert_eq!(w.steps[0].label, "x2");
        assert_eq!(w.steps[0].cumulative_after, 5.0);
        assert_eq!(w.steps[1].cumulative_after, 8.0);
        assert_eq!(w.start, 0.0);
        assert_eq!(w.end, 8.0);
        assert!(matches!(
            waterfall_series(&a, 9.0, &names),
            Err(Error::EfficiencyViolation { .. })
        ));
    }

    #[test]
    fn flat_waterfall() {
        let a = Attribution {
            target_class: 0,
            foil_class: None,
            base_value: 0.4,
            contributions: vec![0.0, 0.0, 0.0],
            method: AttributionMethod::Shap,
            seed: 0,
            sample_count: 8,
        };
        let w = waterfall_series(&a, 0.4, &[]).unwrap();
        assert_eq!(w.start, w.end);
        assert!(w.steps.iter().all(|s| s.cumulative_after == 0.4));
    }
}

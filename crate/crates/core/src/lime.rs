//! Local surrogate explanations: a weighted ridge regression fitted to model
//! outputs on perturbed neighbours of the explained instance.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attribution::{Attribution, AttributionMethod};
use crate::dataset::{FeatureMeta, Instance};
use crate::error::{Error, Result};
use crate::linalg::weighted_ridge_fit;
use crate::math;
use crate::model::Predictor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimeConfig {
    pub n_samples: usize,
    /// Kernel width over standardized distances; `None` means `0.75·sqrt(M)`.
    pub kernel_width: Option<f64>,
    pub ridge_lambda: f64,
    /// Regress on "same quartile bin as the instance" indicators. When off,
    /// continuous columns are standardized offsets from the instance.
    pub discretize: bool,
}

impl Default for LimeConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            kernel_width: None,
            ridge_lambda: 1.0,
            discretize: true,
        }
    }
}

impl LimeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 10 {
            return Err(Error::Config(format!(
                "n_samples must be at least 10, got {}",
                self.n_samples
            )));
        }
        if !(self.ridge_lambda >= 0.0) {
            return Err(Error::Config("ridge_lambda must be >= 0".into()));
        }
        if let Some(w) = self.kernel_width {
            if !(w > 0.0) {
                return Err(Error::Config("kernel_width must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn width_for(&self, n_features: usize) -> f64 {
        self.kernel_width
            .unwrap_or_else(|| 0.75 * math::sqrt(n_features as f64))
    }
}

/// Exponential kernel `exp(-d² / width²)`.
pub fn lime_kernel_weight(distance: f64, width: f64) -> Result<f64> {
    if !(width > 0.0) {
        return Err(Error::Config(format!("kernel width must be positive, got {width}")));
    }
    if !(distance >= 0.0) {
        return Err(Error::Domain(format!("distance must be >= 0, got {distance}")));
    }
    Ok(math::exp(-(distance * distance) / (width * width)))
}

/// Euclidean distance after dividing each continuous offset by the feature's
/// standard deviation; categorical mismatches count 1.
pub fn standardized_distance(features: &[FeatureMeta], a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for ((meta, &x), &y) in features.iter().zip(a).zip(b) {
        let d = if meta.is_categorical() {
            if x == y {
                0.0
            } else {
                1.0
            }
        } else if meta.std_dev > 0.0 {
            (x - y) / meta.std_dev
        } else {
            0.0
        };
        sum += d * d;
    }
    math::sqrt(sum)
}

fn uniform_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    // (lo, hi] so the draw stays inside a left-open bin
    let u: f64 = rng.gen();
    hi - u * (hi - lo)
}

/// Draws one perturbation of `x`; returns the sample and its keep mask.
pub(crate) fn perturb(
    features: &[FeatureMeta],
    x: &[f64],
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<bool>) {
    let mut sample = Vec::with_capacity(x.len());
    let mut kept = Vec::with_capacity(x.len());
    for (meta, &v) in features.iter().zip(x) {
        let keep = rng.gen_bool(0.5);
        let n_bins = meta.n_bins();
        let own = meta.bin_of(v).min(n_bins - 1);
        if keep || n_bins < 2 {
            kept.push(true);
            if meta.is_categorical() {
                sample.push(v);
            } else {
                let (lo, hi) = meta.bin_interval(own);
                sample.push(uniform_in(rng, lo, hi));
            }
        } else {
            kept.push(false);
            let mut other = rng.gen_range(0..n_bins - 1);
            if other >= own {
                other += 1;
            }
            if meta.is_categorical() {
                sample.push(other as f64);
            } else {
                let (lo, hi) = meta.bin_interval(other);
                sample.push(uniform_in(rng, lo, hi));
            }
        }
    }
    (sample, kept)
}

/// Fits the local surrogate for `target_class` around `instance`.
pub fn lime_explain<P: Predictor + ?Sized>(
    model: &P,
    features: &[FeatureMeta],
    instance: &Instance,
    target_class: usize,
    config: &LimeConfig,
    seed: u64,
) -> Result<Attribution> {
    config.validate()?;
    instance.validate(features)?;
    if model.n_features() != features.len() {
        return Err(Error::Dimension {
            expected: model.n_features(),
            actual: features.len(),
        });
    }
    if target_class >= model.n_classes() {
        return Err(Error::Config(format!(
            "target class {target_class} out of range for {} classes",
            model.n_classes()
        )));
    }
    let x = instance.values();
    let width = config.width_for(features.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut design = Vec::with_capacity(config.n_samples);
    let mut targets = Vec::with_capacity(config.n_samples);
    let mut weights = Vec::with_capacity(config.n_samples);
    for _ in 0..config.n_samples {
        let (sample, kept) = perturb(features, x, &mut rng);
        let row: Vec<f64> = features
            .iter()
            .enumerate()
            .map(|(j, meta)| {
                if config.discretize || meta.is_categorical() {
                    if kept[j] {
                        1.0
                    } else {
                        0.0
                    }
                } else if meta.std_dev > 0.0 {
                    (sample[j] - x[j]) / meta.std_dev
                } else {
                    0.0
                }
            })
            .collect();
        weights.push(lime_kernel_weight(
            standardized_distance(features, &sample, x),
            width,
        )?);
        targets.push(model.score(&sample, target_class));
        design.push(row);
    }
    let fit = weighted_ridge_fit(&design, &targets, &weights, config.ridge_lambda)?;
    Ok(Attribution {
        target_class,
        foil_class: None,
        base_value: fit.intercept,
        contributions: fit.coefficients,
        method: AttributionMethod::Lime,
        seed,
        sample_count: config.n_samples,
    })
}

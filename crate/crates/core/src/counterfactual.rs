//! "What if" re-prediction and genetic search for diverse counterfactuals.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureMeta, Instance};
use crate::error::{Error, Result};
use crate::math;
use crate::model::{Prediction, Predictor};

/// Floor applied to the median absolute deviation of continuous features.
pub const MAD_FLOOR: f64 = 1e-6;

const TOURNAMENT_SIZE: usize = 3;
const MUTATION_RATE: f64 = 0.3;
const ELITES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterfactual {
    pub instance: Instance,
    pub probabilities: Vec<f64>,
    /// The model assigns `desired_class` to `instance`.
    pub valid: bool,
    /// MAD-normalized L1 distance to the original.
    pub proximity: f64,
    /// Number of changed features.
    pub sparsity: usize,
    pub desired_class: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CfConfig {
    pub k: usize,
    pub lambda_proximity: f64,
    pub lambda_diversity: f64,
    pub population: usize,
    pub generations: usize,
    pub immutable_features: Vec<usize>,
}

impl Default for CfConfig {
    fn default() -> Self {
        Self {
            k: 3,
            lambda_proximity: 0.5,
            lambda_diversity: 1.0,
            population: 200,
            generations: 100,
            immutable_features: Vec::new(),
        }
    }
}

impl CfConfig {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.lambda_proximity >= 0.0) || !(self.lambda_diversity >= 0.0) {
            return Err(Error::Config("objective weights must be >= 0".into()));
        }
        if self.population < 2 * self.k {
            return Err(Error::Config(format!(
                "population must be at least 2k = {}",
                2 * self.k
            )));
        }
        if let Some(&j) = self.immutable_features.iter().find(|&&j| j >= n_features) {
            return Err(Error::Config(format!("immutable feature {j} does not exist")));
        }
        Ok(())
    }
}

/// Replaces selected feature values and re-predicts. Every edit must stay
/// inside the feature's declared range or category list.
pub fn what_if<P: Predictor + ?Sized>(
    model: &P,
    features: &[FeatureMeta],
    class_names: &[String],
    instance: &Instance,
    edits: &[(usize, f64)],
) -> Result<(Instance, Prediction)> {
    instance.validate(features)?;
    let mut values = instance.values().to_vec();
    for &(j, v) in edits {
        let meta = features.get(j).ok_or(Error::Dimension {
            expected: features.len(),
            actual: j + 1,
        })?;
        meta.check_value(v)?;
        values[j] = v;
    }
    let probabilities = model.predict_proba(&values);
    Ok((
        Instance(values),
        Prediction::from_probabilities(probabilities, class_names),
    ))
}

/// `Σ |a_j - b_j| / MAD_j` over continuous features plus one per changed category.
pub fn proximity(features: &[FeatureMeta], a: &[f64], b: &[f64]) -> f64 {
    features
        .iter()
        .zip(a.iter().zip(b))
        .map(|(meta, (&x, &y))| {
            if meta.is_categorical() {
                if x == y {
                    0.0
                } else {
                    1.0
                }
            } else {
                (x - y).abs() / meta.mad_floored(MAD_FLOOR)
            }
        })
        .sum()
}

/// Hinge on the class margin plus weighted proximity and diversity terms.
///
/// The diversity penalty is the mean of `exp(-proximity(candidate, peer))`
/// over `peers`, 0 when there are none.
pub fn cf_objective<P: Predictor + ?Sized>(
    candidate: &[f64],
    original: &[f64],
    model: &P,
    desired_class: usize,
    features: &[FeatureMeta],
    config: &CfConfig,
    peers: &[&[f64]],
) -> f64 {
    let p = model.predict_proba(candidate);
    hinge(&p, desired_class)
        + config.lambda_proximity * proximity(features, candidate, original)
        + config.lambda_diversity * diversity_penalty(features, candidate, peers)
}

fn hinge(p: &[f64], desired: usize) -> f64 {
    let rival = p
        .iter()
        .enumerate()
        .filter(|(c, _)| *c != desired)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    (0.5 + rival - p[desired]).max(0.0)
}

fn diversity_penalty(features: &[FeatureMeta], candidate: &[f64], peers: &[&[f64]]) -> f64 {
    if peers.is_empty() {
        return 0.0;
    }
    peers
        .iter()
        .map(|peer| math::exp(-proximity(features, candidate, peer)))
        .sum::<f64>()
        / peers.len() as f64
}

struct Genetic<'a, P: ?Sized> {
    model: &'a P,
    features: &'a [FeatureMeta],
    original: &'a [f64],
    desired: usize,
    mutable: Vec<bool>,
    rng: ChaCha8Rng,
}

impl<P: Predictor + ?Sized> Genetic<'_, P> {
    fn random_value(&mut self, j: usize) -> f64 {
        let meta = &self.features[j];
        match meta.categories() {
            Some(c) => self.rng.gen_range(0..c.len()) as f64,
            None => {
                let (lo, hi) = (meta.min(), meta.max());
                if hi > lo {
                    lo + self.rng.gen::<f64>() * (hi - lo)
                } else {
                    lo
                }
            }
        }
    }

    fn mutate(&mut self, x: &mut [f64]) {
        for j in 0..x.len() {
            if self.mutable[j] && self.rng.gen_bool(MUTATION_RATE) {
                x[j] = self.random_value(j);
            }
        }
    }

    fn pin_immutable(&self, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            if !self.mutable[j] {
                *v = self.original[j];
            }
        }
    }

    fn describe(&self, x: &[f64]) -> Counterfactual {
        let probabilities = self.model.predict_proba(x);
        Counterfactual {
            valid: math::argmax(&probabilities) == self.desired,
            probabilities,
            proximity: proximity(self.features, x, self.original),
            sparsity: x.iter().zip(self.original).filter(|(a, b)| a != b).count(),
            desired_class: self.desired,
            instance: Instance(x.to_vec()),
        }
    }

    fn tournament(&mut self, fitness: &[f64]) -> usize {
        let mut best = self.rng.gen_range(0..fitness.len());
        for _ in 1..TOURNAMENT_SIZE {
            let c = self.rng.gen_range(0..fitness.len());
            if fitness[c] < fitness[best] {
                best = c;
            }
        }
        best
    }
}

fn ranks_before(a: &Counterfactual, b: &Counterfactual) -> core::cmp::Ordering {
    b.valid
        .cmp(&a.valid)
        .then(a.proximity.total_cmp(&b.proximity))
        .then(a.sparsity.cmp(&b.sparsity))
}

fn offer(archive: &mut Vec<Counterfactual>, cf: Counterfactual, k: usize) {
    if archive.iter().any(|c| c.instance == cf.instance) {
        return;
    }
    if archive.len() == k {
        if ranks_before(&cf, archive.last().unwrap()).is_ge() {
            return;
        }
        archive.pop();
    }
    let at = archive
        .iter()
        .position(|c| ranks_before(&cf, c).is_lt())
        .unwrap_or(archive.len());
    archive.insert(at, cf);
}

/// Seeded genetic search for up to `k` distinct counterfactuals, ranked valid
/// first and then by proximity. Candidates that do not reach the desired class
/// are still returned, flagged `valid = false`.
pub fn generate_counterfactuals<P: Predictor + ?Sized>(
    model: &P,
    instance: &Instance,
    desired_class: usize,
    dataset: &Dataset,
    config: &CfConfig,
    seed: u64,
) -> Result<Vec<Counterfactual>> {
    let features = dataset.features();
    config.validate(features.len())?;
    instance.validate(features)?;
    if model.n_features() != features.len() {
        return Err(Error::Dimension {
            expected: model.n_features(),
            actual: features.len(),
        });
    }
    if desired_class >= model.n_classes() {
        return Err(Error::Config(format!(
            "desired class {desired_class} out of range for {} classes",
            model.n_classes()
        )));
    }
    let original = instance.values();
    if model.predict_class(original) == desired_class {
        return Err(Error::SameClass {
            class: desired_class,
        });
    }
    let mut mutable: Vec<bool> = alloc::vec![true; features.len()];
    for &j in &config.immutable_features {
        mutable[j] = false;
    }
    let mut ga = Genetic {
        model,
        features,
        original,
        desired: desired_class,
        mutable,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };

    let mut population: Vec<Vec<f64>> = Vec::with_capacity(config.population);
    for (row, &label) in dataset.rows().iter().zip(dataset.labels()) {
        if population.len() >= config.population / 2 {
            break;
        }
        if label == desired_class {
            let mut x = row.clone();
            ga.pin_immutable(&mut x);
            population.push(x);
        }
    }
    while population.len() < config.population {
        let mut x = original.to_vec();
        ga.mutate(&mut x);
        population.push(x);
    }

    let mut archive: Vec<Counterfactual> = Vec::with_capacity(config.k);
    for generation in 0..=config.generations {
        let peers: Vec<Vec<f64>> = archive.iter().map(|c| c.instance.0.clone()).collect();
        let fitness: Vec<f64> = population
            .iter()
            .map(|x| {
                let others: Vec<&[f64]> = peers
                    .iter()
                    .filter(|p| p.as_slice() != x.as_slice())
                    .map(|p| p.as_slice())
                    .collect();
                cf_objective(x, original, model, desired_class, features, config, &others)
            })
            .collect();
        for x in &population {
            offer(&mut archive, ga.describe(x), config.k);
        }
        if generation == config.generations {
            break;
        }

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
        let mut next: Vec<Vec<f64>> = order
            .iter()
            .take(ELITES.min(population.len()))
            .map(|&i| population[i].clone())
            .collect();
        let m = features.len();
        while next.len() < config.population {
            let a = ga.tournament(&fitness);
            let b = ga.tournament(&fitness);
            let mut child = if m > 1 {
                let cut = ga.rng.gen_range(1..m);
                let mut c = population[a][..cut].to_vec();
                c.extend_from_slice(&population[b][cut..]);
                c
            } else {
                population[a].clone()
            };
            ga.mutate(&mut child);
            next.push(child);
        }
        population = next;
    }
    Ok(archive)
}

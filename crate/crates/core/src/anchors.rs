//! Anchor rules: predicate conjunctions over the instance's own feature bins
//! whose precision is certified by KL confidence bounds inside a beam search.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{format_number, Dataset, FeatureMeta, Instance};
use crate::error::{Error, Result};
use crate::math;
use crate::model::Predictor;

/// `KL(Bernoulli(p) || Bernoulli(q))` with `0·ln 0 = 0`.
pub fn bernoulli_kl(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("kl({p}, {q}) needs both arguments in [0, 1]")));
    }
    Ok(kl(p, q))
}

fn kl(p: f64, q: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    if q == 0.0 || q == 1.0 {
        return f64::INFINITY;
    }
    let mut out = 0.0;
    if p > 0.0 {
        out += p * math::ln(p / q);
    }
    if p < 1.0 {
        out += (1.0 - p) * math::ln((1.0 - p) / (1.0 - q));
    }
    out.max(0.0)
}

/// Lower and upper KL confidence bounds on a Bernoulli mean:
/// the extreme `q` with `n·kl(p̂, q) <= level` on either side of `p̂`.
pub fn kl_confidence_bounds(successes: usize, n: usize, level: f64) -> (f64, f64) {
    let n = n.max(1);
    let p = (successes.min(n)) as f64 / n as f64;
    if !(level > 0.0) {
        return (p, p);
    }
    let budget = level / n as f64;
    let feasible = |q: f64| kl(p, q) <= budget;

    let upper = {
        let (mut lo, mut hi) = (p, 1.0);
        if feasible(hi) {
            hi
        } else {
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    };
    let lower = {
        let (mut lo, mut hi) = (0.0, p);
        if feasible(lo) {
            lo
        } else {
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    };
    (lower, upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateForm {
    /// `lo < x <= hi`; a missing bound is unbounded.
    InBin { lo: Option<f64>, hi: Option<f64> },
    Equals { category: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub feature: usize,
    pub form: PredicateForm,
}

impl Predicate {
    pub fn matches(&self, x: &[f64]) -> bool {
        let v = x[self.feature];
        match self.form {
            PredicateForm::InBin { lo, hi } => {
                lo.is_none_or(|lo| v > lo) && hi.is_none_or(|hi| v <= hi)
            }
            PredicateForm::Equals { category } => v == category,
        }
    }

    /// The predicate "same bin as `x`" for feature `j`, or `None` when the
    /// feature has a single bin.
    pub fn for_instance(features: &[FeatureMeta], x: &[f64], j: usize) -> Option<Self> {
        let meta = &features[j];
        if meta.n_bins() < 2 {
            return None;
        }
        if meta.is_categorical() {
            return Some(Self {
                feature: j,
                form: PredicateForm::Equals { category: x[j] },
            });
        }
        let edges = meta.bin_edges();
        let bin = meta.bin_of(x[j]);
        let last = edges.len() - 2;
        Some(Self {
            feature: j,
            form: PredicateForm::InBin {
                lo: (bin > 0).then(|| edges[bin]),
                hi: (bin < last).then(|| edges[bin + 1]),
            },
        })
    }

    /// `name IN (a, b]` or `name = value`.
    pub fn render(&self, features: &[FeatureMeta]) -> String {
        let meta = &features[self.feature];
        match self.form {
            PredicateForm::InBin { lo, hi } => format!(
                "{} IN ({}, {}]",
                meta.name,
                lo.map_or_else(|| "-inf".into(), format_number),
                hi.map_or_else(|| "inf".into(), format_number)
            ),
            PredicateForm::Equals { category } => {
                format!("{} = {}", meta.name, meta.display_value(category))
            }
        }
    }

    fn sample(&self, meta: &FeatureMeta, rng: &mut ChaCha8Rng) -> f64 {
        match self.form {
            PredicateForm::Equals { category } => category,
            PredicateForm::InBin { lo, hi } => {
                let lo = lo.map_or(meta.min(), |l| l.max(meta.min()));
                let hi = hi.map_or(meta.max(), |h| h.min(meta.max()));
                if hi <= lo {
                    return hi;
                }
                let u: f64 = rng.gen();
                hi - u * (hi - lo)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRule {
    /// Sorted by feature index, one predicate per feature.
    pub predicates: Vec<Predicate>,
    pub precision_estimate: f64,
    pub precision_lower_bound: f64,
    pub coverage: f64,
    pub n_samples_used: usize,
    pub target_class: usize,
    /// Whether the lower bound reached the precision threshold.
    pub meets_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnchorConfig {
    pub tau: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub beam_width: usize,
    pub batch_size: usize,
    /// Longest rule to consider; `None` means the feature count.
    pub max_predicates: Option<usize>,
    /// Sampling cap per candidate rule.
    pub max_samples_per_candidate: usize,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        Self {
            tau: 0.95,
            delta: 0.05,
            epsilon: 0.1,
            beam_width: 4,
            batch_size: 64,
            max_predicates: None,
            max_samples_per_candidate: 10_000,
        }
    }
}

impl AnchorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::Config("tau must be in (0, 1]".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("delta must be in (0, 1)".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::Config("epsilon must be >= 0".into()));
        }
        if self.beam_width == 0 || self.batch_size == 0 || self.max_samples_per_candidate == 0 {
            return Err(Error::Config(
                "beam_width, batch_size and max_samples_per_candidate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Fraction of dataset rows satisfying every predicate.
pub fn rule_coverage(predicates: &[Predicate], dataset: &Dataset) -> f64 {
    if dataset.is_empty() {
        return 0.0;
    }
    let hits = dataset
        .rows()
        .iter()
        .filter(|row| predicates.iter().all(|p| p.matches(row)))
        .count();
    hits as f64 / dataset.len() as f64
}

fn draw_batch<P: Predictor + ?Sized>(
    model: &P,
    dataset: &Dataset,
    predicates: &[Predicate],
    target_class: usize,
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    let m = dataset.n_features();
    let n = dataset.len();
    let mut row = alloc::vec![0.0; m];
    let mut hits = 0;
    for _ in 0..batch_size {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = match predicates.iter().find(|p| p.feature == j) {
                Some(p) => p.sample(&dataset.features()[j], rng),
                None => dataset.rows()[rng.gen_range(0..n)][j],
            };
        }
        if model.predict_class(&row) == target_class {
            hits += 1;
        }
    }
    hits
}

/// Counts how many of `batch_size` synthetic rows drawn under the rule the
/// model assigns to `target_class`.
///
/// Constrained features are uniform inside their predicate; the others are
/// resampled independently from the dataset column.
pub fn sample_under_rule<P: Predictor + ?Sized>(
    model: &P,
    dataset: &Dataset,
    predicates: &[Predicate],
    target_class: usize,
    batch_size: usize,
    seed: u64,
) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_batch(model, dataset, predicates, target_class, batch_size, &mut rng)
}

struct Candidate {
    predicates: Vec<Predicate>,
    successes: usize,
    n: usize,
    coverage: f64,
}

impl Candidate {
    fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.successes as f64 / self.n as f64
        }
    }

    fn bounds(&self, level: f64) -> (f64, f64) {
        if self.n == 0 {
            return (0.0, 1.0);
        }
        kl_confidence_bounds(self.successes, self.n, level)
    }

    fn into_rule(self, level: f64, target_class: usize, tau: f64) -> AnchorRule {
        let (lower, _) = self.bounds(level);
        let estimate = self.mean();
        AnchorRule {
            predicates: self.predicates,
            precision_estimate: estimate,
            precision_lower_bound: lower.min(estimate),
            coverage: self.coverage,
            n_samples_used: self.n,
            target_class,
            meets_threshold: lower >= tau,
        }
    }
}

struct Search<'a, P: ?Sized> {
    model: &'a P,
    dataset: &'a Dataset,
    config: &'a AnchorConfig,
    target_class: usize,
    rng: ChaCha8Rng,
}

impl<P: Predictor + ?Sized> Search<'_, P> {
    fn sample(&mut self, c: &mut Candidate) {
        c.successes += draw_batch(
            self.model,
            self.dataset,
            &c.predicates,
            self.target_class,
            self.config.batch_size,
            &mut self.rng,
        );
        c.n += self.config.batch_size;
    }

    /// Samples until the bounds settle on one side of tau or the cap is hit.
    fn settle(&mut self, c: &mut Candidate, level: f64) {
        let tau = self.config.tau;
        while c.n < self.config.max_samples_per_candidate {
            let (lower, upper) = c.bounds(level);
            if lower >= tau || upper < tau {
                break;
            }
            self.sample(c);
        }
    }

    /// KL-LUCB: indices of the `beam_width` candidates with the best precision.
    fn select_top(&mut self, candidates: &mut [Candidate], level: f64) -> Vec<usize> {
        let b = self.config.beam_width;
        let order = |cs: &[Candidate]| {
            let mut idx: Vec<usize> = (0..cs.len()).collect();
            idx.sort_by(|&x, &y| cs[y].mean().total_cmp(&cs[x].mean()).then(x.cmp(&y)));
            idx
        };
        if candidates.len() <= b {
            return order(candidates);
        }
        let budget = self.config.max_samples_per_candidate * candidates.len();
        loop {
            let idx = order(candidates);
            let (top, rest) = idx.split_at(b);
            let weakest = *top
                .iter()
                .min_by(|&&x, &&y| {
                    candidates[x].bounds(level).0.total_cmp(&candidates[y].bounds(level).0)
                })
                .unwrap();
            let challenger = *rest
                .iter()
                .max_by(|&&x, &&y| {
                    candidates[x]
                        .bounds(level)
                        .1
                        .total_cmp(&candidates[y].bounds(level).1)
                        .then(y.cmp(&x))
                })
                .unwrap();
            let gap = candidates[challenger].bounds(level).1 - candidates[weakest].bounds(level).0;
            let used: usize = candidates.iter().map(|c| c.n).sum();
            if gap <= self.config.epsilon || used >= budget {
                return top.to_vec();
            }
            for i in [weakest, challenger] {
                if candidates[i].n < self.config.max_samples_per_candidate {
                    let mut c = core::mem::replace(&mut candidates[i], Candidate::empty());
                    self.sample(&mut c);
                    candidates[i] = c;
                }
            }
            if candidates[weakest].n >= self.config.max_samples_per_candidate
                && candidates[challenger].n >= self.config.max_samples_per_candidate
            {
                return top.to_vec();
            }
        }
    }
}

impl Candidate {
    fn empty() -> Self {
        Candidate {
            predicates: Vec::new(),
            successes: 0,
            n: 0,
            coverage: 1.0,
        }
    }
}

/// Beam search for the shortest anchor whose precision lower bound reaches
/// `tau`, preferring higher coverage among rules of equal length.
///
/// If no rule reaches `tau` the most precise rule found is returned with
/// `meets_threshold = false`.
pub fn anchors_explain<P: Predictor + ?Sized>(
    model: &P,
    instance: &Instance,
    dataset: &Dataset,
    config: &AnchorConfig,
    seed: u64,
) -> Result<AnchorRule> {
    config.validate()?;
    instance.validate(dataset.features())?;
    if model.n_features() != dataset.n_features() {
        return Err(Error::Dimension {
            expected: model.n_features(),
            actual: dataset.n_features(),
        });
    }
    let x = instance.values();
    let target_class = model.predict_class(x);
    let m = dataset.n_features();
    let max_len = config.max_predicates.unwrap_or(m).min(m);
    let options: Vec<Predicate> = (0..m)
        .filter_map(|j| Predicate::for_instance(dataset.features(), x, j))
        .collect();

    let mut search = Search {
        model,
        dataset,
        config,
        target_class,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };

    let base_level = math::ln(1.0 / config.delta);
    let mut empty = Candidate::empty();
    search.sample(&mut empty);
    search.settle(&mut empty, base_level);
    let empty_rule = empty.into_rule(base_level, target_class, config.tau);
    if empty_rule.meets_threshold {
        return Ok(empty_rule);
    }
    let mut best = empty_rule;

    let mut beam: Vec<Vec<Predicate>> = alloc::vec![Vec::new()];
    for _ in 0..max_len {
        let mut candidates: Vec<Candidate> = Vec::new();
        for rule in &beam {
            for p in &options {
                if rule.iter().any(|q| q.feature == p.feature) {
                    continue;
                }
                let mut preds = rule.clone();
                preds.push(*p);
                preds.sort_by_key(|q| q.feature);
                if candidates.iter().any(|c| c.predicates == preds) {
                    continue;
                }
                let coverage = rule_coverage(&preds, dataset);
                candidates.push(Candidate {
                    predicates: preds,
                    successes: 0,
                    n: 0,
                    coverage,
                });
            }
        }
        if candidates.is_empty() {
            break;
        }
        let level = math::ln(candidates.len() as f64 / config.delta);
        for c in candidates.iter_mut() {
            let mut taken = core::mem::replace(c, Candidate::empty());
            search.sample(&mut taken);
            *c = taken;
        }
        let selected = search.select_top(&mut candidates, level);
        let mut kept = Vec::with_capacity(selected.len());
        for &i in &selected {
            let mut c = core::mem::replace(&mut candidates[i], Candidate::empty());
            search.settle(&mut c, level);
            kept.push(c);
        }
        let rules: Vec<AnchorRule> = kept
            .into_iter()
            .map(|c| c.into_rule(level, target_class, config.tau))
            .collect();
        let winner = rules
            .iter()
            .filter(|r| r.meets_threshold)
            .max_by(|a, b| {
                a.coverage
                    .total_cmp(&b.coverage)
                    .then(a.precision_estimate.total_cmp(&b.precision_estimate))
            });
        if let Some(w) = winner {
            return Ok(w.clone());
        }
        for r in &rules {
            if r.precision_estimate > best.precision_estimate {
                best = r.clone();
            }
        }
        beam = rules.into_iter().map(|r| r.predicates).collect();
        debug_assert!(beam.iter().all(|r| r.len() <= max_len));
    }
    Ok(best)
}

/// `IF <pred> (AND <pred>)* THEN class = <name> (precision ≥ <tau>, coverage <c>)`.
///
/// Rules below the threshold report their estimated precision instead.
pub fn render_rule(
    rule: &AnchorRule,
    features: &[FeatureMeta],
    class_names: &[String],
    tau: f64,
) -> String {
    let body = if rule.predicates.is_empty() {
        String::from("TRUE")
    } else {
        rule.predicates
            .iter()
            .map(|p| p.render(features))
            .collect::<Vec<_>>()
            .join(" AND ")
    };
    let class = class_names
        .get(rule.target_class)
        .cloned()
        .unwrap_or_else(|| format!("{}", rule.target_class));
    let precision = if rule.meets_threshold {
        format!("precision ≥ {}", format_number(tau))
    } else {
        format!("precision {:.2}", rule.precision_estimate)
    };
    format!(
        "IF {body} THEN class = {class} ({precision}, coverage {:.2})",
        rule.coverage
    )
}

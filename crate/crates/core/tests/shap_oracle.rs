use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xplain_core::model::FnPredictor;
use xplain_core::shap::{shap_exact, shap_kernel, value_function, waterfall_series, ShapConfig};
use xplain_core::{load_dataset, train_model, Hyperparams, Instance, ModelKind, Predictor, IRIS_CSV};

/// Softmax over random quadratic logits: non-additive, so interactions show up.
fn random_model(m: usize, classes: usize, rng: &mut ChaCha8Rng) -> FnPredictor {
    let lin: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let pair: Vec<f64> = (0..classes).map(|_| rng.gen_range(-1.0..1.0)).collect();
    FnPredictor::new(m, classes, move |x| {
        let logits: Vec<f64> = (0..classes)
            .map(|c| {
                let mut z: f64 = lin[c].iter().zip(x).map(|(w, v)| w * v).sum();
                if x.len() > 1 {
                    z += pair[c] * x[0] * x[1];
                }
                z
            })
            .collect();
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|z| (z - top).exp()).collect();
        let s: f64 = e.iter().sum();
        e.iter().map(|v| v / s).collect()
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Shapley values as the average marginal contribution over all M! orderings,
/// with its own marginal-imputation value function.
fn permutation_oracle<P: Predictor>(
    model: &P,
    x: &[f64],
    target: usize,
    background: &[Vec<f64>],
) -> Vec<f64> {
    let m = x.len();
    let v = |present: &[bool]| -> f64 {
        background
            .iter()
            .map(|b| {
                let z: Vec<f64> = (0..m).map(|j| if present[j] { x[j] } else { b[j] }).collect();
                model.predict_proba(&z)[target]
            })
            .sum::<f64>()
            / background.len() as f64
    };
    let perms = permutations(m);
    let mut phi = vec![0.0; m];
    for order in &perms {
        let mut present = vec![false; m];
        let mut prev = v(&present);
        for &j in order {
            present[j] = true;
            let cur = v(&present);
            phi[j] += cur - prev;
            prev = cur;
        }
    }
    phi.iter().map(|p| p / perms.len() as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exact_matches_permutation_oracle(seed in any::<u64>(), m in 1usize..=5, nb in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(m, 3, &mut rng);
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bg: Vec<Vec<f64>> = (0..nb)
            .map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let target = rng.gen_range(0..3);
        let a = shap_exact(&model, &Instance(x.clone()), target, &ShapConfig::new(bg.clone())).unwrap();
        let oracle = permutation_oracle(&model, &x, target, &bg);
        for (p, q) in a.contributions.iter().zip(&oracle) {
            prop_assert!((p - q).abs() <= 1e-9, "{p} vs {q}");
        }
        let p_target = model.predict_proba(&x)[target];
        prop_assert!((a.total() - p_target).abs() <= 1e-9);
    }

    #[test]
    fn kernel_enumeration_matches_exact(seed in any::<u64>(), m in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(m, 2, &mut rng);
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bg: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let cfg = ShapConfig::new(bg);
        let e = shap_exact(&model, &Instance(x.clone()), 0, &cfg).unwrap();
        let k = shap_kernel(&model, &Instance(x), 0, &cfg, seed).unwrap();
        prop_assert!((e.base_value - k.base_value).abs() <= 1e-12);
        for (p, q) in e.contributions.iter().zip(&k.contributions) {
            prop_assert!((p - q).abs() <= 1e-6, "{p} vs {q}");
        }
    }

    #[test]
    fn dummy_feature_gets_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inner = random_model(3, 2, &mut rng);
        // feature 3 is never read
        let model = FnPredictor::new(4, 2, move |x| inner.predict_proba(&x[..3]));
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bg: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let a = shap_exact(&model, &Instance(x), 1, &ShapConfig::new(bg)).unwrap();
        prop_assert!(a.contributions[3].abs() <= 1e-12);
    }
}

#[test]
fn linear_model_closed_form() {
    // for f(x) = w·x the Shapley value is w_j (x_j - mean_bg_j)
    let w = [0.3, -0.2, 0.5];
    let model = FnPredictor::new(3, 1, move |x| vec![w.iter().zip(x).map(|(a, b)| a * b).sum()]);
    let bg = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, -1.0], vec![0.5, 0.5, 0.5]];
    let x = [2.0, -1.0, 1.0];
    let a = shap_exact(&model, &Instance(x.to_vec()), 0, &ShapConfig::new(bg.clone())).unwrap();
    for j in 0..3 {
        let mean = bg.iter().map(|r| r[j]).sum::<f64>() / 3.0;
        assert!((a.contributions[j] - w[j] * (x[j] - mean)).abs() < 1e-12);
    }
}

#[test]
fn symmetric_features_share_credit() {
    let model = FnPredictor::new(2, 1, |x| vec![x[0] * x[1]]);
    let bg = vec![vec![0.0, 0.0]];
    let a = shap_exact(&model, &Instance(vec![2.0, 2.0]), 0, &ShapConfig::new(bg)).unwrap();
    assert!((a.contributions[0] - a.contributions[1]).abs() < 1e-12);
    assert!((a.contributions[0] - 2.0).abs() < 1e-12);
}

#[test]
fn value_function_endpoints() {
    let ds = load_dataset(IRIS_CSV, None).unwrap();
    let model = train_model(&ds, ModelKind::DecisionTree, &Hyperparams::default(), 7).unwrap();
    let x = Instance(ds.rows()[120].clone());
    let bg = ds.rows()[..20].to_vec();
    let full = value_function(&model, &x, 2, &[0, 1, 2, 3], &bg).unwrap();
    assert!((full - model.predict_proba(x.values())[2]).abs() < 1e-15);
    let empty = value_function(&model, &x, 2, &[], &bg).unwrap();
    let mean: f64 = bg.iter().map(|r| model.predict_proba(r)[2]).sum::<f64>() / 20.0;
    assert!((empty - mean).abs() < 1e-15);
}

#[test]
fn waterfall_telescopes_on_iris() {
    let ds = load_dataset(IRIS_CSV, None).unwrap();
    let model = train_model(&ds, ModelKind::LogisticRegression, &Hyperparams::default(), 7).unwrap();
    let cfg = ShapConfig::from_dataset(&ds, 3);
    for i in [0, 55, 140] {
        let x = Instance(ds.rows()[i].clone());
        let p = model.predict_proba(x.values());
        let a = shap_exact(&model, &x, 1, &cfg).unwrap();
        let w = waterfall_series(&a, p[1], &ds.feature_names()).unwrap();
        let last = w.steps.last().unwrap().cumulative_after;
        assert!((last - p[1]).abs() < 1e-9);
        assert!((w.start - a.base_value).abs() < 1e-15);
    }
}

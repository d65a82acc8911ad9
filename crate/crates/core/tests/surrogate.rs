use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xplain_core::lime::{lime_explain, lime_kernel_weight, standardized_distance, LimeConfig};
use xplain_core::linalg::weighted_ridge_fit;
use xplain_core::model::FnPredictor;
use xplain_core::{load_dataset, Instance, IRIS_CSV};

/// `(AᵀWA + Λ)⁻¹ AᵀWy` with `A = [1 | X]` and an unpenalized intercept.
fn ridge_oracle(x: &[Vec<f64>], y: &[f64], w: &[f64], lambda: f64) -> Vec<f64> {
    let n = x.len();
    let p = x[0].len();
    let a = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] });
    let wm = DMatrix::from_diagonal(&DVector::from_column_slice(w));
    let mut penalty = DMatrix::<f64>::identity(p + 1, p + 1) * lambda;
    penalty[(0, 0)] = 0.0;
    let lhs = a.transpose() * &wm * &a + penalty;
    let rhs = a.transpose() * &wm * DVector::from_column_slice(y);
    let beta = lhs.try_inverse().expect("oracle system is invertible") * rhs;
    beta.iter().copied().collect()
}

#[test]
fn ridge_matches_closed_form_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let n = rng.gen_range(8..40);
        let p = rng.gen_range(1..6);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let lambda = rng.gen_range(0.0..2.0);
        let fit = weighted_ridge_fit(&x, &y, &w, lambda).unwrap();
        let oracle = ridge_oracle(&x, &y, &w, lambda);
        assert!((fit.intercept - oracle[0]).abs() <= 1e-8);
        for (c, o) in fit.coefficients.iter().zip(&oracle[1..]) {
            assert!((c - o).abs() <= 1e-8, "{c} vs {o}");
        }
    }
}

#[test]
fn dummy_feature_stays_small() {
    let ds = load_dataset(IRIS_CSV, None).unwrap();
    // reads petal length and width only
    let model = FnPredictor::new(4, 2, |x| {
        let p = 1.0 / (1.0 + (-(1.5 * (x[2] - 4.0) + 2.0 * (x[3] - 1.3))).exp());
        vec![p, 1.0 - p]
    });
    let inst = Instance(ds.rows()[77].clone());
    let cfg = LimeConfig {
        n_samples: 4000,
        ..LimeConfig::default()
    };
    let small = (0..20)
        .filter(|&seed| {
            let a = lime_explain(&model, ds.features(), &inst, 0, &cfg, seed).unwrap();
            a.contributions[0].abs() <= 0.05 && a.contributions[1].abs() <= 0.05
        })
        .count();
    assert!(small >= 19, "{small}/20");
}

proptest! {
    #[test]
    fn kernel_is_monotone_in_distance(d1 in 0.0f64..10.0, d2 in 0.0f64..10.0, w in 0.1f64..5.0) {
        let (a, b) = (lime_kernel_weight(d1, w).unwrap(), lime_kernel_weight(d2, w).unwrap());
        prop_assert!((0.0..=1.0).contains(&a));
        if d1 <= d2 {
            prop_assert!(a >= b);
        }
    }

    #[test]
    fn distance_is_a_metric_on_iris(i in 0usize..150, j in 0usize..150, k in 0usize..150) {
        let ds = load_dataset(IRIS_CSV, None).unwrap();
        let f = ds.features();
        let (a, b, c) = (&ds.rows()[i], &ds.rows()[j], &ds.rows()[k]);
        let ab = standardized_distance(f, a, b);
        prop_assert_eq!(ab, standardized_distance(f, b, a));
        prop_assert_eq!(standardized_distance(f, a, a), 0.0);
        prop_assert!(ab <= standardized_distance(f, a, c) + standardized_distance(f, c, b) + 1e-12);
    }
}

use annet_core::analysis::empirical_bias_variance;
use annet_core::data::{parse_csv, CsvSchema, TargetEncoding};
use annet_core::network::WeightSet;
use annet_core::{
    augment, forward, gen_regression, gen_spiral, hidden_activation, representation_check, seed, train,
    variance_chain, ActivationKind, Matrix, NetworkSpec, SolveOrder, TrainConfig,
};
use nalgebra::DMatrix;
use rand::Rng;

fn random(rows: usize, cols: usize, s: u64, lo: f64, hi: f64) -> Matrix {
    let mut rng = seed::rng(s);
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

/// `(A^T A)^-1 A^T Y` through an LU solve.
fn normal_equation_solution(a: &Matrix, y: &Matrix) -> DMatrix<f64> {
    let a = a.as_dmatrix();
    (a.transpose() * a).lu().solve(&(a.transpose() * y.as_dmatrix())).unwrap()
}

#[test]
fn single_linear_layer_matches_normal_equations() {
    let x = random(30, 4, 1, -1.0, 1.0);
    let y = random(30, 2, 2, -1.0, 1.0);
    let spec = NetworkSpec::from_structure("2", 4, ActivationKind::Softplus08, true).unwrap();
    let r = train(&spec, &x, &y, &TrainConfig::random(3, 1.0)).unwrap();
    let expected = normal_equation_solution(&augment(&x), &y);
    let got = r.weights.weights()[0].as_dmatrix();
    assert!((got - &expected).norm() <= 1e-10 * expected.norm());
}

#[test]
fn single_invertible_layer_solves_in_preimage_space() {
    let x = random(25, 3, 4, -1.0, 1.0);
    let y = random(25, 1, 5, 0.2, 0.9);
    let spec = NetworkSpec::from_structure("1", 3, ActivationKind::Softplus, false).unwrap();
    let r = train(&spec, &x, &y, &TrainConfig::random(6, 1.0)).unwrap();
    let target = Matrix::from_fn(25, 1, |i, _| ActivationKind::Softplus.inverse(y.get(i, 0)));
    let expected = normal_equation_solution(&augment(&x), &target);
    assert!((r.weights.weights()[0].as_dmatrix() - &expected).norm() <= 1e-10 * expected.norm());
}

/// `A^T (A W - Y)` relative to `|A^T Y|`: zero at a least-squares optimum.
fn normal_equation_gap(a: &Matrix, w: &Matrix, y: &Matrix) -> f64 {
    let (a, w, y) = (a.as_dmatrix(), w.as_dmatrix(), y.as_dmatrix());
    (a.transpose() * (a * w - y)).norm() / (a.transpose() * y).norm().max(1e-300)
}

#[test]
fn output_layer_is_least_squares_optimal_for_any_solve_order() {
    let x = random(60, 3, 7, -2.0, 2.0);
    let y = random(60, 2, 8, -1.0, 1.0);
    let spec = NetworkSpec::from_structure("20-10-2", 3, ActivationKind::Softplus08, true).unwrap();
    for order in [SolveOrder::Forward, SolveOrder::Custom(vec![1, 0])] {
        let cfg = TrainConfig::random(9, 0.5).with_solve_order(order.clone());
        let r = train(&spec, &x, &y, &cfg).unwrap();
        let a = hidden_activation(&spec, &r.weights, &x, 2).unwrap();
        let gap = normal_equation_gap(&a, &r.weights.weights()[2], &y);
        assert!(gap <= 1e-9, "{order:?}: gap {gap:e}");
        let pred = forward(&spec, &r.weights, &x).unwrap();
        assert!((annet_core::sse(&pred, &y).unwrap() - r.train_sse).abs() <= 1e-9 * r.train_sse.max(1.0));
    }
}

#[test]
fn solve_order_changes_the_solution() {
    let x = random(40, 2, 10, -1.0, 1.0);
    let y = random(40, 1, 11, 0.2, 0.8);
    let spec = NetworkSpec::from_structure("8-6-1", 2, ActivationKind::Softplus08, false).unwrap();
    let a = train(&spec, &x, &y, &TrainConfig::random(12, 1.0)).unwrap();
    let b = train(
        &spec,
        &x,
        &y,
        &TrainConfig::random(12, 1.0).with_solve_order(SolveOrder::Custom(vec![1, 0])),
    )
    .unwrap();
    assert_ne!(a.weights, b.weights);
}

#[test]
fn data_matrix_hidden_layer_is_representative_over_many_seeds() {
    let spec = NetworkSpec::from_structure("30-1", 4, ActivationKind::Softplus08, true).unwrap();
    for s in 0..50 {
        let x = random(30, 4, 100 + s, -3.0, 3.0);
        let y = random(30, 1, 200 + s, -5.0, 5.0);
        let r = train(&spec, &x, &y, &TrainConfig::data_matrix()).unwrap();
        let a = hidden_activation(&spec, &r.weights, &x, 1).unwrap();
        let rep = representation_check(&a, &y, 1e-6).unwrap();
        assert!(rep.is_representative, "seed {s}: residual {:e}", rep.residual);
        assert!(r.train_sse <= 1e-12, "seed {s}: sse {:e}", r.train_sse);
    }
}

#[test]
fn masked_entries_stay_zero_and_do_not_affect_output() {
    let x = random(50, 6, 13, -1.0, 1.0);
    let y = random(50, 2, 14, 0.2, 0.8);
    let spec = NetworkSpec::from_structure("12^r3-8-2", 6, ActivationKind::Softplus08, false).unwrap();
    let r = train(&spec, &x, &y, &TrainConfig::random(15, 1.0)).unwrap();
    let mask = spec.mask(0).unwrap().unwrap();
    let w1 = &r.weights.weights()[0];
    for i in 0..mask.rows() {
        for j in 0..mask.cols() {
            if !mask.get(i, j) {
                assert_eq!(w1.get(i, j), 0.0);
            }
        }
    }
    // writing junk into excluded positions is undone by the weight set
    let mut rng = seed::rng(16);
    let junk = Matrix::from_fn(w1.rows(), w1.cols(), |i, j| {
        if mask.get(i, j) {
            w1.get(i, j)
        } else {
            rng.random_range(-5.0..5.0)
        }
    });
    let mut weights = r.weights.weights().to_vec();
    weights[0] = junk;
    let rebuilt = WeightSet::new(weights, spec.masks().unwrap()).unwrap();
    assert_eq!(
        forward(&spec, &rebuilt, &x).unwrap(),
        forward(&spec, &r.weights, &x).unwrap()
    );
}

#[test]
fn identity_chain_reaches_the_identity_projector() {
    let x = random(6, 10, 17, -5.0, 5.0);
    let chain = variance_chain(&x, ActivationKind::Identity, 4).unwrap();
    assert_eq!(chain[0], x);
    for h in &chain[1..] {
        assert!(h.max_abs_diff(&Matrix::identity(6)) <= 1e-12);
    }
}

#[test]
fn spiral_round_trips_through_csv() {
    let (train_set, _) = gen_spiral(3, 20, 0.3, 5).unwrap();
    let text = train_set.to_labelled_csv_string();
    let back = parse_csv(&text, &CsvSchema::default()).unwrap();
    assert_eq!(back.x, train_set.x);
    assert_eq!(back.class_indices(), train_set.class_indices());
    let soft = parse_csv(
        &text,
        &CsvSchema {
            encoding: TargetEncoding::SOFT,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(soft.y, train_set.with_encoding(TargetEncoding::SOFT).unwrap().y);
}

#[test]
fn noisy_fits_spread_more_than_clean_ones() {
    let (sets, test) = gen_regression(10, 0.2, 21).unwrap();
    let spec = NetworkSpec::from_structure("8-1", 1, ActivationKind::Softplus08, true).unwrap();
    let predict = |ds: &annet_core::Dataset, s: u64| {
        let r = train(&spec, &ds.x, &ds.y, &TrainConfig::random(s, 0.1)).unwrap();
        forward(&spec, &r.weights, &test.x).unwrap()
    };
    let truth = |x: &[f64]| vec![annet_core::data::regression_target(x[0])];
    let noisy: Vec<Matrix> = sets[1..].iter().map(|d| predict(d, 3)).collect();
    let clean: Vec<Matrix> = (0..10).map(|_| predict(&sets[0], 3)).collect();
    let noisy = empirical_bias_variance(&noisy, &test.x, truth).unwrap();
    let clean = empirical_bias_variance(&clean, &test.x, truth).unwrap();
    assert_eq!(clean.variance, 0.0);
    assert!(noisy.variance > 0.0);
}

//! Acceptance suite. Runs every criterion in sequence, prints one PASS/FAIL
//! line each and exits non-zero if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use annet_core::activation::DEFAULT_EXP_ALPHA;
use annet_core::cv::{cv_search, CvPlan, ModelSettings, StructureTemplate};
use annet_core::data::{load_csv, CsvSchema, TargetEncoding};
use annet_core::pinv::penrose_residual;
use annet_core::{
    forward, gen_regression, gen_spiral, mc_output_variance, pinv, seed, solution_count, sse, train, ActivationKind,
    Matrix, NetworkSpec, PinvOptions, TrainConfig, VarianceConfig,
};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn uniform(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
}

/// Largest Penrose-condition violation, relative to the size of the terms.
fn penrose_violation(a: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let ap = a * p;
    let pa = p * a;
    let scale = a.norm().max(1.0);
    [
        (&ap * a - a).norm(),
        (&pa * p - p).norm(),
        (ap.transpose() - &ap).norm(),
        (pa.transpose() - &pa).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
        / scale
}

fn penrose_suite() -> Outcome {
    let mut rng = seed::rng(101);
    let mut worst: f64 = 0.0;
    let mut worst_independent: f64 = 0.0;
    let mut deficient = 0;
    for i in 0..100 {
        let (m, n) = (rng.random_range(1..=200), rng.random_range(1..=100));
        let k = m.min(n);
        let a = if i % 2 == 1 && k >= 2 {
            deficient += 1;
            let r = rng.random_range(1..k);
            uniform(&mut rng, m, r) * uniform(&mut rng, r, n)
        } else {
            uniform(&mut rng, m, n)
        };
        let am = Matrix::from_dmatrix(a.clone()).unwrap();
        let p = pinv(&am, &PinvOptions::default()).unwrap();
        worst = worst.max(penrose_residual(&am, &p).unwrap());
        worst_independent = worst_independent.max(penrose_violation(&a, p.as_dmatrix()));
    }
    outcome(
        worst <= 1e-8 && worst_independent <= 1e-8,
        format!("100 matrices ({deficient} rank-deficient), worst residual {worst:.2e}, recomputed {worst_independent:.2e}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = seed::rng(202);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let small = rng.random_range(1..100);
        let large = rng.random_range(small + 1..=200);
        let a = if i % 2 == 0 {
            uniform(&mut rng, large, small)
        } else {
            uniform(&mut rng, small, large)
        };
        let at = a.transpose();
        let expected = if a.nrows() > a.ncols() {
            (&at * &a).try_inverse().unwrap() * &at
        } else {
            &at * (&a * &at).try_inverse().unwrap()
        };
        let p = pinv(&Matrix::from_dmatrix(a).unwrap(), &PinvOptions::default()).unwrap();
        worst = worst.max((p.as_dmatrix() - &expected).norm() / expected.norm());
    }
    outcome(worst <= 1e-8, format!("50 full-rank matrices, worst relative error {worst:.2e}"))
}

fn regression_trends() -> Outcome {
    let (sets, test) = gen_regression(0, 0.0, 0).unwrap();
    let clean = &sets[0];
    let run = |structure: &str, c: f64, seed: u64| {
        let spec = NetworkSpec::from_structure(structure, 1, ActivationKind::Softplus08, false).unwrap();
        let r = train(&spec, &clean.x, &clean.y, &TrainConfig::random(seed, c)).unwrap();
        let pred = forward(&spec, &r.weights, &test.x).unwrap();
        (r.train_sse, sse(&pred, &test.y).unwrap())
    };
    let (mut overfit, mut scaled, mut deep) = (0, 0, 0);
    for seed in 0..10 {
        let (tr1, te1) = run("8-1", 1.0, seed);
        let (tr01, te01) = run("8-1", 0.1, seed);
        let (tr5, te5) = run("1-1-1-8-1", 0.1, seed);
        overfit += usize::from(tr1 <= 1e-8 && te1 >= 1e2);
        scaled += usize::from(tr01 > 1e-6 && tr01 < 1.0 && te01 < te1);
        deep += usize::from(tr5 <= 1e-6 && te5 <= 1e3);
    }
    let majority = |n: usize| n > 5;
    outcome(
        majority(overfit) && majority(scaled) && majority(deep),
        format!(
            "seeds passing: 2-layer c=1 {overfit}/10, 2-layer c=0.1 {scaled}/10, 5-layer c=0.1 {deep}/10 (need >5 each)"
        ),
    )
}

fn spiral_threshold() -> Outcome {
    let (train_set, _) = gen_spiral(6, 100, 0.3, 1).unwrap();
    let ds = train_set.with_encoding(TargetEncoding::SOFT).unwrap();
    assert_eq!(ds.len(), 300);
    let count = |h: usize, hit: fn(f64) -> bool| {
        let spec = NetworkSpec::from_structure(&format!("30-50-{h}-6"), 2, ActivationKind::Softplus08, false).unwrap();
        (0..10)
            .filter(|&seed| {
                let cfg = TrainConfig::random(seed, 0.5).with_pinv(PinvOptions::exact());
                hit(train(&spec, &ds.x, &ds.y, &cfg).unwrap().train_sse)
            })
            .count()
    };
    let wide = count(300, |e| e <= 1e-6);
    let narrow = count(250, |e| e >= 1e-2);
    outcome(
        wide >= 9 && narrow >= 9,
        format!("h3=300 fits in {wide}/10 seeds, h3=250 stays above 1e-2 in {narrow}/10"),
    )
}

fn variance_monotone() -> Outcome {
    let cfg = VarianceConfig::default();
    assert_eq!((cfg.m, cfg.d, cfg.trials, cfg.max_depth), (100, 10, 1000, 8));
    assert_eq!(cfg.activation, ActivationKind::ExpScaled(1e-4));
    let r = mc_output_variance(&cfg).unwrap();
    let mean = &r.per_depth_mean;
    let bad: Vec<usize> = (1..7).filter(|&k| mean[k + 1] > mean[k] * (1.0 + 1e-6)).map(|k| k + 1).collect();
    let shown: Vec<String> = mean.iter().map(|v| format!("{v:.3e}")).collect();
    outcome(
        bad.is_empty(),
        format!("means k=1..8 [{}], increases after k={bad:?}", shown.join(", ")),
    )
}

fn representation() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in 0..20 {
        let mut rng = seed::rng(seed::derive_index(303, s));
        let x = Matrix::from_dmatrix(DMatrix::from_fn(40, 5, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let y = Matrix::from_dmatrix(DMatrix::from_fn(40, 2, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let spec = NetworkSpec::from_structure("40-2", 5, ActivationKind::Softplus08, true).unwrap();
        let r = train(&spec, &x, &y, &TrainConfig::data_matrix()).unwrap();
        worst = worst.max(r.train_sse);
    }
    outcome(worst <= 1e-6, format!("20 datasets, worst train SSE {worst:.2e}"))
}

fn activation_round_trip() -> Outcome {
    let xs: Vec<f64> = (0..10_000).map(|i| -10.0 + 20.0 * i as f64 / 9_999.0).collect();
    let mut parts = Vec::new();
    let mut pass = true;
    for kind in [
        ActivationKind::Softplus,
        ActivationKind::Softplus08,
        ActivationKind::ExpScaled(DEFAULT_EXP_ALPHA),
    ] {
        let worst = xs.iter().map(|&x| (kind.inverse(kind.forward(x)) - x).abs()).fold(0.0, f64::max);
        pass &= worst <= 1e-10;
        parts.push(format!("{kind} {worst:.1e}"));
    }
    outcome(pass, format!("max |g(f(x)) - x|: {}", parts.join(", ")))
}

fn solution_count_instance() -> Outcome {
    let got = solution_count(3).unwrap();
    outcome(got == (2, 3), format!("n=3 gives N^{} x {}", got.0, got.1))
}

fn iris_floor() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/iris.csv");
    let schema = CsvSchema {
        encoding: TargetEncoding::SOFT,
        ..Default::default()
    };
    let ds = load_csv(path, &schema).unwrap();
    assert_eq!((ds.len(), ds.x.cols(), ds.num_classes()), (150, 4, 3));
    let settings = ModelSettings {
        activation: ActivationKind::Softplus08,
        linear_output: false,
        train: TrainConfig::random(seed::derive(0, "init"), 1.0),
    };
    let plan = CvPlan {
        folds: 10,
        trials: 1,
        seed: seed::derive(0, "data"),
        stratified: true,
    };
    let template = [StructureTemplate::parse("h-q").unwrap()];
    let r = cv_search(&ds, &template, &[10], &plan, &settings).unwrap();
    outcome(r.mean_score >= 0.85, format!("mean accuracy {:.4} (floor 0.85)", r.mean_score))
}

fn run_cli(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_annet")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    manifest["artifact_paths"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            let p = p.as_str().unwrap().to_string();
            let bytes = std::fs::read(dir.join(&p)).unwrap();
            (p, bytes)
        })
        .collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let d = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();
    run_cli(&["synth", "regression", "--seed", "4", "--out", &d("reg")]);
    let data = tmp.path().join("reg/regression_train_02.csv").to_string_lossy().into_owned();
    let mut same = Vec::new();
    for (name, args) in [
        ("synth", vec!["synth", "spiral", "--per-arm", "200", "--seed", "4"]),
        ("synth", vec!["synth", "regression", "--seed", "4"]),
        (
            "train",
            vec!["train", "--data", &data, "--structure", "20-8-1", "--seed", "4", "--dump-weights"],
        ),
        ("variance", vec!["variance", "--trials", "200", "--seed", "4"]),
    ] {
        let mut runs = Vec::new();
        for rep in 0..2 {
            let out = d(&format!("{name}{}-{rep}", same.len()));
            let mut full = args.clone();
            full.extend(["--out", out.as_str()]);
            run_cli(&full);
            runs.push(artifacts(Path::new(&out)));
        }
        same.push((name, !runs[0].is_empty() && runs[0] == runs[1]));
    }
    let pass = same.iter().all(|(_, ok)| *ok);
    let detail: Vec<String> = same
        .iter()
        .map(|(n, ok)| format!("{n} {}", if *ok { "identical" } else { "differs" }))
        .collect();
    outcome(pass, detail.join(", "))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("penrose conditions on random matrices", Duration::from_secs(30), penrose_suite),
        ("normal-equation oracle", Duration::from_secs(30), oracle_equivalence),
        ("regression overfitting and scaling trends", Duration::from_secs(60), regression_trends),
        ("spiral width threshold", Duration::from_secs(120), spiral_threshold),
        ("output variance non-increasing with depth", Duration::from_secs(300), variance_monotone),
        ("data-matrix representation", Duration::from_secs(30), representation),
        ("activation round trip", Duration::from_secs(1), activation_round_trip),
        ("solution count for three layers", Duration::from_secs(1), solution_count_instance),
        ("iris cross-validation floor", Duration::from_secs(30), iris_floor),
        ("byte-identical reruns", Duration::from_secs(120), determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed < limit, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}; {detail}; {:.2}s of {}s",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

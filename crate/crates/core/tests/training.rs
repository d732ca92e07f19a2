use helios_core::dataset::{generate_grid, linspace, shuffle_split, DataSplit, GridSpec, Sample, SplitFractions};
use helios_core::mlp::{MlpModel, NormSpec};
use helios_core::pv::ModuleParams;
use helios_core::train::{evaluate, gradient, train, Algorithm, ErrorHistogram, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mse_normalized(model: &MlpModel, batch: &[Sample]) -> f64 {
    let norm = model.norm();
    batch
        .iter()
        .map(|s| {
            let y = model.forward_normalized(norm.normalize_inputs(s.t_c, s.g));
            (y - norm.normalize_target(s.i_mp)).powi(2)
        })
        .sum::<f64>()
        / batch.len() as f64
}

#[test]
fn gradient_matches_central_differences() {
    let h = 1e-6;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let norm = NormSpec::new([15.0, 40.0], [200.0, 1090.0], [1.4, 8.3]).unwrap();
        let mut model = MlpModel::<f64>::random(15, norm, &mut rng).unwrap();
        let batch: Vec<Sample> = (0..rng.random_range(1..40))
            .map(|_| Sample {
                t_c: rng.random_range(15.0..40.0),
                g: rng.random_range(200.0..1090.0),
                i_mp: rng.random_range(1.4..8.3),
            })
            .collect();
        let analytic = gradient(&model, &batch).unwrap();
        assert_eq!(analytic.len(), 61);
        let base = model.params();
        let mut numeric = vec![0.0; base.len()];
        for k in 0..base.len() {
            let mut p = base.clone();
            p[k] = base[k] + h;
            model.set_params(&p).unwrap();
            let up = mse_normalized(&model, &batch);
            p[k] = base[k] - h;
            model.set_params(&p).unwrap();
            let down = mse_normalized(&model, &batch);
            numeric[k] = (up - down) / (2.0 * h);
        }
        model.set_params(&base).unwrap();
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
        assert!(diff / scale <= 1e-5, "seed {seed}: relative error {}", diff / scale);
    }
}

fn only_train(train: Vec<Sample>) -> DataSplit {
    let mut split = shuffle_split(
        &helios_core::dataset::Dataset::new(train),
        0,
        SplitFractions { train: 1.0, validation: 0.0, test: 0.0 },
    )
    .unwrap();
    split.indices = None;
    split
}

#[test]
fn linear_toy_is_fitted_within_200_epochs() {
    let rows: Vec<Sample> = linspace(200.0, 1090.0, 30)
        .into_iter()
        .map(|g| Sample { t_c: 25.0, g, i_mp: 0.0075 * g + 0.1 })
        .collect();
    let cfg = TrainConfig { max_epochs: 200, ..TrainConfig::default() };
    let (model, report) = train::<f64>(&only_train(rows.clone()), &cfg).unwrap();
    assert!(report.epochs_run <= 200);
    let mse: f64 = rows.iter().map(|s| (model.forward(s.t_c, s.g) - s.i_mp).powi(2)).sum::<f64>() / 30.0;
    assert!(mse <= 1e-4, "mse {mse}");
    assert!((report.mse_train.amps2 - mse).abs() < 1e-12);
}

#[test]
fn f32_training_follows_f64() {
    let rows: Vec<Sample> = linspace(200.0, 1090.0, 30)
        .into_iter()
        .map(|g| Sample { t_c: 25.0, g, i_mp: 0.0075 * g + 0.1 })
        .collect();
    let cfg = TrainConfig { max_epochs: 100, ..TrainConfig::default() };
    let (model, _) = train::<f32>(&only_train(rows), &cfg).unwrap();
    assert!((model.forward(25.0, 600.0) - 4.6).abs() < 0.02);
}

fn small_split() -> DataSplit {
    let grid = GridSpec { t_values: linspace(15.0, 40.0, 12), g_values: linspace(200.0, 1090.0, 20) };
    let d = generate_grid(&ModuleParams::table1(), &grid).unwrap();
    shuffle_split(&d, 11, SplitFractions::default()).unwrap()
}

#[test]
fn bayesian_hyperparameters_stay_consistent() {
    let cfg = TrainConfig { max_epochs: 150, ..TrainConfig::default() };
    let (_, report) = train::<f64>(&small_split(), &cfg).unwrap();
    assert!(!report.history.is_empty());
    for r in &report.history {
        let gamma = r.gamma.unwrap();
        assert!((0.0..=61.0).contains(&gamma), "gamma {gamma}");
        assert!(r.alpha.unwrap() > 0.0 && r.beta.unwrap() > 0.0, "{r:?}");
        if let (Some(before), Some(after)) = (r.objective_before, r.objective_after) {
            assert!(after <= before, "epoch {}: {after} > {before}", r.epoch);
        }
        assert!(r.mse_train >= 0.0);
    }
    assert!(report.mse_test.unwrap().amps2 < 1e-2);
}

#[test]
fn training_is_deterministic() {
    for algorithm in [Algorithm::BayesianLm, Algorithm::Adam] {
        let cfg = TrainConfig { algorithm, max_epochs: 60, ..TrainConfig::default() };
        let (m1, r1) = train::<f64>(&small_split(), &cfg).unwrap();
        let (m2, r2) = train::<f64>(&small_split(), &cfg).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(m1.params(), m2.params());
        let other = TrainConfig { seed: 2, ..cfg };
        let (m3, _) = train::<f64>(&small_split(), &other).unwrap();
        assert_ne!(m1.params(), m3.params());
    }
}

#[test]
fn adam_returns_best_validation_model() {
    let cfg = TrainConfig { algorithm: Algorithm::Adam, max_epochs: 300, learning_rate: 0.01, ..TrainConfig::default() };
    let split = small_split();
    let (_, report) = train::<f64>(&split, &cfg).unwrap();
    let best = report.history.iter().filter_map(|r| r.mse_val).fold(f64::INFINITY, f64::min);
    assert_eq!(report.mse_validation.unwrap().normalized, best);
    assert!(report.alpha.is_none() && report.gamma.is_none());
}

#[test]
fn histogram_matches_independent_binning() {
    let mut errors = vec![-0.2222, 0.1968];
    errors.extend((0..98).map(|k| 0.2 * (1.7 * k as f64 + 0.3).sin() - 0.012));
    let h = ErrorHistogram::new(&errors).unwrap();
    // numpy.histogram(errors, bins=20, range=(min, max)) and a floor-based script agree
    let expected = [11, 7, 6, 4, 4, 4, 4, 3, 3, 2, 3, 5, 4, 3, 3, 5, 5, 4, 7, 13];
    assert_eq!(h.counts, expected);
    assert!((h.bin_width() - 0.02095).abs() < 1e-15);
    assert_eq!(h.bin_edges[0], -0.2222);
    assert_eq!(h.bin_edges[20], 0.1968);
    for w in h.bin_edges.windows(2) {
        assert!((w[1] - w[0] - h.bin_width()).abs() < 1e-15);
    }
    let csv = h.to_csv();
    assert!(csv.starts_with("bin_lo,bin_hi,count\n"));
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn perfect_predictor_evaluation() {
    // a zero network predicts the target midpoint everywhere; make that the truth
    let norm = NormSpec::new([15.0, 40.0], [200.0, 1090.0], [2.0, 6.0]).unwrap();
    let model = MlpModel::<f64>::zeros(15, norm).unwrap();
    let samples = [Sample { t_c: 20.0, g: 300.0, i_mp: 4.0 }, Sample { t_c: 30.0, g: 900.0, i_mp: 4.0 }];
    // constant targets: correlation undefined
    assert!(evaluate(&model, &samples).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trained = MlpModel::<f64>::random(15, norm, &mut rng).unwrap();
    let samples: Vec<Sample> = (0..50)
        .map(|k| {
            let (t_c, g) = (15.0 + k as f64 * 0.5, 200.0 + k as f64 * 17.0);
            Sample { t_c, g, i_mp: trained.forward(t_c, g) }
        })
        .collect();
    let eval = evaluate(&trained, &samples).unwrap();
    assert_eq!(eval.mse, 0.0);
    assert!((eval.r - 1.0).abs() < 1e-12);
    assert_eq!(eval.histogram.counts[0], 50);
}

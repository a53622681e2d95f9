mod common;

use chemvise::classify::{confusion, mcc};
use chemvise::harness::{
    build_target_space, build_world, featurize_trials, fit_chemvise_heads, grid_search,
    run_representation_protocol, run_window_sweep, summarize, Config, Context, Family, GridSpec,
    HeadKind, HyperParams, NetParams, Sample, SvcParams,
};
use chemvise::signals::{AffinityModel, Split};
use chemvise::targets::TargetKind;
use chemvise::Error;
use ndarray::Array2;

/// A world small enough for debug-profile runs: 5 Hz, short targets, one
/// tiny network configuration.
fn tiny_config() -> Config {
    let mut c = Config::default();
    c.simulator.design.sample_rate_hz = 5.0;
    c.targets.dimension = 16;
    c.classify.svc_iterations = 2_000;
    c.harness.grid = GridSpec {
        widths: vec![8],
        learning_rates: vec![1e-3],
        epochs: vec![5],
        batch_sizes: vec![16],
        budget: 1,
        n_repeats: 2,
        ..GridSpec::default()
    };
    c
}

fn singles(config: &Config, window_s: f64) -> Vec<Sample> {
    let world = build_world(config).unwrap();
    let trials: Vec<_> = world
        .dataset
        .trials
        .into_iter()
        .filter(|t| t.split == Split::Train)
        .collect();
    featurize_trials(&trials, config.harness.pre_onset_s, window_s).unwrap()
}

#[test]
fn feature_dimension_follows_window_arithmetic() {
    let mut config = Config::default();
    config.simulator.design.replicates = 1;
    config.simulator.design.holdout_doubles = 1;
    for (window, dim) in [(2.4, 960), (4.0, 1600)] {
        let samples = singles(&config, window);
        assert!(samples.iter().all(|s| s.features.len() == dim));
    }
}

#[test]
fn search_prefers_the_only_trained_candidate() {
    let mut config = tiny_config();
    config.harness.grid.epochs = vec![0, 0, 0, 400];
    config.harness.grid.learning_rates = vec![1e-2];
    config.harness.grid.budget = 8;
    config.harness.grid.n_folds = 4;
    let train = singles(&config, 3.0);
    let ctx = Context::from_config(&config, None);
    let (frozen, table) = grid_search(Family::Ffnn, &config.harness.grid, &train, &ctx, 3).unwrap();
    assert_eq!(table.len(), 8 * 4);
    assert_eq!(frozen.params().net.as_ref().unwrap().epochs, 400);

    let mean = |epochs: usize| -> Vec<f64> {
        (0..8)
            .filter(|c| table[c * 4].hyperparameters.contains(&format!("epochs={epochs};")))
            .map(|c| table[c * 4..c * 4 + 4].iter().map(|r| r.mcc).sum::<f64>() / 4.0)
            .collect()
    };
    let trained = mean(400);
    let untrained = mean(0);
    assert!(!trained.is_empty() && !untrained.is_empty());
    let best_untrained = untrained.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(trained.iter().all(|m| *m > best_untrained));
}

#[test]
fn search_rejects_holdout_trials() {
    let config = tiny_config();
    let world = build_world(&config).unwrap();
    let all = featurize_trials(&world.dataset.trials, 0.4, 3.0).unwrap();
    let ctx = Context::from_config(&config, None);
    let mut grid = config.harness.grid.clone();
    grid.budget = 2;
    let err = grid_search(Family::RawSvc, &grid, &all, &ctx, 0).unwrap_err();
    assert!(matches!(err, Error::Hygiene(_)), "{err}");
}

#[test]
fn representation_protocol_shape() {
    let config = tiny_config();
    let report = run_representation_protocol(&config).unwrap();
    assert_eq!(report.rows.len(), 9 * 2);
    for row in &report.rows {
        assert_eq!(row.n_samples, 39);
        assert_eq!(row.tp + row.fp + row.tn + row.r#fn, 39);
        assert!((-1.0..=1.0).contains(&row.mcc));
    }
    let again = run_representation_protocol(&config).unwrap();
    assert_eq!(report, again);
}

#[test]
fn window_sweep_shape_and_summary_bounds() {
    let config = tiny_config();
    let report = run_window_sweep(&config).unwrap();
    assert_eq!(report.rows.len(), 7 * 3 * 2);
    assert!(report.rows.iter().all(|r| r.n_samples == 39));
    let summary = summarize(&report.rows);
    assert_eq!(summary.len(), 7 * 3);
    for s in &summary {
        assert!(s.min_mcc <= s.median_mcc && s.median_mcc <= s.max_mcc);
    }
}

#[test]
fn separable_world_is_solved_by_semantic_svc() {
    // Noiseless, interference-free, and the target analyte alone drives the
    // first four sensors, so its z-scored channels inside a double match its
    // singles exactly. The default semantic space puts it in its own cluster.
    let mut config = tiny_config();
    config.simulator.design.sample_rate_hz = 10.0;
    config.targets.dimension = 32;
    config.classify.svc_iterations = 20_000;
    let ids = common::analytes(4);
    let mut params = config.simulator.sensors.clone();
    params.noise_sigma = 0.0;
    params.interference_gamma = 0.0;
    let mut model = AffinityModel::generate(&ids, &params).unwrap();
    model.affinities = Array2::from_shape_fn((8, 4), |(s, a)| match (s < 4, a == 0) {
        (true, true) => 2.0 + s as f64,
        (false, false) => 1.0 + (s + a) as f64 * 0.5,
        _ => 0.0,
    });
    let dataset = config.simulator.design.generate(&model).unwrap();
    let (test, train): (Vec<_>, Vec<_>) =
        dataset.trials.into_iter().partition(|t| t.split == Split::Test);
    let train = featurize_trials(&train, 0.4, 4.0).unwrap();
    let test = featurize_trials(&test, 0.4, 4.0).unwrap();

    let space = build_target_space(TargetKind::Semantic, &config).unwrap();
    let ctx = Context::from_config(&config, Some(space));
    let hp = HyperParams {
        net: Some(NetParams {
            width: 64,
            learning_rate: 1e-3,
            epochs: 300,
            batch_size: 16,
        }),
        svc: Some(SvcParams {
            c: 1e-3,
            class_weight: 1.0,
        }),
    };
    let fitted = fit_chemvise_heads(&[HeadKind::Svc], &hp, &train, &ctx, 4).unwrap();
    let xs: Vec<_> = test.iter().map(|s| &s.features).collect();
    let preds = fitted[0].predict(&xs).unwrap();
    let truth: Vec<bool> = test.iter().map(|s| s.mix.contains("A")).collect();
    let counts = confusion(&preds, &truth).unwrap();
    assert_eq!(counts.total(), 39);
    assert_eq!(mcc(&counts), 1.0, "{counts:?}");
}

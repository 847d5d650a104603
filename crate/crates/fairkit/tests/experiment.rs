//! Integration checks for the cross-validation harness: grid shape, leakage,
//! degenerate-condition identities, and report serialization.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairkit::core::{BinaryLabels, FeatureMatrix, ProtectedAttribute};
use fairkit::data::Standardizer;
use fairkit::estimators::ModelKind;
use fairkit::metrics::pearson_r_with_ci;
use fairkit::model_selection::{
    fairness_utility_correlation, run_condition, run_experiment, stratified_kfold, Condition,
    ExperimentConfig, ExperimentData, ExperimentReport, Split,
};

/// Synthetic credit-like dataset: two informative features, one feature that
/// leaks the protected attribute, outcomes biased against the disadvantaged
/// group.
fn synthetic_context(n: usize, seed: u64) -> ExperimentData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let si = rng.gen_range(0..2u8);
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        let leak = si as f64 + rng.gen_range(-0.25..0.25);
        let logit = 1.4 * a - 0.8 * b - 1.1 * (si as f64) + 0.5;
        let p = 1.0 / (1.0 + (-logit).exp());
        rows.push(vec![a, b, leak]);
        y.push(u8::from(rng.gen_bool(p)));
        s.push(si);
    }
    let x = FeatureMatrix::new(
        ndarray::Array2::from_shape_vec(
            (n, 3),
            rows.into_iter().flatten().collect(),
        )
        .unwrap(),
        vec!["a".into(), "b".into(), "leak".into()],
    )
    .unwrap();
    ExperimentData {
        protected_label: "group".into(),
        x,
        y: BinaryLabels::new(y).unwrap(),
        s: ProtectedAttribute::new(s, "group").unwrap(),
        protected_source_columns: vec!["leak".into()],
        numeric_column_names: vec!["a".into(), "b".into(), "leak".into()],
    }
}

fn small_config(conditions: Vec<Condition>, models: Vec<ModelKind>, seed: u64) -> ExperimentConfig {
    let mut config = ExperimentConfig::default_grid(seed);
    config.conditions = conditions;
    config.model_types = models;
    config.folds = 4;
    config.forest.n_trees = 10;
    config
}

#[test]
fn grid_produces_expected_row_count() {
    let data = synthetic_context(160, 5);
    let config = small_config(
        vec![Condition::Baseline, Condition::RemoveProtected, Condition::RelabelTarget],
        vec![ModelKind::Logistic, ModelKind::Tree],
        9,
    );
    let report = run_experiment(&config, &[data]).unwrap();
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    let (conditions, models, protected, folds, splits) = (3, 2, 1, 4, 2);
    assert_eq!(report.rows.len(), conditions * models * protected * folds * splits);
}

#[test]
fn folds_are_disjoint_and_standardizer_uses_train_stats_only() {
    let data = synthetic_context(97, 11);
    let plan = stratified_kfold(&data.y, &data.s, 5, 3).unwrap();
    for fold in &plan.folds {
        for &i in &fold.test {
            assert!(!fold.train.contains(&i));
        }
        assert_eq!(fold.train.len() + fold.test.len(), 97);
        // The per-fold standardizer must reproduce statistics computed from
        // the training rows alone.
        let st = Standardizer::fit_rows(&data.x, &[0, 1, 2], &fold.train).unwrap();
        for (k, &j) in [0usize, 1, 2].iter().enumerate() {
            let vals: Vec<f64> = fold.train.iter().map(|&i| data.x.values()[(i, j)]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            assert!((st.means[k] - mean).abs() < 1e-12);
        }
    }
}

#[test]
fn reject_option_with_degenerate_theta_matches_baseline_rows() {
    let data = synthetic_context(140, 23);
    let mut config = small_config(
        vec![Condition::Baseline, Condition::RejectOption],
        vec![ModelKind::Logistic],
        41,
    );
    config.theta = 0.5001;
    let report = run_experiment(&config, &[data]).unwrap();
    assert!(report.failures.is_empty());
    let b_rows: Vec<_> = report
        .rows
        .iter()
        .filter(|r| r.condition == Condition::Baseline)
        .collect();
    let roc_rows: Vec<_> = report
        .rows
        .iter()
        .filter(|r| r.condition == Condition::RejectOption)
        .collect();
    assert_eq!(b_rows.len(), roc_rows.len());
    for (b, roc) in b_rows.iter().zip(&roc_rows) {
        assert_eq!(b.fold, roc.fold);
        assert_eq!(b.split, roc.split);
        assert!((b.auc - roc.auc).abs() < 1e-12);
        assert!((b.mean_difference - roc.mean_difference).abs() < 1e-12);
    }
}

#[test]
fn run_condition_matches_run_experiment_cells() {
    let data = synthetic_context(120, 31);
    let config = small_config(vec![Condition::Baseline], vec![ModelKind::Logistic], 77);
    let (rows, failures) =
        run_condition(&config, Condition::Baseline, ModelKind::Logistic, &data).unwrap();
    assert!(failures.is_empty());
    let report = run_experiment(&config, &[data]).unwrap();
    assert_eq!(rows, report.rows);
}

#[test]
fn relabel_on_equal_rate_fold_equals_baseline() {
    // Groups constructed with identical positive rates so relabelling is a
    // no-op and RTV coincides with B on every fold.
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut s = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..160 {
        let si = (i % 2) as u8;
        let yi = ((i / 2) % 2) as u8;
        rows.push(vec![
            rng.gen_range(-1.0..1.0) + yi as f64,
            rng.gen_range(-1.0..1.0),
        ]);
        y.push(yi);
        s.push(si);
    }
    let data = ExperimentData {
        protected_label: "group".into(),
        x: FeatureMatrix::from_rows(&rows).unwrap(),
        y: BinaryLabels::new(y).unwrap(),
        s: ProtectedAttribute::new(s, "group").unwrap(),
        protected_source_columns: vec![],
        numeric_column_names: vec!["x0".into(), "x1".into()],
    };
    let config = small_config(
        vec![Condition::Baseline, Condition::RelabelTarget],
        vec![ModelKind::Logistic],
        13,
    );
    let report = run_experiment(&config, &[data]).unwrap();
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    // Stratified folds preserve the equal rates, so every fold relabels
    // nothing.
    let b: Vec<_> = report.rows.iter().filter(|r| r.condition == Condition::Baseline).collect();
    let rtv: Vec<_> = report
        .rows
        .iter()
        .filter(|r| r.condition == Condition::RelabelTarget)
        .collect();
    for (a, b) in b.iter().zip(&rtv) {
        assert_eq!(a.auc, b.auc);
        assert_eq!(a.mean_difference, b.mean_difference);
    }
}

#[test]
fn experiment_is_reproducible_bit_for_bit() {
    let config = small_config(
        vec![Condition::Baseline, Condition::CounterfactualModel, Condition::Reweigh],
        vec![ModelKind::Logistic, ModelKind::Forest],
        99,
    );
    let a = run_experiment(&config, &[synthetic_context(130, 17)]).unwrap();
    let b = run_experiment(&config, &[synthetic_context(130, 17)]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn csv_roundtrip_preserves_rows() {
    let config = small_config(vec![Condition::Baseline], vec![ModelKind::Tree], 3);
    let report = run_experiment(&config, &[synthetic_context(90, 29)]).unwrap();
    let parsed = ExperimentReport::from_csv(&report.to_csv()).unwrap();
    assert_eq!(parsed.rows, report.rows);
}

#[test]
fn summary_means_match_row_file_recomputation() {
    let config = small_config(
        vec![Condition::Baseline, Condition::RelabelTarget],
        vec![ModelKind::Logistic],
        55,
    );
    let report = run_experiment(&config, &[synthetic_context(110, 43)]).unwrap();
    let from_file = ExperimentReport::from_csv(&report.to_csv()).unwrap();
    assert_eq!(report.summary(), from_file.summary());
}

#[test]
fn correlation_delegates_to_pearson() {
    let config = small_config(
        vec![Condition::Baseline],
        vec![ModelKind::Logistic, ModelKind::Tree],
        21,
    );
    let report = run_experiment(&config, &[synthetic_context(150, 61)]).unwrap();
    let cells = fairness_utility_correlation(&report);
    assert_eq!(cells.len(), 1);
    let cell = &cells[0];
    let points: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.split == Split::Test)
        .map(|r| (r.auc, r.mean_difference))
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let direct = pearson_r_with_ci(&xs, &ys).unwrap();
    let got = cell.r.as_ref().expect("correlation defined");
    assert_eq!(got.value, direct.value);
    assert_eq!(got.ci_low, direct.ci_low);
    assert_eq!(got.ci_high, direct.ci_high);
    assert_eq!(cell.n_points, points.len());
}

#[test]
fn synthetic_correlated_report_recovers_perfect_r() {
    use fairkit::model_selection::ReportRow;
    // Hand-built report where test auc equals test md exactly.
    let mut rows = Vec::new();
    for fold in 0..6 {
        let v = 0.5 + fold as f64 * 0.05;
        rows.push(ReportRow {
            condition: Condition::Baseline,
            model: ModelKind::Logistic,
            protected: "g".into(),
            fold,
            split: Split::Test,
            auc: v,
            mean_difference: v,
        });
    }
    let report = ExperimentReport {
        rows,
        failures: vec![],
        notes: vec![],
    };
    let cells = fairness_utility_correlation(&report);
    assert!((cells[0].r.as_ref().unwrap().value - 1.0).abs() < 1e-12);

    // Anti-correlated variant.
    let mut rows = Vec::new();
    for fold in 0..6 {
        let v = 0.5 + fold as f64 * 0.05;
        rows.push(ReportRow {
            condition: Condition::Baseline,
            model: ModelKind::Logistic,
            protected: "g".into(),
            fold,
            split: Split::Test,
            auc: v,
            mean_difference: -v,
        });
    }
    let report = ExperimentReport {
        rows,
        failures: vec![],
        notes: vec![],
    };
    let cells = fairness_utility_correlation(&report);
    assert!((cells[0].r.as_ref().unwrap().value + 1.0).abs() < 1e-12);
}

#[test]
fn prr_with_tree_model_is_recorded_as_failure() {
    let data = synthetic_context(100, 67);
    let config = small_config(
        vec![Condition::PrejudiceRemover],
        vec![ModelKind::Tree],
        8,
    );
    let report = run_experiment(&config, &[data]).unwrap();
    assert!(report.rows.is_empty());
    assert_eq!(report.failures.len(), 4);
    assert!(report.failures[0].message.contains("logistic"));
}

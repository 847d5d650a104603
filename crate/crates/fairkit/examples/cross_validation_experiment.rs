//! The cross-validation experiment harness on the German Credit data when
//! available (falling back to a synthetic dataset otherwise): a grid of
//! mitigation conditions and model types, scored by AUC and mean difference
//! per fold and split, with the fairness-utility correlation per cell.
//!
//! ```bash
//! cargo run --release --example cross_validation_experiment
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairkit::core::{BinaryLabels, FeatureMatrix, ProtectedAttribute};
use fairkit::data::{encode, load_german_credit, ProtectedName};
use fairkit::estimators::ModelKind;
use fairkit::model_selection::{
    fairness_utility_correlation, run_experiment, Condition, ExperimentConfig, ExperimentData,
};

fn german_contexts() -> Option<Vec<ExperimentData>> {
    let path = std::path::Path::new("data/german.data");
    if !path.exists() {
        return None;
    }
    let records = load_german_credit(path).ok()?;
    let enc = encode(&records).ok()?;
    let numeric: Vec<String> = enc
        .numeric_columns
        .iter()
        .map(|&j| enc.x.column_names()[j].clone())
        .collect();
    Some(
        ProtectedName::ALL
            .iter()
            .map(|&name| ExperimentData {
                protected_label: name.as_str().to_string(),
                x: enc.x.clone(),
                y: enc.y.clone(),
                s: enc.protected(name).clone(),
                protected_source_columns: enc.protected_source_columns(name),
                numeric_column_names: numeric.clone(),
            })
            .collect(),
    )
}

fn synthetic_context() -> Vec<ExperimentData> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 600;
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let group = u8::from(rng.gen_bool(0.5));
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        let leak = group as f64 + rng.gen_range(-0.3..0.3);
        let p = 1.0 / (1.0 + (-(1.3 * a - 0.7 * b - 1.0 * group as f64 + 0.4)).exp());
        rows.push(vec![a, b, leak]);
        y.push(u8::from(rng.gen_bool(p)));
        s.push(group);
    }
    vec![ExperimentData {
        protected_label: "group".into(),
        x: FeatureMatrix::new(
            ndarray::Array2::from_shape_vec((n, 3), rows.into_iter().flatten().collect()).unwrap(),
            vec!["a".into(), "b".into(), "leak".into()],
        )
        .unwrap(),
        y: BinaryLabels::new(y).unwrap(),
        s: ProtectedAttribute::new(s, "group").unwrap(),
        protected_source_columns: vec!["leak".into()],
        numeric_column_names: vec!["a".into(), "b".into(), "leak".into()],
    }]
}

fn main() -> fairkit::Result<()> {
    let contexts = match german_contexts() {
        Some(c) => {
            println!("running on data/german.data");
            c
        }
        None => {
            println!("data/german.data not found; running on a synthetic dataset");
            synthetic_context()
        }
    };

    let mut config = ExperimentConfig::default_grid(2016);
    config.conditions = vec![
        Condition::Baseline,
        Condition::RemoveProtected,
        Condition::RelabelTarget,
        Condition::CounterfactualModel,
        Condition::RejectOption,
    ];
    config.model_types = vec![ModelKind::Logistic, ModelKind::Tree];
    config.forest.n_trees = 25;

    let report = run_experiment(&config, &contexts)?;
    println!(
        "{} rows, {} failed cells\n",
        report.rows.len(),
        report.failures.len()
    );

    println!(
        "{:<10} {:<9} {:<15} {:>9} {:>9}",
        "condition", "model", "protected", "test auc", "test md"
    );
    for row in report.summary() {
        if row.split == fairkit::model_selection::Split::Test {
            println!(
                "{:<10} {:<9} {:<15} {:>9.4} {:>+9.4}",
                row.condition.as_str(),
                row.model.as_str(),
                row.protected,
                row.mean_auc,
                row.mean_mean_difference
            );
        }
    }

    println!("\nfairness-utility correlation (test split):");
    for cell in fairness_utility_correlation(&report) {
        match cell.r {
            Some(r) => println!(
                "  {:<5} {:<15} r {:+.3} CI ({:+.3}, {:+.3}) over {} points",
                cell.condition.as_str(),
                cell.protected,
                r.value,
                r.ci_low,
                r.ci_high,
                cell.n_points
            ),
            None => println!(
                "  {:<5} {:<15} undefined ({})",
                cell.condition.as_str(),
                cell.protected,
                cell.note.unwrap_or_default()
            ),
        }
    }
    Ok(())
}

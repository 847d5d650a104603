//! Discrimination-aware ensemble: where the member classifiers agree, their
//! label stands; where they disagree, the row is re-assigned in favor of its
//! group (positive for disadvantaged, negative for advantaged). Works with
//! any mix of model types since only hard labels are compared.
//!
//! ```bash
//! cargo run --example ensemble_disagreement
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairkit::core::{BinaryLabels, FeatureMatrix, ProtectedAttribute};
use fairkit::estimators::{
    fit_forest, fit_logistic, fit_tree, Classifier, ForestConfig, LogisticConfig, TreeConfig,
};
use fairkit::metrics::mean_difference;
use fairkit::postprocess::daec_predict;

fn main() -> fairkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    let n = 400;
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let group = u8::from(rng.gen_bool(0.5));
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        let p = 1.0 / (1.0 + (-(a + 0.6 * b * b - 1.0 * group as f64 + 0.3)).exp());
        rows.push(vec![a, b]);
        y.push(u8::from(rng.gen_bool(p)));
        s.push(group);
    }
    let x = FeatureMatrix::from_rows(&rows)?;
    let y = BinaryLabels::new(y)?;
    let s = ProtectedAttribute::new(s, "group")?;

    let logistic = fit_logistic(&x, &y, None, &LogisticConfig::default())?;
    let tree = fit_tree(&x, &y, None, &TreeConfig {
        max_depth: Some(5),
        min_samples_leaf: 4,
    })?;
    let forest = fit_forest(&x, &y, None, &ForestConfig {
        n_trees: 25,
        ..Default::default()
    }, 7)?;

    for (name, model) in [
        ("logistic", &logistic as &dyn Classifier),
        ("tree", &tree),
        ("forest", &forest),
    ] {
        let md = mean_difference(&model.predict(&x)?, &s)?.value;
        println!("{name:<9} alone: md {md:+.4}");
    }

    let members: Vec<&dyn Classifier> = vec![&logistic, &tree, &forest];
    let ensemble = daec_predict(&members, &x, &s)?;
    let md = mean_difference(&ensemble, &s)?.value;

    let disagreements = {
        let votes: Vec<BinaryLabels> = members
            .iter()
            .map(|m| m.predict(&x))
            .collect::<fairkit::Result<_>>()?;
        (0..n)
            .filter(|&i| {
                let first = votes[0].values()[i];
                votes.iter().any(|v| v.values()[i] != first)
            })
            .count()
    };
    println!("ensemble disagreed on {disagreements} of {n} rows");
    println!("discrimination-aware ensemble: md {md:+.4}");
    Ok(())
}

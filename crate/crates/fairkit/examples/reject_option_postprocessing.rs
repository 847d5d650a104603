//! Reject-option classification: predictions whose averaged probability
//! stays inside the low-confidence critical region (width controlled by
//! theta) are re-assigned in favor of the disadvantaged group; confident
//! predictions pass through untouched.
//!
//! ```bash
//! cargo run --example reject_option_postprocessing
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairkit::core::{BinaryLabels, FeatureMatrix, ProtectedAttribute};
use fairkit::estimators::{fit_logistic, fit_tree, Classifier, LogisticConfig, TreeConfig};
use fairkit::metrics::mean_difference;
use fairkit::postprocess::{roc_predict, RejectOptionConfig};

fn main() -> fairkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let n = 400;
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let group = u8::from(rng.gen_bool(0.5));
        let a: f64 = rng.gen_range(-1.0..1.0);
        // The model can read group membership through this leaky feature, so
        // its plain predictions inherit the data's bias.
        let leak = group as f64 + rng.gen_range(-0.3..0.3);
        let p = 1.0 / (1.0 + (-(1.5 * a - 1.0 * group as f64 + 0.5)).exp());
        rows.push(vec![a, leak]);
        y.push(u8::from(rng.gen_bool(p)));
        s.push(group);
    }
    let x = FeatureMatrix::from_rows(&rows)?;
    let y = BinaryLabels::new(y)?;
    let s = ProtectedAttribute::new(s, "group")?;

    let model = fit_logistic(&x, &y, None, &LogisticConfig::default())?;
    let base = model.predict(&x)?;
    println!(
        "plain thresholded predictions: md {:+.4}",
        mean_difference(&base, &s)?.value
    );

    println!("{:>6} {:>9} {:>12}", "theta", "md", "rows flipped");
    for theta in [0.55, 0.6, 0.7, 0.8, 0.9] {
        let config = RejectOptionConfig::single(&model, theta);
        let out = roc_predict(&config, &x, &s)?;
        let flipped = out
            .values()
            .iter()
            .zip(base.values())
            .filter(|(a, b)| a != b)
            .count();
        println!(
            "{theta:>6.2} {:>+9.4} {flipped:>12}",
            mean_difference(&out, &s)?.value
        );
    }

    // The multi-classifier variant averages member probabilities.
    let tree = fit_tree(&x, &y, None, &TreeConfig {
        max_depth: Some(4),
        min_samples_leaf: 5,
    })?;
    let multi = RejectOptionConfig::multi(vec![&model, &tree], 0.7);
    let out = roc_predict(&multi, &x, &s)?;
    println!(
        "two-estimator averaged variant (theta 0.70): md {:+.4}",
        mean_difference(&out, &s)?.value
    );
    Ok(())
}

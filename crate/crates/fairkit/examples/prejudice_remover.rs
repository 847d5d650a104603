//! Prejudice-remover regularization: the training objective adds eta times a
//! mutual-information estimate between the model's scores and the protected
//! attribute. Sweeping eta trades predictive fit against score independence.
//!
//! ```bash
//! cargo run --example prejudice_remover
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairkit::core::{BinaryLabels, FeatureMatrix, ProtectedAttribute};
use fairkit::estimators::{
    fit_prejudice_remover, prejudice_index, Classifier, PrejudiceRemoverConfig,
};
use fairkit::metrics::mean_difference;

fn main() -> fairkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 300;
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let group = u8::from(rng.gen_bool(0.5));
        let merit: f64 = rng.gen_range(-1.0..1.0);
        let leak = group as f64 + rng.gen_range(-0.3..0.3);
        let p = 1.0 / (1.0 + (-(1.4 * merit - 1.3 * group as f64 + 0.6)).exp());
        rows.push(vec![merit, leak]);
        y.push(u8::from(rng.gen_bool(p)));
        s.push(group);
    }
    let x = FeatureMatrix::from_rows(&rows)?;
    let y = BinaryLabels::new(y)?;
    let s = ProtectedAttribute::new(s, "group")?;

    println!(
        "{:>8} {:>10} {:>10} {:>10}",
        "eta", "|md|", "PI", "accuracy"
    );
    // The prejudice index is a per-observation mean while the log loss is a
    // sum over n observations, so meaningful eta values scale with n.
    for eta in [0.0, 30.0, 100.0, 300.0, 900.0] {
        let model = fit_prejudice_remover(&x, &y, &s, &PrejudiceRemoverConfig {
            eta,
            ..Default::default()
        })?;
        let scores = model.predict_proba(&x)?;
        let pred = model.predict(&x)?;
        let md = mean_difference(&pred, &s)?.value.abs();
        let pi = prejudice_index(&scores, &s)?;
        let accuracy = pred
            .values()
            .iter()
            .zip(y.values())
            .filter(|(a, b)| a == b)
            .count() as f64
            / n as f64;
        println!("{eta:>8.0} {md:>10.4} {pi:>10.5} {accuracy:>10.4}");
    }
    Ok(())
}

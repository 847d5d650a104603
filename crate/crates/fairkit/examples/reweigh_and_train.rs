//! Reweighting: expected-over-observed frequency weights per (group, label)
//! cell make the weighted data group-label independent; any learner that
//! accepts sample weights can consume them.
//!
//! ```bash
//! cargo run --example reweigh_and_train
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairkit::core::{BinaryLabels, FeatureMatrix, ProtectedAttribute};
use fairkit::estimators::{fit_logistic, Classifier, LogisticConfig};
use fairkit::metrics::mean_difference;
use fairkit::preprocess::reweigh;

fn main() -> fairkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let n = 500;
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let group = u8::from(rng.gen_bool(0.45));
        let a: f64 = rng.gen_range(-1.0..1.0);
        let leak = group as f64 + rng.gen_range(-0.3..0.3);
        let p = 1.0 / (1.0 + (-(1.3 * a - 1.1 * group as f64 + 0.4)).exp());
        rows.push(vec![a, leak]);
        y.push(u8::from(rng.gen_bool(p)));
        s.push(group);
    }
    let x = FeatureMatrix::from_rows(&rows)?;
    let y = BinaryLabels::new(y)?;
    let s = ProtectedAttribute::new(s, "group")?;

    let weights = reweigh(&y, &s)?;
    println!("total weight mass {:.6} over {n} observations", weights.sum());

    // Weighted group positive rates coincide after reweighting.
    for group in [0u8, 1u8] {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            if s.values()[i] == group {
                num += weights.values()[i] * y.values()[i] as f64;
                den += weights.values()[i];
            }
        }
        println!("weighted positive rate, group {group}: {:.6}", num / den);
    }

    let plain = fit_logistic(&x, &y, None, &LogisticConfig::default())?;
    let weighted = fit_logistic(&x, &y, Some(&weights), &LogisticConfig::default())?;
    let md_plain = mean_difference(&plain.predict(&x)?, &s)?.value;
    let md_weighted = mean_difference(&weighted.predict(&x)?, &s)?.value;
    println!("prediction mean difference, unweighted fit: {md_plain:+.4}");
    println!("prediction mean difference, reweighted fit: {md_weighted:+.4}");
    Ok(())
}

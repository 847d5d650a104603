//! Relabelling (massaging): a ranker scores every observation, then the
//! highest-ranked disadvantaged negatives are promoted and the lowest-ranked
//! advantaged positives demoted until group positive rates equalize.
//!
//! ```bash
//! cargo run --example relabel_training_data
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairkit::core::{BinaryLabels, Dataset, FeatureMatrix, ProtectedAttribute};
use fairkit::metrics::mean_difference;
use fairkit::preprocess::{relabel, LogisticRanker};

fn main() -> fairkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 300;
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let group = u8::from(rng.gen_bool(0.5));
        let merit: f64 = rng.gen_range(-1.0..1.0);
        let p = 1.0 / (1.0 + (-(1.5 * merit - 0.9 * group as f64 + 0.3)).exp());
        rows.push(vec![merit, rng.gen_range(-1.0..1.0)]);
        y.push(u8::from(rng.gen_bool(p)));
        s.push(group);
    }
    let d = Dataset::new(
        FeatureMatrix::from_rows(&rows)?,
        BinaryLabels::new(y)?,
        ProtectedAttribute::new(s, "group")?,
    )?;

    let before = mean_difference(&d.y, &d.s)?;
    println!("mean difference before relabelling: {:+.4}", before.value);

    let (new_y, plan) = relabel(&d, &LogisticRanker::default())?;
    println!(
        "ranker '{}' promoted {} disadvantaged negatives and demoted {} advantaged positives",
        plan.ranker_id,
        plan.promote.len(),
        plan.demote.len()
    );

    let after = mean_difference(&new_y, &d.s)?;
    println!("mean difference after relabelling:  {:+.4}", after.value);
    println!("(train any downstream model on the relabelled targets)");
    Ok(())
}

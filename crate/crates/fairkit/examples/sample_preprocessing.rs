//! Sampling-based preprocessing: uniform sampling draws each (group, label)
//! cell to its expected-under-independence size; preferential sampling hits
//! the same counts but picks members by ranker score (duplicating top-ranked
//! rows in growing cells, removing top-ranked rows from shrinking ones).
//!
//! ```bash
//! cargo run --example sample_preprocessing
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairkit::core::{partition_groups, BinaryLabels, Dataset, FeatureMatrix, ProtectedAttribute};
use fairkit::metrics::mean_difference;
use fairkit::preprocess::{preferential_sample, uniform_sample, LogisticRanker};

fn cell_table(d: &Dataset) -> String {
    let part = partition_groups(&d.y, &d.s).unwrap();
    let [dp, dn, ap, an] = part.cell_sizes();
    format!("(d,y+)={dp} (d,y-)={dn} (a,y+)={ap} (a,y-)={an}")
}

fn main() -> fairkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let n = 240;
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let group = u8::from(rng.gen_bool(0.5));
        let v: f64 = rng.gen_range(-1.0..1.0);
        let p = 1.0 / (1.0 + (-(v - 1.2 * group as f64 + 0.6)).exp());
        rows.push(vec![v]);
        y.push(u8::from(rng.gen_bool(p)));
        s.push(group);
    }
    let d = Dataset::new(
        FeatureMatrix::from_rows(&rows)?,
        BinaryLabels::new(y)?,
        ProtectedAttribute::new(s, "group")?,
    )?;

    println!("input cells:        {}", cell_table(&d));
    println!(
        "input mean difference: {:+.4}",
        mean_difference(&d.y, &d.s)?.value
    );

    let uniform = uniform_sample(&d, 7)?;
    println!("uniform sample:     {}", cell_table(&uniform));
    println!(
        "  mean difference:  {:+.4}",
        mean_difference(&uniform.y, &uniform.s)?.value
    );

    let preferential = preferential_sample(&d, &LogisticRanker::default(), 7)?;
    println!("preferential sample: {}", cell_table(&preferential));
    println!(
        "  mean difference:  {:+.4}",
        mean_difference(&preferential.y, &preferential.s)?.value
    );
    Ok(())
}

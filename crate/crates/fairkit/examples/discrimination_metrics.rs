//! The discrimination and utility metrics on a small synthetic dataset:
//! mean difference and normalized mean difference (with confidence
//! intervals), the knn-based consistency and situation test scores, AUC, and
//! Pearson correlation.
//!
//! ```bash
//! cargo run --example discrimination_metrics
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairkit::core::{BinaryLabels, FeatureMatrix, ProbabilityScores, ProtectedAttribute};
use fairkit::metrics::{
    auc, consistency, mean_difference, normalized_mean_difference, pearson_r_with_ci,
    situation_test_score,
};

fn main() -> fairkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 400;

    // Outcomes favor the advantaged group by construction.
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut scores = Vec::with_capacity(n);
    for _ in 0..n {
        let group = u8::from(rng.gen_bool(0.4));
        let skill: f64 = rng.gen_range(0.0..1.0);
        let p_good = (0.25 + 0.6 * skill - 0.25 * group as f64).clamp(0.02, 0.98);
        rows.push(vec![skill, rng.gen_range(0.0..1.0)]);
        y.push(u8::from(rng.gen_bool(p_good)));
        s.push(group);
        scores.push(p_good);
    }
    let x = FeatureMatrix::from_rows(&rows)?;
    let y = BinaryLabels::new(y)?;
    let s = ProtectedAttribute::new(s, "group")?;

    let md = mean_difference(&y, &s)?;
    let nmd = normalized_mean_difference(&y, &s)?;
    println!("mean difference            {:+.4}  CI ({:+.4}, {:+.4})", md.value, md.ci_low, md.ci_high);
    println!("normalized mean difference {:+.4}  CI ({:+.4}, {:+.4})", nmd.value, nmd.ci_low, nmd.ci_high);

    let c = consistency(&x, &y, 5)?;
    let sts = situation_test_score(&x, &y, &s, 5)?;
    println!("consistency (k=5)          {c:.4}   (0 = neighbors agree)");
    println!("situation test score (k=5) {sts:.4}   (0 = no local disparity)");

    let scores = ProbabilityScores::new(scores)?;
    println!("auc of the generating scores {:.4}", auc(&y, &scores)?);

    // Correlation between two derived vectors, with a Fisher-z interval.
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let ys: Vec<f64> = y.values().iter().map(|&v| v as f64).collect();
    let r = pearson_r_with_ci(&xs, &ys)?;
    println!(
        "pearson r (skill vs outcome) {:+.4}  CI ({:+.4}, {:+.4})",
        r.value, r.ci_low, r.ci_high
    );
    Ok(())
}

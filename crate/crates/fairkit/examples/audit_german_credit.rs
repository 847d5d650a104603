//! Audit the German Credit dataset: group-level discrimination (mean
//! difference, normalized mean difference, both with 95% CIs) and
//! individual-level discrimination (consistency, situation test score) for
//! the three protected attributes.
//!
//! Fetch the dataset first (see `scripts/fetch_german_data.sh`), then:
//!
//! ```bash
//! cargo run --release --example audit_german_credit
//! ```

use fairkit::audit::audit_dataset;
use fairkit::core::ProtectedAttribute;
use fairkit::data::{encode, load_german_credit, ProtectedName, Standardizer};

fn main() -> fairkit::Result<()> {
    let path = std::path::Path::new("data/german.data");
    if !path.exists() {
        eprintln!(
            "data/german.data not found; run scripts/fetch_german_data.sh first \
             (or set the path below)"
        );
        std::process::exit(2);
    }

    let records = load_german_credit(path)?;
    let enc = encode(&records)?;

    // Standardize the numeric columns so knn distances are comparable.
    let standardizer = Standardizer::fit(&enc.x, &enc.numeric_columns)?;
    let x = standardizer.transform(&enc.x)?;

    let protected: Vec<&ProtectedAttribute> =
        ProtectedName::ALL.iter().map(|&n| enc.protected(n)).collect();
    let report = audit_dataset(&x, &enc.y, &protected, 5)?;

    println!("{:<16} {:<28} {:>9} {:>20}", "protected", "metric", "value", "95% CI");
    for e in &report.entries {
        match (e.value, e.ci_low, e.ci_high) {
            (Some(v), Some(lo), Some(hi)) => println!(
                "{:<16} {:<28} {:>9.4} ({:>7.4}, {:>7.4})",
                e.protected, e.metric, v, lo, hi
            ),
            (Some(v), _, _) => println!("{:<16} {:<28} {:>9.4}", e.protected, e.metric, v),
            _ => println!(
                "{:<16} {:<28} {:>9} {}",
                e.protected,
                e.metric,
                "n/a",
                e.note.as_deref().unwrap_or("")
            ),
        }
    }
    Ok(())
}

//! Model persistence: fitted predictors are written as versioned,
//! checksummed JSON so a served model can be traced back to its training
//! condition and fails loudly when tampered with.
//!
//! ```bash
//! cargo run --example save_and_load_models
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairkit::core::{BinaryLabels, FeatureMatrix, ProtectedAttribute};
use fairkit::data::Standardizer;
use fairkit::estimators::{fit_logistic, BaseModel, LogisticConfig};
use fairkit::model_io::{from_model_string, to_model_string, Predictor, TrainedArtifact};

fn main() -> fairkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 200;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect();
    let y = BinaryLabels::new(
        rows.iter()
            .map(|r| u8::from(r[0] - 0.5 * r[1] > 0.1))
            .collect::<Vec<_>>(),
    )?;
    let x = FeatureMatrix::from_rows(&rows)?;
    let s = ProtectedAttribute::new((0..n).map(|i| (i % 2) as u8).collect::<Vec<_>>(), "group")?;

    let model = fit_logistic(&x, &y, None, &LogisticConfig::default())?;
    let artifact = TrainedArtifact {
        condition: "B".into(),
        protected_name: Some(s.name().to_string()),
        feature_columns: x.column_names().to_vec(),
        standardizer: Standardizer::identity(),
        predictor: Predictor::Base(BaseModel::Logistic(model)),
    };

    let text = to_model_string(&artifact)?;
    println!("serialized model file ({} bytes):", text.len());
    for line in text.lines().take(6) {
        println!("  {line}");
    }
    println!("  ...");

    let loaded = from_model_string(&text)?;
    assert_eq!(loaded, artifact);
    let (labels, scores) = loaded.predictor.predict(&x, Some(&s))?;
    println!(
        "\nround-trip ok; first prediction: label {}, score {:.4}",
        labels.values()[0],
        scores.values()[0]
    );

    // Any payload edit breaks the checksum.
    let tampered = text.replacen("\"condition\": \"B\"", "\"condition\": \"Z\"", 1);
    match from_model_string(&tampered) {
        Err(e) => println!("tampered copy rejected: {e}"),
        Ok(_) => println!("unexpected: tampered copy loaded"),
    }
    Ok(())
}

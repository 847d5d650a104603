//! Additive counterfactually fair modelling: every feature is regressed on
//! the protected attribute, and the final classifier only ever sees the
//! residuals, so information reaching the prediction through group membership
//! is removed additively.
//!
//! ```bash
//! cargo run --example counterfactual_model
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fairkit::core::{BinaryLabels, FeatureMatrix, ProtectedAttribute};
use fairkit::estimators::{
    fit_linear_acf, fit_logistic, infer_feature_kinds, Classifier, LogisticConfig, ModelKind,
    ModelSpec,
};
use fairkit::metrics::{auc, mean_difference};

fn main() -> fairkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let n = 400;
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for _ in 0..n {
        let group = u8::from(rng.gen_bool(0.5));
        let merit: f64 = rng.gen_range(-1.0..1.0);
        // One feature leaks the group strongly, one is legitimate signal.
        let leak = 0.9 * group as f64 + rng.gen_range(-0.25..0.25);
        let p = 1.0 / (1.0 + (-(1.6 * merit - 1.2 * group as f64 + 0.5)).exp());
        rows.push(vec![merit, leak]);
        y.push(u8::from(rng.gen_bool(p)));
        s.push(group);
    }
    let x = FeatureMatrix::from_rows(&rows)?;
    let y = BinaryLabels::new(y)?;
    let s = ProtectedAttribute::new(s, "group")?;

    let baseline = fit_logistic(&x, &y, None, &LogisticConfig::default())?;
    let base_scores = baseline.predict_proba(&x)?;
    let base_md = mean_difference(&baseline.predict(&x)?, &s)?.value;

    let kinds = infer_feature_kinds(&x);
    let final_spec = ModelSpec::new(ModelKind::Logistic, 0);
    let acf = fit_linear_acf(&x, &y, &s, &kinds, &final_spec)?;
    let (acf_pred, acf_scores) = acf.predict_with_protected(&x, &s)?;
    let acf_md = mean_difference(&acf_pred, &s)?.value;

    println!("residualizer predictions per feature (advantaged vs disadvantaged):");
    for (name, r) in x.column_names().iter().zip(&acf.residualizers) {
        println!(
            "  {name}: {:.4} vs {:.4}",
            r.pred_advantaged, r.pred_disadvantaged
        );
    }
    println!();
    println!(
        "baseline logistic:   md {base_md:+.4}, auc {:.4}",
        auc(&y, &base_scores)?
    );
    println!(
        "counterfactual model: md {acf_md:+.4}, auc {:.4}",
        auc(&y, &acf_scores)?
    );
    Ok(())
}

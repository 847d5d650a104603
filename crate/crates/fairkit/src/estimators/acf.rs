//! Additive counterfactually fair modelling: regress every feature on the
//! protected attribute, keep the residuals, and train the final classifier on
//! those residuals so it cannot read group membership from the features.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::core::{BinaryLabels, FeatureMatrix, ProbabilityScores, ProtectedAttribute};
use crate::error::{Error, Result};
use crate::estimators::{fit_base, BaseModel, Classifier, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Binary,
}

/// A per-feature model of the feature given the protected attribute.
///
/// With a single binary input, both the least-squares fit used for continuous
/// features and the logistic maximum-likelihood fit used for binary features
/// predict the feature's mean within each group, so the fitted model is
/// stored as its two predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residualizer {
    pub kind: FeatureKind,
    pub pred_advantaged: f64,
    pub pred_disadvantaged: f64,
}

impl Residualizer {
    pub fn predict(&self, s: u8) -> f64 {
        if s == 1 {
            self.pred_disadvantaged
        } else {
            self.pred_advantaged
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearAcfModel {
    pub residualizers: Vec<Residualizer>,
    pub classifier: BaseModel,
}

impl LinearAcfModel {
    pub fn n_features(&self) -> usize {
        self.residualizers.len()
    }

    /// Replaces each feature value with its residual against the stored
    /// per-feature model, using the supplied protected attribute.
    pub fn residualize(&self, x: &FeatureMatrix, s: &ProtectedAttribute) -> Result<FeatureMatrix> {
        if x.n_cols() != self.residualizers.len() {
            return Err(Error::ShapeMismatch {
                expected: self.residualizers.len(),
                actual: x.n_cols(),
            });
        }
        if s.len() != x.n_rows() {
            return Err(Error::LengthMismatch {
                left: "X",
                left_len: x.n_rows(),
                right: "s",
                right_len: s.len(),
            });
        }
        let mut out = Array2::zeros(x.values().dim());
        for (i, &si) in s.values().iter().enumerate() {
            for (j, r) in self.residualizers.iter().enumerate() {
                out[(i, j)] = x.values()[(i, j)] - r.predict(si);
            }
        }
        FeatureMatrix::new(out, x.column_names().to_vec())
    }

    /// Residualizes with the supplied protected attribute, then applies the
    /// final classifier.
    pub fn predict_with_protected(
        &self,
        x: &FeatureMatrix,
        s: &ProtectedAttribute,
    ) -> Result<(BinaryLabels, ProbabilityScores)> {
        let residuals = self.residualize(x, s)?;
        let scores = self.classifier.predict_proba(&residuals)?;
        Ok((scores.threshold(), scores))
    }
}

/// Marks a column binary iff every value is 0 or 1.
pub fn infer_feature_kinds(x: &FeatureMatrix) -> Vec<FeatureKind> {
    (0..x.n_cols())
        .map(|j| {
            let binary = x.values().column(j).iter().all(|&v| v == 0.0 || v == 1.0);
            if binary {
                FeatureKind::Binary
            } else {
                FeatureKind::Continuous
            }
        })
        .collect()
}

/// Fits one residualizer per feature (feature regressed on the protected
/// attribute), then the final classifier on the residual matrix.
pub fn fit_linear_acf(
    x: &FeatureMatrix,
    y: &BinaryLabels,
    s: &ProtectedAttribute,
    feature_kinds: &[FeatureKind],
    final_spec: &ModelSpec,
) -> Result<LinearAcfModel> {
    let n = x.n_rows();
    if y.len() != n || s.len() != n {
        return Err(Error::LengthMismatch {
            left: "X",
            left_len: n,
            right: "y/s",
            right_len: y.len().min(s.len()),
        });
    }
    if feature_kinds.len() != x.n_cols() {
        return Err(Error::ShapeMismatch {
            expected: x.n_cols(),
            actual: feature_kinds.len(),
        });
    }
    let n_dis = s.disadvantaged_count();
    if n_dis == 0 || n_dis == n {
        return Err(Error::DegenerateResidualizer(format!(
            "protected attribute '{}' is constant; features cannot be regressed on it",
            s.name()
        )));
    }

    let n_adv = n - n_dis;
    let mut residualizers = Vec::with_capacity(x.n_cols());
    for (j, &kind) in feature_kinds.iter().enumerate() {
        let mut sum_adv = 0.0;
        let mut sum_dis = 0.0;
        for (i, &si) in s.values().iter().enumerate() {
            if si == 1 {
                sum_dis += x.values()[(i, j)];
            } else {
                sum_adv += x.values()[(i, j)];
            }
        }
        residualizers.push(Residualizer {
            kind,
            pred_advantaged: sum_adv / n_adv as f64,
            pred_disadvantaged: sum_dis / n_dis as f64,
        });
    }

    let partial = LinearAcfModel {
        residualizers,
        // Placeholder classifier replaced after residualizing.
        classifier: BaseModel::Logistic(crate::estimators::LogisticModel {
            coefficients: vec![0.0; x.n_cols()],
            intercept: 0.0,
            l2_lambda: 0.0,
            fit_meta: crate::estimators::FitMeta {
                iterations: 0,
                final_objective: 0.0,
                converged: true,
                objective_trace: Vec::new(),
            },
        }),
    };
    let residuals = partial.residualize(x, s)?;
    let classifier = fit_base(final_spec, &residuals, y, None)?;

    Ok(LinearAcfModel {
        residualizers: partial.residualizers,
        classifier,
    })
}

/// Prediction entry point mirroring the fit signature.
pub fn predict_acf(
    model: &LinearAcfModel,
    x: &FeatureMatrix,
    s: &ProtectedAttribute,
) -> Result<(BinaryLabels, ProbabilityScores)> {
    model.predict_with_protected(x, s)
}

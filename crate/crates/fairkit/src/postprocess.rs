//! Model-agnostic prediction postprocessing: reject-option classification and
//! discrimination-aware ensembles. Neither touches training data or the
//! training process; both re-assign labels in favor of the disadvantaged
//! group where the underlying predictions are uncertain or contested.

use crate::core::{BinaryLabels, FeatureMatrix, ProbabilityScores, ProtectedAttribute};
use crate::error::{Error, Result};
use crate::estimators::Classifier;

/// Reject-option classification over one or more probability-producing
/// estimators.
pub struct RejectOptionConfig<'a> {
    /// Critical-region threshold; rows whose averaged probability stays
    /// closer to 0.5 than this are re-assigned by group.
    pub theta: f64,
    pub estimators: Vec<&'a dyn Classifier>,
    /// Averaging weights; uniform when absent.
    pub weights: Option<Vec<f64>>,
}

pub const DEFAULT_THETA: f64 = 0.6;

impl<'a> RejectOptionConfig<'a> {
    pub fn single(estimator: &'a dyn Classifier, theta: f64) -> Self {
        Self {
            theta,
            estimators: vec![estimator],
            weights: None,
        }
    }

    pub fn multi(estimators: Vec<&'a dyn Classifier>, theta: f64) -> Self {
        Self {
            theta,
            estimators,
            weights: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.theta > 0.5 && self.theta < 1.0) {
            return Err(Error::Config(format!(
                "theta must lie strictly between 0.5 and 1, got {}",
                self.theta
            )));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("at least one estimator is required".into()));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.estimators.len() {
                return Err(Error::Config(format!(
                    "{} weights for {} estimators",
                    w.len(),
                    self.estimators.len()
                )));
            }
            if w.iter().any(|&v| !v.is_finite() || v <= 0.0) {
                return Err(Error::Config("estimator weights must be positive".into()));
            }
        }
        Ok(())
    }
}

/// The (weighted) mean probability per row across the config's estimators.
pub fn roc_scores(config: &RejectOptionConfig<'_>, x: &FeatureMatrix) -> Result<ProbabilityScores> {
    config.validate()?;
    let uniform = vec![1.0; config.estimators.len()];
    let weights = config.weights.as_deref().unwrap_or(&uniform);
    let total: f64 = weights.iter().sum();
    let mut acc = vec![0.0; x.n_rows()];
    for (est, &w) in config.estimators.iter().zip(weights) {
        let p = est.predict_proba(x)?;
        for (a, &pi) in acc.iter_mut().zip(p.values()) {
            *a += w * pi;
        }
    }
    ProbabilityScores::new(acc.into_iter().map(|v| v / total).collect())
}

/// Applies the reject-option rule to already-averaged probabilities: inside
/// the critical region (`max(p, 1-p) < theta`) disadvantaged rows get the
/// positive label and advantaged rows the negative one; outside it the plain
/// 0.5 threshold applies. A probability exactly on the region boundary counts
/// as outside.
pub fn roc_relabel(
    scores: &ProbabilityScores,
    s: &ProtectedAttribute,
    theta: f64,
) -> Result<BinaryLabels> {
    if scores.len() != s.len() {
        return Err(Error::LengthMismatch {
            left: "scores",
            left_len: scores.len(),
            right: "s",
            right_len: s.len(),
        });
    }
    if !(theta > 0.5 && theta < 1.0) {
        return Err(Error::Config(format!(
            "theta must lie strictly between 0.5 and 1, got {theta}"
        )));
    }
    let labels = scores
        .values()
        .iter()
        .zip(s.values())
        .map(|(&p, &si)| {
            if p.max(1.0 - p) < theta {
                si
            } else {
                u8::from(p >= 0.5)
            }
        })
        .collect();
    BinaryLabels::new(labels)
}

/// Reject-option classification: averaged probabilities, then the critical
/// region re-assignment.
pub fn roc_predict(
    config: &RejectOptionConfig<'_>,
    x: &FeatureMatrix,
    s: &ProtectedAttribute,
) -> Result<BinaryLabels> {
    let scores = roc_scores(config, x)?;
    roc_relabel(&scores, s, config.theta)
}

/// Discrimination-aware ensemble: where every estimator agrees the agreed
/// label stands; any disagreement re-assigns the row to its group's favored
/// label (positive for disadvantaged, negative for advantaged).
pub fn daec_predict(
    estimators: &[&dyn Classifier],
    x: &FeatureMatrix,
    s: &ProtectedAttribute,
) -> Result<BinaryLabels> {
    if estimators.is_empty() {
        return Err(Error::Config("ensemble has no estimators".into()));
    }
    if estimators.len() < 2 {
        return Err(Error::Config(
            "discrimination-aware ensemble needs at least two estimators".into(),
        ));
    }
    if s.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            left: "X",
            left_len: x.n_rows(),
            right: "s",
            right_len: s.len(),
        });
    }
    let all: Vec<BinaryLabels> = estimators
        .iter()
        .map(|e| e.predict(x))
        .collect::<Result<_>>()?;
    let labels = (0..x.n_rows())
        .map(|i| {
            let first = all[0].values()[i];
            if all.iter().all(|p| p.values()[i] == first) {
                first
            } else {
                s.values()[i]
            }
        })
        .collect();
    BinaryLabels::new(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Classifier that returns fixed probabilities regardless of input.
    struct FixedScores(Vec<f64>);

    impl Classifier for FixedScores {
        fn predict_proba(&self, _x: &FeatureMatrix) -> Result<ProbabilityScores> {
            ProbabilityScores::new(self.0.clone())
        }
    }

    fn matrix(n: usize) -> FeatureMatrix {
        FeatureMatrix::from_rows(&(0..n).map(|i| vec![i as f64]).collect::<Vec<_>>()).unwrap()
    }

    fn protected(v: &[u8]) -> ProtectedAttribute {
        ProtectedAttribute::new(v.to_vec(), "s").unwrap()
    }

    #[test]
    fn degenerate_theta_equals_plain_thresholding() {
        // A probability of exactly 0.5 sits inside every critical region, so
        // the degenerate-theta identity is stated for p != 0.5.
        let probs = vec![0.1, 0.45, 0.499, 0.501, 0.55, 0.9];
        let est = FixedScores(probs.clone());
        let x = matrix(6);
        let s = protected(&[1, 1, 0, 0, 0, 1]);
        let config = RejectOptionConfig::single(&est, 0.5 + 1e-9);
        let out = roc_predict(&config, &x, &s).unwrap();
        let plain: Vec<u8> = probs.iter().map(|&p| u8::from(p >= 0.5)).collect();
        assert_eq!(out.values(), plain.as_slice());
    }

    #[test]
    fn critical_region_assigns_by_group() {
        let est = FixedScores(vec![0.55, 0.55]);
        let x = matrix(2);
        let config = RejectOptionConfig::single(&est, 0.7);
        let out = roc_predict(&config, &x, &protected(&[1, 0])).unwrap();
        assert_eq!(out.values(), &[1, 0]);
    }

    #[test]
    fn confident_predictions_pass_through() {
        let est = FixedScores(vec![0.95, 0.02]);
        let x = matrix(2);
        let config = RejectOptionConfig::single(&est, 0.7);
        let out = roc_predict(&config, &x, &protected(&[0, 1])).unwrap();
        assert_eq!(out.values(), &[1, 0]);
    }

    #[test]
    fn boundary_probability_counts_as_outside() {
        // max(p, 1-p) == theta exactly: not inside the region.
        let est = FixedScores(vec![0.7, 0.3]);
        let x = matrix(2);
        let config = RejectOptionConfig::single(&est, 0.7);
        let out = roc_predict(&config, &x, &protected(&[1, 1])).unwrap();
        assert_eq!(out.values(), &[1, 0]);
    }

    #[test]
    fn weighted_averaging_matches_hand_average() {
        let a = FixedScores(vec![0.2, 0.4, 0.6, 0.8, 0.5]);
        let b = FixedScores(vec![0.6, 0.2, 0.9, 0.4, 0.3]);
        let x = matrix(5);
        let config = RejectOptionConfig {
            theta: 0.8,
            estimators: vec![&a, &b],
            weights: Some(vec![3.0, 1.0]),
        };
        let scores = roc_scores(&config, &x).unwrap();
        let expected = [
            (3.0 * 0.2 + 0.6) / 4.0,
            (3.0 * 0.4 + 0.2) / 4.0,
            (3.0 * 0.6 + 0.9) / 4.0,
            (3.0 * 0.8 + 0.4) / 4.0,
            (3.0 * 0.5 + 0.3) / 4.0,
        ];
        for (got, want) in scores.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_weight_multi_estimator_average() {
        let a = FixedScores(vec![0.3, 0.9]);
        let b = FixedScores(vec![0.5, 0.7]);
        let x = matrix(2);
        let config = RejectOptionConfig::multi(vec![&a, &b], 0.6);
        let scores = roc_scores(&config, &x).unwrap();
        assert!((scores.values()[0] - 0.4).abs() < 1e-12);
        assert!((scores.values()[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn theta_out_of_range_is_config_error() {
        let est = FixedScores(vec![0.5]);
        for theta in [0.5, 1.0, 0.3, 1.5] {
            let config = RejectOptionConfig::single(&est, theta);
            assert!(matches!(
                roc_predict(&config, &matrix(1), &protected(&[1])),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn growing_theta_flips_supersets() {
        let probs: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
        let est = FixedScores(probs.clone());
        let x = matrix(probs.len());
        let s = protected(&(0..probs.len()).map(|i| (i % 2) as u8).collect::<Vec<_>>());
        let plain: Vec<u8> = probs.iter().map(|&p| u8::from(p >= 0.5)).collect();
        let flipped_at = |theta: f64| -> Vec<usize> {
            let config = RejectOptionConfig::single(&est, theta);
            roc_predict(&config, &x, &s)
                .unwrap()
                .values()
                .iter()
                .zip(&plain)
                .enumerate()
                .filter(|(_, (a, b))| a != b)
                .map(|(i, _)| i)
                .collect()
        };
        let mut prev: Vec<usize> = Vec::new();
        for theta in [0.55, 0.65, 0.75, 0.85, 0.95] {
            let cur = flipped_at(theta);
            assert!(prev.iter().all(|i| cur.contains(i)),
                "flips at smaller theta must persist: {prev:?} vs {cur:?}");
            prev = cur;
        }
    }

    #[test]
    fn reject_option_never_raises_signed_mean_difference() {
        // Inside the critical region disadvantaged rows can only gain the
        // positive label and advantaged rows can only lose it, so the signed
        // mean difference of the output never exceeds the plain one.
        use crate::metrics::mean_difference;
        use proptest::prelude::*;
        use proptest::test_runner::TestRunner;

        let mut runner = TestRunner::default();
        runner
            .run(
                &(
                    proptest::collection::vec((0.0f64..1.0, 0u8..2), 6..60),
                    0.501f64..0.99,
                ),
                |(rows, theta)| {
                    let probs: Vec<f64> = rows.iter().map(|r| r.0).collect();
                    let groups: Vec<u8> = rows.iter().map(|r| r.1).collect();
                    prop_assume!(groups.contains(&0) && groups.contains(&1));
                    let est = FixedScores(probs.clone());
                    let x = matrix(rows.len());
                    let s = protected(&groups);
                    let config = RejectOptionConfig::single(&est, theta);
                    let out = roc_predict(&config, &x, &s).unwrap();
                    let plain: Vec<u8> = probs.iter().map(|&p| u8::from(p >= 0.5)).collect();
                    let md_plain =
                        mean_difference(&BinaryLabels::new(plain).unwrap(), &s).unwrap().value;
                    let md_out = mean_difference(&out, &s).unwrap().value;
                    prop_assert!(md_out <= md_plain + 1e-12);
                    Ok(())
                },
            )
            .unwrap();
    }

    #[test]
    fn daec_identical_estimators_match_single() {
        let a = FixedScores(vec![0.8, 0.3, 0.6]);
        let b = FixedScores(vec![0.8, 0.3, 0.6]);
        let c = FixedScores(vec![0.8, 0.3, 0.6]);
        let x = matrix(3);
        let s = protected(&[1, 1, 0]);
        let ests: Vec<&dyn Classifier> = vec![&a, &b, &c];
        let out = daec_predict(&ests, &x, &s).unwrap();
        assert_eq!(out.values(), a.predict(&x).unwrap().values());
    }

    #[test]
    fn daec_disagreement_assigns_by_group() {
        let a = FixedScores(vec![0.8, 0.8]);
        let b = FixedScores(vec![0.2, 0.2]);
        let x = matrix(2);
        let ests: Vec<&dyn Classifier> = vec![&a, &b];
        let out = daec_predict(&ests, &x, &protected(&[1, 0])).unwrap();
        assert_eq!(out.values(), &[1, 0]);
    }

    #[test]
    fn daec_three_estimator_truth_table() {
        // Rows: (votes, s) -> expected.
        //   row 0: 1,1,1 agree -> 1
        //   row 1: 0,0,0 agree -> 0
        //   row 2: 1,0,1 disagree, s=0 -> 0
        //   row 3: 1,0,0 disagree, s=1 -> 1
        let a = FixedScores(vec![0.9, 0.1, 0.9, 0.9]);
        let b = FixedScores(vec![0.8, 0.2, 0.3, 0.4]);
        let c = FixedScores(vec![0.7, 0.3, 0.8, 0.2]);
        let x = matrix(4);
        let ests: Vec<&dyn Classifier> = vec![&a, &b, &c];
        let out = daec_predict(&ests, &x, &protected(&[0, 1, 0, 1])).unwrap();
        assert_eq!(out.values(), &[1, 0, 0, 1]);
    }

    #[test]
    fn daec_requires_two_estimators() {
        let a = FixedScores(vec![0.5]);
        let single: Vec<&dyn Classifier> = vec![&a];
        assert!(matches!(
            daec_predict(&single, &matrix(1), &protected(&[0])),
            Err(Error::Config(_))
        ));
        let none: Vec<&dyn Classifier> = vec![];
        assert!(matches!(
            daec_predict(&none, &matrix(1), &protected(&[0])),
            Err(Error::Config(_))
        ));
    }
}

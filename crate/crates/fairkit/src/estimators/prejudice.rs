//! Prejudice-remover regularization: logistic regression whose objective
//! carries an extra mutual-information penalty between the model's scores and
//! the protected attribute.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::core::{BinaryLabels, FeatureMatrix, ProbabilityScores, ProtectedAttribute};
use crate::error::{Error, Result};
use crate::estimators::logistic::{gradient_descent, sigmoid, FitMeta, LoglossProblem, PROB_EPS};
use crate::estimators::Classifier;

/// Norm regularizer applied to the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PenaltyKind {
    L1,
    L2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrejudiceRemoverConfig {
    /// Weight on the prejudice-index penalty.
    pub eta: f64,
    pub penalty_kind: PenaltyKind,
    pub l2_lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub track_objective: bool,
}

impl Default for PrejudiceRemoverConfig {
    fn default() -> Self {
        Self {
            eta: 1.0,
            penalty_kind: PenaltyKind::L2,
            l2_lambda: 1.0,
            max_iter: 1000,
            tol: 1e-6,
            track_objective: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrejudiceRemoverModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub eta: f64,
    pub penalty_kind: PenaltyKind,
    pub l2_lambda: f64,
    pub fit_meta: FitMeta,
}

impl Classifier for PrejudiceRemoverModel {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<ProbabilityScores> {
        if x.n_cols() != self.coefficients.len() {
            return Err(Error::ShapeMismatch {
                expected: self.coefficients.len(),
                actual: x.n_cols(),
            });
        }
        let coef = Array1::from_vec(self.coefficients.clone());
        ProbabilityScores::new(
            x.values()
                .rows()
                .into_iter()
                .map(|row| sigmoid(row.dot(&coef) + self.intercept))
                .collect(),
        )
    }
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// Mutual-information estimate between probabilistic predictions and the
/// protected attribute:
/// `(1/n) sum_i sum_c P_i(c) ln( P(c|s_i) / P(c) )`, with `P(c|s)` and `P(c)`
/// the group-conditional and overall means of the per-observation
/// probabilities. Zero when the scores are distributed identically across
/// groups.
pub fn prejudice_index(scores: &ProbabilityScores, s: &ProtectedAttribute) -> Result<f64> {
    if scores.len() != s.len() {
        return Err(Error::LengthMismatch {
            left: "scores",
            left_len: scores.len(),
            right: "s",
            right_len: s.len(),
        });
    }
    let stats = GroupMeans::from_probs(scores.values(), s.values())?;
    Ok(stats.index(scores.values(), s.values()))
}

struct GroupMeans {
    q_by_group: [f64; 2],
    q_all: f64,
    n: usize,
}

impl GroupMeans {
    fn from_probs(p: &[f64], s: &[u8]) -> Result<Self> {
        let n = p.len();
        let mut sums = [0.0f64; 2];
        let mut counts = [0usize; 2];
        for (&pi, &si) in p.iter().zip(s) {
            sums[si as usize] += pi;
            counts[si as usize] += 1;
        }
        if counts[0] == 0 || counts[1] == 0 {
            return Err(Error::UndefinedMetric {
                metric: "prejudice_index",
                reason: "both protected groups must be present".into(),
            });
        }
        let q_all = (sums[0] + sums[1]) / n as f64;
        Ok(Self {
            q_by_group: [
                clamp_prob(sums[0] / counts[0] as f64),
                clamp_prob(sums[1] / counts[1] as f64),
            ],
            q_all: clamp_prob(q_all),
            n,
        })
    }

    fn index(&self, p: &[f64], s: &[u8]) -> f64 {
        let q = self.q_all;
        let total: f64 = p
            .iter()
            .zip(s)
            .map(|(&pi, &si)| {
                let qs = self.q_by_group[si as usize];
                pi * (qs / q).ln() + (1.0 - pi) * ((1.0 - qs) / (1.0 - q)).ln()
            })
            .sum();
        total / self.n as f64
    }

    /// d(PI)/d(p_j): the contributions through the group and overall means
    /// cancel exactly, leaving only the direct log-odds-ratio term.
    fn index_grad_wrt_prob(&self, s_j: u8) -> f64 {
        let q = self.q_all;
        let qs = self.q_by_group[s_j as usize];
        ((qs * (1.0 - q)) / (q * (1.0 - qs))).ln() / self.n as f64
    }
}

/// Fits a logistic model whose objective adds `eta` times the prejudice index
/// to the regularized log loss. The group-conditional score means are
/// recomputed at every gradient step.
pub fn fit_prejudice_remover(
    x: &FeatureMatrix,
    y: &BinaryLabels,
    s: &ProtectedAttribute,
    config: &PrejudiceRemoverConfig,
) -> Result<PrejudiceRemoverModel> {
    let n = x.n_rows();
    if y.len() != n || s.len() != n {
        return Err(Error::LengthMismatch {
            left: "X",
            left_len: n,
            right: "y/s",
            right_len: y.len().min(s.len()),
        });
    }
    if s.disadvantaged_count() == 0 || s.disadvantaged_count() == n {
        return Err(Error::UndefinedMetric {
            metric: "prejudice_index",
            reason: "both protected groups must be present".into(),
        });
    }
    if config.eta < 0.0 || !config.eta.is_finite() {
        return Err(Error::Parameter(format!(
            "eta must be finite and >= 0, got {}",
            config.eta
        )));
    }

    // The log-loss part, with the norm penalty applied manually so L1 is
    // possible.
    let problem = LoglossProblem {
        x: x.values(),
        y: y.as_f64(),
        weights: vec![1.0; n],
        l2_lambda: 0.0,
    };
    let s_values = s.values().to_vec();
    let objective = PrrObjective {
        problem,
        s: s_values,
        eta: config.eta,
        penalty_kind: config.penalty_kind,
        l2_lambda: config.l2_lambda,
    };

    let (coef, intercept, fit_meta) = gradient_descent(
        x.n_cols(),
        config.max_iter,
        config.tol,
        config.track_objective,
        |c, b| objective.value(c, b),
        |c, b| objective.gradient(c, b),
    );

    Ok(PrejudiceRemoverModel {
        coefficients: coef.to_vec(),
        intercept,
        eta: config.eta,
        penalty_kind: config.penalty_kind,
        l2_lambda: config.l2_lambda,
        fit_meta,
    })
}

/// Evaluates the full prejudice-remover objective (log loss + norm penalty +
/// eta times the prejudice index) and its analytic gradient at arbitrary
/// parameters. Diagnostic surface for gradient verification against finite
/// differences.
pub fn prr_objective_and_gradient(
    x: &FeatureMatrix,
    y: &BinaryLabels,
    s: &ProtectedAttribute,
    config: &PrejudiceRemoverConfig,
    coefficients: &[f64],
    intercept: f64,
) -> Result<(f64, Vec<f64>, f64)> {
    if coefficients.len() != x.n_cols() {
        return Err(Error::ShapeMismatch {
            expected: x.n_cols(),
            actual: coefficients.len(),
        });
    }
    let n = x.n_rows();
    if y.len() != n || s.len() != n {
        return Err(Error::LengthMismatch {
            left: "X",
            left_len: n,
            right: "y/s",
            right_len: y.len().min(s.len()),
        });
    }
    if s.disadvantaged_count() == 0 || s.disadvantaged_count() == n {
        return Err(Error::UndefinedMetric {
            metric: "prejudice_index",
            reason: "both protected groups must be present".into(),
        });
    }
    let objective = PrrObjective {
        problem: LoglossProblem {
            x: x.values(),
            y: y.as_f64(),
            weights: vec![1.0; n],
            l2_lambda: 0.0,
        },
        s: s.values().to_vec(),
        eta: config.eta,
        penalty_kind: config.penalty_kind,
        l2_lambda: config.l2_lambda,
    };
    let coef = Array1::from_vec(coefficients.to_vec());
    let value = objective.value(&coef, intercept);
    let (g_coef, g_int) = objective.gradient(&coef, intercept);
    Ok((value, g_coef.to_vec(), g_int))
}

pub(crate) struct PrrObjective<'a> {
    pub problem: LoglossProblem<'a>,
    pub s: Vec<u8>,
    pub eta: f64,
    pub penalty_kind: PenaltyKind,
    pub l2_lambda: f64,
}

impl PrrObjective<'_> {
    fn probs(&self, coef: &Array1<f64>, intercept: f64) -> Vec<f64> {
        self.problem
            .decision(coef, intercept)
            .iter()
            .map(|&z| sigmoid(z))
            .collect()
    }

    fn penalty(&self, coef: &Array1<f64>) -> f64 {
        match self.penalty_kind {
            PenaltyKind::L2 => self.l2_lambda * coef.iter().map(|c| c * c).sum::<f64>(),
            PenaltyKind::L1 => self.l2_lambda * coef.iter().map(|c| c.abs()).sum::<f64>(),
        }
    }

    pub fn value(&self, coef: &Array1<f64>, intercept: f64) -> f64 {
        let logloss = self.problem.objective(coef, intercept);
        let p = self.probs(coef, intercept);
        let stats = GroupMeans::from_probs(&p, &self.s).expect("groups checked at fit entry");
        logloss + self.penalty(coef) + self.eta * stats.index(&p, &self.s)
    }

    pub fn gradient(&self, coef: &Array1<f64>, intercept: f64) -> (Array1<f64>, f64) {
        let (mut g_coef, mut g_int) = self.problem.gradient(coef, intercept);
        let p = self.probs(coef, intercept);
        let stats = GroupMeans::from_probs(&p, &self.s).expect("groups checked at fit entry");
        // Prejudice-index term, chained through the sigmoid.
        for (i, (&pi, &si)) in p.iter().zip(&self.s).enumerate() {
            let dz = self.eta * stats.index_grad_wrt_prob(si) * pi * (1.0 - pi);
            g_coef.scaled_add(dz, &self.problem.x.row(i));
            g_int += dz;
        }
        // Norm penalty (subgradient for L1).
        match self.penalty_kind {
            PenaltyKind::L2 => {
                g_coef += &(2.0 * self.l2_lambda * coef);
            }
            PenaltyKind::L1 => {
                for (g, c) in g_coef.iter_mut().zip(coef) {
                    *g += self.l2_lambda * c.signum() * f64::from(*c != 0.0);
                }
            }
        }
        (g_coef, g_int)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{fit_logistic, LogisticConfig};
    use crate::metrics::mean_difference;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn synthetic_biased(n: usize, seed: u64) -> (FeatureMatrix, BinaryLabels, ProtectedAttribute) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        for _ in 0..n {
            let si = rng.gen_range(0..2u8);
            let leak = si as f64 + rng.gen_range(-0.3..0.3);
            let signal = rng.gen_range(-1.0..1.0);
            rows.push(vec![leak, signal]);
            // Outcomes favor the advantaged group.
            let p = 1.0 / (1.0 + (-(1.2 * signal - 1.5 * (si as f64) + 0.7)).exp());
            y.push(u8::from(rng.gen_bool(p)));
            s.push(si);
        }
        (
            FeatureMatrix::from_rows(&rows).unwrap(),
            BinaryLabels::new(y).unwrap(),
            ProtectedAttribute::new(s, "s").unwrap(),
        )
    }

    #[test]
    fn eta_zero_reduces_to_plain_logistic() {
        let (x, y, s) = synthetic_biased(60, 3);
        let prr = fit_prejudice_remover(&x, &y, &s, &PrejudiceRemoverConfig {
            eta: 0.0,
            tol: 1e-8,
            max_iter: 5000,
            ..Default::default()
        })
        .unwrap();
        let plain = fit_logistic(&x, &y, None, &LogisticConfig {
            tol: 1e-8,
            max_iter: 5000,
            ..Default::default()
        })
        .unwrap();
        for (a, b) in prr.coefficients.iter().zip(&plain.coefficients) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-4);
        }
        assert_abs_diff_eq!(prr.intercept, plain.intercept, epsilon = 1e-4);
    }

    #[test]
    fn index_is_zero_for_group_independent_scores() {
        // Identical score multisets in both groups.
        let p = ProbabilityScores::new(vec![0.2, 0.8, 0.5, 0.2, 0.8, 0.5]).unwrap();
        let s = ProtectedAttribute::new(vec![0, 0, 0, 1, 1, 1], "s").unwrap();
        assert_abs_diff_eq!(prejudice_index(&p, &s).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn index_positive_for_dependent_scores() {
        let p = ProbabilityScores::new(vec![0.9, 0.85, 0.8, 0.1, 0.15, 0.2]).unwrap();
        let s = ProtectedAttribute::new(vec![0, 0, 0, 1, 1, 1], "s").unwrap();
        assert!(prejudice_index(&p, &s).unwrap() > 0.01);
    }

    #[test]
    fn full_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..5 {
            let (x, y, s) = synthetic_biased(25, 100 + trial);
            let objective = PrrObjective {
                problem: LoglossProblem {
                    x: x.values(),
                    y: y.as_f64(),
                    weights: vec![1.0; x.n_rows()],
                    l2_lambda: 0.0,
                },
                s: s.values().to_vec(),
                eta: rng.gen_range(0.5..20.0),
                penalty_kind: PenaltyKind::L2,
                l2_lambda: rng.gen_range(0.0..2.0),
            };
            for _ in 0..10 {
                let coef: Array1<f64> = (0..x.n_cols())
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect();
                let intercept = rng.gen_range(-1.0..1.0);
                let (g_coef, g_int) = objective.gradient(&coef, intercept);
                let h = 1e-6;
                for j in 0..x.n_cols() {
                    let mut up = coef.clone();
                    let mut dn = coef.clone();
                    up[j] += h;
                    dn[j] -= h;
                    let fd = (objective.value(&up, intercept) - objective.value(&dn, intercept))
                        / (2.0 * h);
                    let denom = fd.abs().max(g_coef[j].abs()).max(1e-8);
                    assert!(
                        ((g_coef[j] - fd) / denom).abs() <= 1e-4,
                        "coef {j}: grad {} vs fd {}",
                        g_coef[j],
                        fd
                    );
                }
                let fd_b = (objective.value(&coef, intercept + h)
                    - objective.value(&coef, intercept - h))
                    / (2.0 * h);
                let denom = fd_b.abs().max(g_int.abs()).max(1e-8);
                assert!(((g_int - fd_b) / denom).abs() <= 1e-4);
            }
        }
    }

    #[test]
    fn l1_subgradient_matches_finite_differences_off_zero() {
        let (x, y, s) = synthetic_biased(20, 5);
        let objective = PrrObjective {
            problem: LoglossProblem {
                x: x.values(),
                y: y.as_f64(),
                weights: vec![1.0; x.n_rows()],
                l2_lambda: 0.0,
            },
            s: s.values().to_vec(),
            eta: 4.0,
            penalty_kind: PenaltyKind::L1,
            l2_lambda: 0.7,
        };
        let coef = Array1::from_vec(vec![0.4, -0.8]);
        let (g_coef, _) = objective.gradient(&coef, 0.2);
        let h = 1e-6;
        for j in 0..2 {
            let mut up = coef.clone();
            let mut dn = coef.clone();
            up[j] += h;
            dn[j] -= h;
            let fd = (objective.value(&up, 0.2) - objective.value(&dn, 0.2)) / (2.0 * h);
            assert!(((g_coef[j] - fd) / fd.abs().max(1e-8)).abs() <= 1e-4);
        }
    }

    #[test]
    fn increasing_eta_reduces_training_mean_difference() {
        let (x, y, s) = synthetic_biased(150, 9);
        let mut md_by_eta = Vec::new();
        // The prejudice index is a per-observation mean while the log loss is
        // a sum, so meaningful eta values scale with n.
        for eta in [0.0, 40.0, 150.0, 400.0, 900.0] {
            let model = fit_prejudice_remover(&x, &y, &s, &PrejudiceRemoverConfig {
                eta,
                ..Default::default()
            })
            .unwrap();
            let pred = model.predict(&x).unwrap();
            let md = mean_difference(&pred, &s).unwrap().value.abs();
            md_by_eta.push(md);
        }
        let first = md_by_eta[0];
        let last = *md_by_eta.last().unwrap();
        assert!(
            last < first,
            "expected |md| to shrink under the penalty: {md_by_eta:?}"
        );
        // Trend check: least-squares slope over the sweep is non-positive.
        let n = md_by_eta.len() as f64;
        let mean_i = (n - 1.0) / 2.0;
        let mean_md = md_by_eta.iter().sum::<f64>() / n;
        let slope_num: f64 = md_by_eta
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as f64 - mean_i) * (v - mean_md))
            .sum();
        assert!(slope_num <= 0.0, "upward trend in {md_by_eta:?}");
    }
}

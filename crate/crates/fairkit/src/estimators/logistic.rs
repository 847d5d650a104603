//! L2-regularized logistic regression fit by batch gradient descent with a
//! backtracking line search. Zero-initialized parameters make fits
//! deterministic; the optional sample weights serve the reweighting method.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::core::{BinaryLabels, FeatureMatrix, ProbabilityScores, SampleWeights};
use crate::error::{Error, Result};
use crate::estimators::Classifier;

/// Probabilities are clamped into (0, 1) by this margin.
pub(crate) const PROB_EPS: f64 = 1e-12;

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    /// Coefficient on the squared-norm penalty (the intercept is not
    /// penalized).
    pub l2_lambda: f64,
    pub max_iter: usize,
    /// Stop when the gradient norm falls to this value.
    pub tol: f64,
    /// Record the per-iteration objective in `FitMeta` (test hook).
    pub track_objective: bool,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2_lambda: 1.0,
            max_iter: 1000,
            tol: 1e-6,
            track_objective: false,
        }
    }
}

/// Optimizer outcome. Non-convergence is a warning, not a failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMeta {
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub l2_lambda: f64,
    pub fit_meta: FitMeta,
}

impl LogisticModel {
    pub fn n_features(&self) -> usize {
        self.coefficients.len()
    }

    pub(crate) fn decision_values(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.coefficients.len() {
            return Err(Error::ShapeMismatch {
                expected: self.coefficients.len(),
                actual: x.n_cols(),
            });
        }
        let coef = Array1::from_vec(self.coefficients.clone());
        Ok(x.values()
            .rows()
            .into_iter()
            .map(|row| row.dot(&coef) + self.intercept)
            .collect())
    }
}

impl Classifier for LogisticModel {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<ProbabilityScores> {
        let z = self.decision_values(x)?;
        ProbabilityScores::new(z.into_iter().map(sigmoid).collect())
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// ln(1 + e^z) - y*z, computed without overflow.
fn logloss_term(z: f64, y: f64) -> f64 {
    z.max(0.0) - y * z + (-z.abs()).exp().ln_1p()
}

/// The weighted L2-regularized negative log-likelihood and its gradient,
/// shared with the prejudice-remover objective.
pub(crate) struct LoglossProblem<'a> {
    pub x: &'a Array2<f64>,
    pub y: Vec<f64>,
    pub weights: Vec<f64>,
    pub l2_lambda: f64,
}

impl LoglossProblem<'_> {
    pub fn decision(&self, coef: &Array1<f64>, intercept: f64) -> Array1<f64> {
        self.x.dot(coef) + intercept
    }

    pub fn objective(&self, coef: &Array1<f64>, intercept: f64) -> f64 {
        let z = self.decision(coef, intercept);
        let data: f64 = z
            .iter()
            .zip(&self.y)
            .zip(&self.weights)
            .map(|((&zi, &yi), &wi)| wi * logloss_term(zi, yi))
            .sum();
        data + self.l2_lambda * coef.iter().map(|c| c * c).sum::<f64>()
    }

    /// Gradient with respect to (coefficients, intercept).
    pub fn gradient(&self, coef: &Array1<f64>, intercept: f64) -> (Array1<f64>, f64) {
        let z = self.decision(coef, intercept);
        let resid: Array1<f64> = z
            .iter()
            .zip(&self.y)
            .zip(&self.weights)
            .map(|((&zi, &yi), &wi)| wi * (sigmoid(zi) - yi))
            .collect();
        let mut g_coef = self.x.t().dot(&resid);
        g_coef += &(2.0 * self.l2_lambda * coef);
        let g_intercept = resid.sum();
        (g_coef, g_intercept)
    }
}

/// Minimizes a differentiable objective by gradient descent with backtracking
/// (Armijo) line search. The objective is non-increasing across iterations.
pub(crate) fn gradient_descent<F, G>(
    n_features: usize,
    max_iter: usize,
    tol: f64,
    track: bool,
    objective: F,
    gradient: G,
) -> (Array1<f64>, f64, FitMeta)
where
    F: Fn(&Array1<f64>, f64) -> f64,
    G: Fn(&Array1<f64>, f64) -> (Array1<f64>, f64),
{
    let mut coef = Array1::zeros(n_features);
    let mut intercept = 0.0;
    let mut obj = objective(&coef, intercept);
    let mut step = 1.0;
    let mut trace = if track { vec![obj] } else { Vec::new() };
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..max_iter {
        let (g_coef, g_int) = gradient(&coef, intercept);
        let g_sq = g_coef.iter().map(|g| g * g).sum::<f64>() + g_int * g_int;
        if g_sq.sqrt() <= tol {
            converged = true;
            break;
        }
        let mut t = step;
        let mut accepted = false;
        while t >= MIN_STEP {
            let cand_coef = &coef - &(t * &g_coef);
            let cand_int = intercept - t * g_int;
            let cand_obj = objective(&cand_coef, cand_int);
            if cand_obj <= obj - ARMIJO_C * t * g_sq {
                coef = cand_coef;
                intercept = cand_int;
                obj = cand_obj;
                step = (t * 2.0).min(1e6);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if track {
            trace.push(obj);
        }
        if !accepted {
            break; // step underflow: no descent direction progress possible
        }
    }

    (
        coef,
        intercept,
        FitMeta {
            iterations,
            final_objective: obj,
            converged,
            objective_trace: trace,
        },
    )
}

/// Evaluates the weighted L2-regularized logistic objective and its analytic
/// gradient at arbitrary parameters. Diagnostic surface for gradient
/// verification against finite differences.
pub fn logistic_objective_and_gradient(
    x: &FeatureMatrix,
    y: &BinaryLabels,
    weights: Option<&SampleWeights>,
    l2_lambda: f64,
    coefficients: &[f64],
    intercept: f64,
) -> Result<(f64, Vec<f64>, f64)> {
    if coefficients.len() != x.n_cols() {
        return Err(Error::ShapeMismatch {
            expected: x.n_cols(),
            actual: coefficients.len(),
        });
    }
    let problem = LoglossProblem {
        x: x.values(),
        y: y.as_f64(),
        weights: weights.map_or_else(|| vec![1.0; x.n_rows()], |w| w.values().to_vec()),
        l2_lambda,
    };
    let coef = Array1::from_vec(coefficients.to_vec());
    let value = problem.objective(&coef, intercept);
    let (g_coef, g_int) = problem.gradient(&coef, intercept);
    Ok((value, g_coef.to_vec(), g_int))
}

/// Fits an L2-regularized logistic regression, optionally weighted per
/// observation.
pub fn fit_logistic(
    x: &FeatureMatrix,
    y: &BinaryLabels,
    weights: Option<&SampleWeights>,
    config: &LogisticConfig,
) -> Result<LogisticModel> {
    let n = x.n_rows();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: "X",
            left_len: n,
            right: "y",
            right_len: y.len(),
        });
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::LengthMismatch {
                left: "X",
                left_len: n,
                right: "weights",
                right_len: w.len(),
            });
        }
    }
    if config.l2_lambda < 0.0 || !config.l2_lambda.is_finite() {
        return Err(Error::Parameter(format!(
            "l2_lambda must be finite and >= 0, got {}",
            config.l2_lambda
        )));
    }

    let problem = LoglossProblem {
        x: x.values(),
        y: y.as_f64(),
        weights: weights.map_or_else(|| vec![1.0; n], |w| w.values().to_vec()),
        l2_lambda: config.l2_lambda,
    };
    let (coef, intercept, fit_meta) = gradient_descent(
        x.n_cols(),
        config.max_iter,
        config.tol,
        config.track_objective,
        |c, b| problem.objective(c, b),
        |c, b| problem.gradient(c, b),
    );

    Ok(LogisticModel {
        coefficients: coef.to_vec(),
        intercept,
        l2_lambda: config.l2_lambda,
        fit_meta,
    })
}

//! Group-level and individual-level discrimination measures, utility
//! measures, and interval estimates.
//!
//! Orientation follows the convention that positive mean difference means the
//! advantaged group receives the desirable outcome more often, and that a
//! consistency score of 0 means no individual-level discrimination.

use crate::core::{BinaryLabels, FeatureMatrix, ProbabilityScores, ProtectedAttribute};
use crate::error::{Error, Result};

/// Default neighbor count for the knn-based metrics.
pub const DEFAULT_KNN_K: usize = 5;

const Z_95: f64 = 1.96;

/// A metric value with a 95% confidence interval.
///
/// The normal approximation is not clipped, so interval bounds may exceed the
/// metric's theoretical range.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub metric_name: String,
}

struct GroupRates {
    p_adv: f64,
    p_dis: f64,
    n_adv: usize,
    n_dis: usize,
}

fn group_rates(y: &BinaryLabels, s: &ProtectedAttribute, metric: &'static str) -> Result<GroupRates> {
    if y.len() != s.len() {
        return Err(Error::LengthMismatch {
            left: "y",
            left_len: y.len(),
            right: "s",
            right_len: s.len(),
        });
    }
    let (mut n_adv, mut n_dis, mut pos_adv, mut pos_dis) = (0usize, 0usize, 0usize, 0usize);
    for (&yi, &si) in y.iter().zip(s.values()) {
        if si == 1 {
            n_dis += 1;
            pos_dis += yi as usize;
        } else {
            n_adv += 1;
            pos_adv += yi as usize;
        }
    }
    if n_adv == 0 || n_dis == 0 {
        return Err(Error::UndefinedMetric {
            metric,
            reason: format!("empty group (advantaged: {n_adv}, disadvantaged: {n_dis})"),
        });
    }
    Ok(GroupRates {
        p_adv: pos_adv as f64 / n_adv as f64,
        p_dis: pos_dis as f64 / n_dis as f64,
        n_adv,
        n_dis,
    })
}

/// Mean difference: P(y=1 | advantaged) - P(y=1 | disadvantaged).
///
/// 1 is the fully discriminatory case, -1 the reverse-discrimination case.
/// The 95% CI uses the pooled two-proportion normal approximation,
/// `md +/- 1.96 * sqrt(p(1-p)(1/n_a + 1/n_d))` with `p` the overall positive
/// rate.
pub fn mean_difference(y: &BinaryLabels, s: &ProtectedAttribute) -> Result<MetricResult> {
    let g = group_rates(y, s, "mean_difference")?;
    let md = g.p_adv - g.p_dis;
    let p_pooled = y.positive_rate();
    let se = (p_pooled * (1.0 - p_pooled) * (1.0 / g.n_adv as f64 + 1.0 / g.n_dis as f64)).sqrt();
    Ok(MetricResult {
        value: md,
        ci_low: md - Z_95 * se,
        ci_high: md + Z_95 * se,
        metric_name: "mean_difference".into(),
    })
}

/// Maximum mean difference achievable by rearranging the dataset's positive
/// labels across its two groups: `min(P(y=1)/P(s=0), P(y=0)/P(s=1))`.
pub fn max_mean_difference(y: &BinaryLabels, s: &ProtectedAttribute) -> Result<f64> {
    let g = group_rates(y, s, "normalized_mean_difference")?;
    let n = (g.n_adv + g.n_dis) as f64;
    let p_pos = y.positive_rate();
    let p_adv_share = g.n_adv as f64 / n;
    let p_dis_share = g.n_dis as f64 / n;
    Ok((p_pos / p_adv_share).min((1.0 - p_pos) / p_dis_share))
}

/// Mean difference scaled by the maximum achievable discrimination.
///
/// The CI is the mean-difference CI divided by that maximum, treating it as
/// fixed.
pub fn normalized_mean_difference(
    y: &BinaryLabels,
    s: &ProtectedAttribute,
) -> Result<MetricResult> {
    let d_max = max_mean_difference(y, s)?;
    if d_max == 0.0 {
        return Err(Error::UndefinedMetric {
            metric: "normalized_mean_difference",
            reason: "maximum achievable discrimination is 0 (all labels identical)".into(),
        });
    }
    let md = mean_difference(y, s)?;
    Ok(MetricResult {
        value: md.value / d_max,
        ci_low: md.ci_low / d_max,
        ci_high: md.ci_high / d_max,
        metric_name: "normalized_mean_difference".into(),
    })
}

/// Indices of the k nearest neighbors of `query` under Euclidean distance,
/// excluding `query` itself. Distance ties break toward the lower index.
fn k_nearest(x: &FeatureMatrix, query: usize, k: usize) -> Vec<usize> {
    let q = x.row(query);
    let mut dists: Vec<(f64, usize)> = (0..x.n_rows())
        .filter(|&j| j != query)
        .map(|j| {
            let d = x
                .row(j)
                .iter()
                .zip(q.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            (d, j)
        })
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    dists.truncate(k);
    dists.into_iter().map(|(_, j)| j).collect()
}

/// Consistency: mean absolute label difference between each observation and
/// its k nearest neighbors. 0 means neighbors always agree (no
/// individual-level discrimination); 1 means they always disagree.
pub fn consistency(x: &FeatureMatrix, y: &BinaryLabels, k: usize) -> Result<f64> {
    let n = x.n_rows();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: "X",
            left_len: n,
            right: "y",
            right_len: y.len(),
        });
    }
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "neighbor count k={k} must satisfy 1 <= k < n={n}"
        )));
    }
    let labels = y.values();
    let mut total = 0.0;
    for i in 0..n {
        for j in k_nearest(x, i, k) {
            total += (labels[i] as f64 - labels[j] as f64).abs();
        }
    }
    Ok(total / (n as f64 * k as f64))
}

/// Situation test score: for every disadvantaged observation, the mean
/// difference computed over its k nearest neighbors (drawn from the whole
/// dataset and split by their own group membership), clamped at 0 and
/// averaged. Neighborhoods missing one of the groups contribute 0.
pub fn situation_test_score(
    x: &FeatureMatrix,
    y: &BinaryLabels,
    s: &ProtectedAttribute,
    k: usize,
) -> Result<f64> {
    let n = x.n_rows();
    if y.len() != n || s.len() != n {
        return Err(Error::LengthMismatch {
            left: "X",
            left_len: n,
            right: "y/s",
            right_len: y.len().min(s.len()),
        });
    }
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "neighbor count k={k} must satisfy 1 <= k < n={n}"
        )));
    }
    let dis: Vec<usize> = (0..n).filter(|&i| s.values()[i] == 1).collect();
    if dis.is_empty() {
        return Err(Error::UndefinedMetric {
            metric: "situation_test_score",
            reason: "no disadvantaged observations".into(),
        });
    }
    let labels = y.values();
    let groups = s.values();
    let mut total = 0.0;
    for &i in &dis {
        let neighbors = k_nearest(x, i, k);
        let (mut n_a, mut n_d, mut pos_a, mut pos_d) = (0usize, 0usize, 0usize, 0usize);
        for &j in &neighbors {
            if groups[j] == 1 {
                n_d += 1;
                pos_d += labels[j] as usize;
            } else {
                n_a += 1;
                pos_a += labels[j] as usize;
            }
        }
        if n_a == 0 || n_d == 0 {
            continue; // contributes 0
        }
        let local_md = pos_a as f64 / n_a as f64 - pos_d as f64 / n_d as f64;
        total += local_md.max(0.0);
    }
    Ok(total / dis.len() as f64)
}

/// Area under the ROC curve as the Mann-Whitney statistic: the probability
/// that a random positive outscores a random negative, ties counted 1/2.
pub fn auc(y_true: &BinaryLabels, scores: &ProbabilityScores) -> Result<f64> {
    auc_from_scores(y_true, scores.values())
}

/// AUC over raw scores (need not be probabilities); ranking is all that
/// matters.
pub fn auc_from_scores(y_true: &BinaryLabels, scores: &[f64]) -> Result<f64> {
    let n = y_true.len();
    if scores.len() != n {
        return Err(Error::LengthMismatch {
            left: "y_true",
            left_len: n,
            right: "scores",
            right_len: scores.len(),
        });
    }
    let n_pos = y_true.iter().filter(|&&v| v == 1).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric {
            metric: "auc",
            reason: "y_true contains a single class".into(),
        });
    }
    // Average ranks with tie handling, then the Mann-Whitney U statistic.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if y_true.values()[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Sample Pearson correlation with a 95% CI from the Fisher z-transform.
pub fn pearson_r_with_ci(x: &[f64], y: &[f64]) -> Result<MetricResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: "x",
            left_len: x.len(),
            right: "y",
            right_len: y.len(),
        });
    }
    let n = x.len();
    if n < 4 {
        return Err(Error::Parameter(format!(
            "pearson correlation CI needs at least 4 points, got {n}"
        )));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        cov += (xi - mx) * (yi - my);
        var_x += (xi - mx) * (xi - mx);
        var_y += (yi - my) * (yi - my);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::UndefinedMetric {
            metric: "pearson_r",
            reason: "constant input vector".into(),
        });
    }
    let r = (cov / (var_x.sqrt() * var_y.sqrt())).clamp(-1.0, 1.0);
    let z = r.atanh();
    let half = Z_95 / ((n - 3) as f64).sqrt();
    Ok(MetricResult {
        value: r,
        ci_low: (z - half).tanh(),
        ci_high: (z + half).tanh(),
        metric_name: "pearson_r".into(),
    })
}

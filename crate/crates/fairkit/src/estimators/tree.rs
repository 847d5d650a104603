//! CART decision trees with weighted Gini impurity, and bagged forests with
//! per-node feature subsampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core::{BinaryLabels, FeatureMatrix, ProbabilityScores, SampleWeights};
use crate::error::{Error, Result};
use crate::estimators::Classifier;
use crate::seeding::mix_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// `None` grows until leaves are pure or `min_samples_leaf` blocks.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features considered per split; `None` means `ceil(sqrt(m))`.
    pub feature_subsample: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            feature_subsample: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        /// Class probabilities [P(y=0), P(y=1)] from weighted frequencies.
        probs: [f64; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        /// Weighted Gini impurity of the node before splitting.
        impurity: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<TreeNode>,
    pub n_features: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl TreeModel {
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], id: usize) -> usize {
            match nodes[id] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn prob_pos_row(&self, row: ndarray::ArrayView1<'_, f64>) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                TreeNode::Leaf { probs } => return probs[1],
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    id = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

impl Classifier for TreeModel {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<ProbabilityScores> {
        if x.n_cols() != self.n_features {
            return Err(Error::ShapeMismatch {
                expected: self.n_features,
                actual: x.n_cols(),
            });
        }
        ProbabilityScores::new(
            x.values()
                .rows()
                .into_iter()
                .map(|row| self.prob_pos_row(row))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub n_features: usize,
    pub feature_subsample: usize,
    pub seed: u64,
}

impl Classifier for ForestModel {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<ProbabilityScores> {
        if x.n_cols() != self.n_features {
            return Err(Error::ShapeMismatch {
                expected: self.n_features,
                actual: x.n_cols(),
            });
        }
        let mut acc = vec![0.0; x.n_rows()];
        for tree in &self.trees {
            for (a, row) in acc.iter_mut().zip(x.values().rows()) {
                *a += tree.prob_pos_row(row);
            }
        }
        let k = self.trees.len() as f64;
        ProbabilityScores::new(acc.into_iter().map(|v| v / k).collect())
    }
}

/// Weighted Gini impurity of a label multiset: `1 - p0^2 - p1^2` with class
/// shares taken from the weights.
pub fn weighted_gini(labels: &[u8], weights: &[f64]) -> f64 {
    let mut w_pos = 0.0;
    let mut w_total = 0.0;
    for (&y, &w) in labels.iter().zip(weights) {
        w_total += w;
        if y == 1 {
            w_pos += w;
        }
    }
    if w_total <= 0.0 {
        return 0.0;
    }
    let p = w_pos / w_total;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct TreeBuilder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [u8],
    weights: &'a [f64],
    max_depth: Option<usize>,
    min_samples_leaf: usize,
    feature_subsample: Option<usize>,
    rng: Option<ChaCha8Rng>,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl TreeBuilder<'_> {
    fn leaf(&mut self, indices: &[usize]) -> usize {
        let mut w_pos = 0.0;
        let mut w_total = 0.0;
        let mut count_pos = 0usize;
        for &i in indices {
            w_total += self.weights[i];
            if self.y[i] == 1 {
                w_pos += self.weights[i];
                count_pos += 1;
            }
        }
        // A node whose rows all carry zero weight falls back to counts.
        let p = if w_total > 0.0 {
            w_pos / w_total
        } else {
            count_pos as f64 / indices.len() as f64
        };
        self.nodes.push(TreeNode::Leaf { probs: [1.0 - p, p] });
        self.nodes.len() - 1
    }

    fn node_impurity(&self, indices: &[usize]) -> f64 {
        let labels: Vec<u8> = indices.iter().map(|&i| self.y[i]).collect();
        let ws: Vec<f64> = indices.iter().map(|&i| self.weights[i]).collect();
        weighted_gini(&labels, &ws)
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let m = self.x.n_cols();
        match (self.feature_subsample, self.rng.as_mut()) {
            (Some(k), Some(rng)) if k < m => {
                let mut picked = rand::seq::index::sample(rng, m, k).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..m).collect(),
        }
    }

    fn best_split(&mut self, indices: &[usize]) -> Option<BestSplit> {
        let features = self.candidate_features();
        let mut w_total = 0.0;
        let mut w_pos_total = 0.0;
        for &i in indices {
            w_total += self.weights[i];
            w_pos_total += self.weights[i] * f64::from(self.y[i]);
        }
        if w_total <= 0.0 {
            return None;
        }

        let mut best: Option<BestSplit> = None;
        let mut sorted: Vec<usize> = Vec::with_capacity(indices.len());
        for feature in features {
            sorted.clear();
            sorted.extend_from_slice(indices);
            let col = self.x.values().column(feature);
            sorted.sort_by(|&a, &b| col[a].partial_cmp(&col[b]).unwrap().then(a.cmp(&b)));

            let mut w_left = 0.0;
            let mut w_pos_left = 0.0;
            for t in 0..sorted.len() - 1 {
                let i = sorted[t];
                w_left += self.weights[i];
                w_pos_left += self.weights[i] * f64::from(self.y[i]);
                let v_here = col[i];
                let v_next = col[sorted[t + 1]];
                if v_here == v_next {
                    continue;
                }
                let n_left = t + 1;
                let n_right = sorted.len() - n_left;
                if n_left < self.min_samples_leaf || n_right < self.min_samples_leaf {
                    continue;
                }
                let w_right = w_total - w_left;
                let gini_side = |w: f64, w_pos: f64| {
                    if w <= 0.0 {
                        0.0
                    } else {
                        let p = w_pos / w;
                        1.0 - p * p - (1.0 - p) * (1.0 - p)
                    }
                };
                let score = (w_left * gini_side(w_left, w_pos_left)
                    + w_right * gini_side(w_right, w_pos_total - w_pos_left))
                    / w_total;
                // Zero-gain splits are accepted (like standard CART), since
                // they can still enable separating splits further down.
                if best.as_ref().is_none_or(|b| score < b.score) {
                    best = Some(BestSplit {
                        feature,
                        threshold: (v_here + v_next) / 2.0,
                        score,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, indices: &[usize], depth: usize) -> usize {
        let pure = indices.iter().all(|&i| self.y[i] == self.y[indices[0]]);
        let depth_capped = self.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || indices.len() < 2 * self.min_samples_leaf {
            return self.leaf(indices);
        }
        let impurity = self.node_impurity(indices);
        let Some(split) = self.best_split(indices) else {
            return self.leaf(indices);
        };
        let col = self.x.values().column(split.feature);
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| col[i] <= split.threshold);

        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { probs: [0.0, 0.0] }); // placeholder
        let left = self.build(&left_idx, depth + 1);
        let right = self.build(&right_idx, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            impurity,
            left,
            right,
        };
        id
    }
}

fn check_fit_inputs(
    x: &FeatureMatrix,
    y: &BinaryLabels,
    weights: Option<&SampleWeights>,
) -> Result<()> {
    if y.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            left: "X",
            left_len: x.n_rows(),
            right: "y",
            right_len: y.len(),
        });
    }
    if let Some(w) = weights {
        if w.len() != x.n_rows() {
            return Err(Error::LengthMismatch {
                left: "X",
                left_len: x.n_rows(),
                right: "weights",
                right_len: w.len(),
            });
        }
    }
    Ok(())
}

/// Fits a CART classification tree with weighted Gini impurity. Split search
/// iterates features in index order with thresholds at midpoints between
/// distinct sorted values, so fits are deterministic.
pub fn fit_tree(
    x: &FeatureMatrix,
    y: &BinaryLabels,
    weights: Option<&SampleWeights>,
    config: &TreeConfig,
) -> Result<TreeModel> {
    check_fit_inputs(x, y, weights)?;
    if config.min_samples_leaf == 0 {
        return Err(Error::Parameter("min_samples_leaf must be >= 1".into()));
    }
    let w = weights.map_or_else(|| vec![1.0; x.n_rows()], |w| w.values().to_vec());
    let mut builder = TreeBuilder {
        x,
        y: y.values(),
        weights: &w,
        max_depth: config.max_depth,
        min_samples_leaf: config.min_samples_leaf,
        feature_subsample: None,
        rng: None,
        nodes: Vec::new(),
    };
    let all: Vec<usize> = (0..x.n_rows()).collect();
    builder.build(&all, 0);
    Ok(TreeModel {
        nodes: builder.nodes,
        n_features: x.n_cols(),
        max_depth: config.max_depth,
        min_samples_leaf: config.min_samples_leaf,
    })
}

/// Fits a bagged forest: each tree sees a bootstrap resample and considers a
/// fresh feature subsample at every split. Tree t draws from a stream seeded
/// by (seed, t), so results do not depend on fitting order.
pub fn fit_forest(
    x: &FeatureMatrix,
    y: &BinaryLabels,
    weights: Option<&SampleWeights>,
    config: &ForestConfig,
    seed: u64,
) -> Result<ForestModel> {
    check_fit_inputs(x, y, weights)?;
    if config.n_trees == 0 {
        return Err(Error::Parameter("forest needs at least one tree".into()));
    }
    if config.min_samples_leaf == 0 {
        return Err(Error::Parameter("min_samples_leaf must be >= 1".into()));
    }
    let n = x.n_rows();
    let m = x.n_cols();
    let subsample = config
        .feature_subsample
        .unwrap_or_else(|| (m as f64).sqrt().ceil() as usize)
        .clamp(1, m);
    let w = weights.map_or_else(|| vec![1.0; n], |w| w.values().to_vec());

    let trees: Vec<TreeModel> = (0..config.n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, t as u64));
            let boot: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let boot_y: Vec<u8> = boot.iter().map(|&i| y.values()[i]).collect();
            let boot_w: Vec<f64> = boot.iter().map(|&i| w[i]).collect();
            let boot_x = x.select_rows(&boot);
            let mut builder = TreeBuilder {
                x: &boot_x,
                y: &boot_y,
                weights: &boot_w,
                max_depth: config.max_depth,
                min_samples_leaf: config.min_samples_leaf,
                feature_subsample: Some(subsample),
                rng: Some(rng),
                nodes: Vec::new(),
            };
            let all: Vec<usize> = (0..n).collect();
            builder.build(&all, 0);
            TreeModel {
                nodes: builder.nodes,
                n_features: m,
                max_depth: config.max_depth,
                min_samples_leaf: config.min_samples_leaf,
            }
        })
        .collect();

    Ok(ForestModel {
        trees,
        n_features: m,
        feature_subsample: subsample,
        seed,
    })
}

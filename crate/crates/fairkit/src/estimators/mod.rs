//! Baseline learners and fairness-aware in-training methods.

mod acf;
mod logistic;
mod prejudice;
mod tree;

pub use acf::{fit_linear_acf, infer_feature_kinds, predict_acf, FeatureKind, LinearAcfModel};
pub use logistic::{
    fit_logistic, logistic_objective_and_gradient, FitMeta, LogisticConfig, LogisticModel,
};
pub use prejudice::{
    fit_prejudice_remover, prejudice_index, prr_objective_and_gradient, PenaltyKind,
    PrejudiceRemoverConfig, PrejudiceRemoverModel,
};
pub use tree::{
    fit_forest, fit_tree, weighted_gini, ForestConfig, ForestModel, TreeConfig, TreeModel,
};

use serde::{Deserialize, Serialize};

use crate::core::{BinaryLabels, FeatureMatrix, ProbabilityScores, SampleWeights};
use crate::error::Result;

/// A fitted binary classifier producing probability scores.
///
/// `predict` is always `predict_proba >= 0.5`, so thresholding is consistent
/// across model types.
pub trait Classifier {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<ProbabilityScores>;

    fn predict(&self, x: &FeatureMatrix) -> Result<BinaryLabels> {
        Ok(self.predict_proba(x)?.threshold())
    }
}

/// The base model families used throughout the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logistic,
    Tree,
    Forest,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::Tree => "tree",
            ModelKind::Forest => "forest",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "logistic" => Some(ModelKind::Logistic),
            "tree" => Some(ModelKind::Tree),
            "forest" => Some(ModelKind::Forest),
            _ => None,
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hyperparameters for fitting any base model kind. Unused fields are
/// ignored by kinds that do not need them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub logistic: LogisticConfig,
    pub tree: TreeConfig,
    pub forest: ForestConfig,
    /// Base seed for stochastic fits (forests).
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        Self {
            kind,
            logistic: LogisticConfig::default(),
            tree: TreeConfig::default(),
            forest: ForestConfig::default(),
            seed,
        }
    }
}

/// A fitted base model of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum BaseModel {
    Logistic(LogisticModel),
    Tree(TreeModel),
    Forest(ForestModel),
}

impl Classifier for BaseModel {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<ProbabilityScores> {
        match self {
            BaseModel::Logistic(m) => m.predict_proba(x),
            BaseModel::Tree(m) => m.predict_proba(x),
            BaseModel::Forest(m) => m.predict_proba(x),
        }
    }
}

/// Fits a base model of the requested kind with its hyperparameters.
pub fn fit_base(
    spec: &ModelSpec,
    x: &FeatureMatrix,
    y: &BinaryLabels,
    weights: Option<&SampleWeights>,
) -> Result<BaseModel> {
    match spec.kind {
        ModelKind::Logistic => Ok(BaseModel::Logistic(fit_logistic(
            x,
            y,
            weights,
            &spec.logistic,
        )?)),
        ModelKind::Tree => Ok(BaseModel::Tree(fit_tree(x, y, weights, &spec.tree)?)),
        ModelKind::Forest => Ok(BaseModel::Forest(fit_forest(
            x, y, weights, &spec.forest, spec.seed,
        )?)),
    }
}

//! fairkit: a fairness-aware machine learning toolkit for binary
//! classification.
//!
//! The library measures potentially discriminatory patterns in data and
//! predictions (mean difference, normalized mean difference, consistency,
//! situation test score), mitigates them before training (relabelling,
//! reweighting, sampling), during training (prejudice-remover
//! regularization, additive counterfactually fair models), or after training
//! (reject-option classification, discrimination-aware ensembles), and ships
//! a cross-validation harness for studying the fairness-utility tradeoff.
//!
//! Every capability has a runnable example under `examples/`; the `fairkit`
//! binary exposes the same functionality as subcommands (`audit`, `train`,
//! `predict`, `experiment`, `report`).

pub mod audit;
pub mod cli;
pub mod core;
pub mod data;
pub mod error;
pub mod estimators;
pub mod metrics;
pub mod model_io;
pub mod model_selection;
pub mod postprocess;
pub mod preprocess;
pub mod seeding;

pub use crate::core::{
    partition_groups, validate_dataset, BinaryLabels, Dataset, FeatureMatrix, GroupPartition,
    ProbabilityScores, ProtectedAttribute, SampleWeights,
};
pub use crate::error::{Error, Result};

//! Cross-validation, the five-condition experiment protocol, and the
//! fairness-utility correlation analysis.

mod report;

pub use report::{
    correlation_csv, summary_csv, CorrelationCell, ExperimentReport, FoldFailure, ReportRow,
    Split, SummaryRow, REPORT_CSV_HEADER,
};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{partition_groups, BinaryLabels, Dataset, FeatureMatrix, ProtectedAttribute};
use crate::data::Standardizer;
use crate::error::{Error, Result};
use crate::estimators::{
    fit_base, fit_linear_acf, fit_prejudice_remover, infer_feature_kinds, ForestConfig,
    LogisticConfig, ModelKind, ModelSpec, PenaltyKind, PrejudiceRemoverConfig, TreeConfig,
};
use crate::metrics::{auc, mean_difference, pearson_r_with_ci};
use crate::model_io::Predictor;
use crate::postprocess::DEFAULT_THETA;
use crate::preprocess::{preferential_sample, relabel, reweigh, uniform_sample, LogisticRanker};
use crate::seeding::seed_for;

use report::round6;

/// Experiment conditions: the five-condition protocol plus the extra
/// mitigation methods the runner also supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// B: all input variables, protected attributes included.
    #[serde(rename = "B")]
    Baseline,
    /// RPA: protected-source columns removed from the features.
    #[serde(rename = "RPA")]
    RemoveProtected,
    /// RTV: training labels relabelled before fitting.
    #[serde(rename = "RTV")]
    RelabelTarget,
    /// CFM: additive counterfactually fair model.
    #[serde(rename = "CFM")]
    CounterfactualModel,
    /// ROC: reject-option classification of the base model's predictions.
    #[serde(rename = "ROC")]
    RejectOption,
    /// RW: reweighted training observations.
    #[serde(rename = "RW")]
    Reweigh,
    /// US: uniform (group, label) cell resampling.
    #[serde(rename = "US")]
    UniformSampling,
    /// PS: preferential cell resampling by ranker score.
    #[serde(rename = "PS")]
    PreferentialSampling,
    /// PRR: prejudice-remover regularization (logistic only).
    #[serde(rename = "PRR")]
    PrejudiceRemover,
    /// DAEC: discrimination-aware ensemble over bootstrap refits.
    #[serde(rename = "DAEC")]
    DisagreementEnsemble,
}

impl Condition {
    /// The default comparison grid of mitigation conditions.
    pub const DEFAULT_GRID: [Condition; 5] = [
        Condition::Baseline,
        Condition::RemoveProtected,
        Condition::RelabelTarget,
        Condition::CounterfactualModel,
        Condition::RejectOption,
    ];

    pub const ALL: [Condition; 10] = [
        Condition::Baseline,
        Condition::RemoveProtected,
        Condition::RelabelTarget,
        Condition::CounterfactualModel,
        Condition::RejectOption,
        Condition::Reweigh,
        Condition::UniformSampling,
        Condition::PreferentialSampling,
        Condition::PrejudiceRemover,
        Condition::DisagreementEnsemble,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Baseline => "B",
            Condition::RemoveProtected => "RPA",
            Condition::RelabelTarget => "RTV",
            Condition::CounterfactualModel => "CFM",
            Condition::RejectOption => "ROC",
            Condition::Reweigh => "RW",
            Condition::UniformSampling => "US",
            Condition::PreferentialSampling => "PS",
            Condition::PrejudiceRemover => "PRR",
            Condition::DisagreementEnsemble => "DAEC",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Condition::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown condition '{s}'")))
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Grid and hyperparameter selections for an experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub conditions: Vec<Condition>,
    pub model_types: Vec<ModelKind>,
    pub folds: usize,
    pub seed: u64,
    /// Critical-region threshold for the ROC condition.
    pub theta: f64,
    /// Prejudice-index weight for the PRR condition.
    pub eta: f64,
    /// Bootstrap ensemble size for the DAEC condition.
    pub daec_members: usize,
    pub logistic: LogisticConfig,
    pub tree: TreeConfig,
    pub forest: ForestConfig,
}

impl ExperimentConfig {
    pub fn default_grid(seed: u64) -> Self {
        Self {
            conditions: Condition::DEFAULT_GRID.to_vec(),
            model_types: vec![ModelKind::Logistic, ModelKind::Tree, ModelKind::Forest],
            folds: 10,
            seed,
            theta: DEFAULT_THETA,
            eta: 1.0,
            daec_members: 5,
            logistic: LogisticConfig::default(),
            tree: TreeConfig::default(),
            forest: ForestConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.conditions.is_empty() {
            return Err(Error::Config("no conditions selected".into()));
        }
        if self.model_types.is_empty() {
            return Err(Error::Config("no model types selected".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "cross validation needs at least 2 folds, got {}",
                self.folds
            )));
        }
        if !(self.theta > 0.5 && self.theta < 1.0) {
            return Err(Error::Config(format!(
                "theta must lie strictly between 0.5 and 1, got {}",
                self.theta
            )));
        }
        if self.eta < 0.0 || !self.eta.is_finite() {
            return Err(Error::Config(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if self.daec_members < 2 {
            return Err(Error::Config(
                "the disagreement ensemble needs at least 2 members".into(),
            ));
        }
        Ok(())
    }
}

/// One protected-attribute context: the full unscaled feature matrix, labels,
/// the protected vector, which columns encode the protected source data, and
/// which columns are numeric (standardized per training fold).
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub protected_label: String,
    pub x: FeatureMatrix,
    pub y: BinaryLabels,
    pub s: ProtectedAttribute,
    pub protected_source_columns: Vec<String>,
    pub numeric_column_names: Vec<String>,
}

/// Disjoint, exhaustive train/test index pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KfoldPlan {
    pub folds: Vec<FoldIndices>,
    /// False when a (y, s) cell was smaller than k and stratification fell
    /// back to the labels alone.
    pub stratified_on_cells: bool,
}

/// Stratified k-fold split: strata are the four (y, s) cells when every cell
/// holds at least k observations, the two label classes otherwise. Members
/// of each stratum are dealt round-robin after a seeded shuffle, so per-fold
/// stratum proportions stay within one observation of the global ones.
pub fn stratified_kfold(
    y: &BinaryLabels,
    s: &ProtectedAttribute,
    k: usize,
    seed: u64,
) -> Result<KfoldPlan> {
    let n = y.len();
    if k < 2 {
        return Err(Error::Parameter(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::Parameter(format!(
            "fold count {k} exceeds observation count {n}"
        )));
    }
    let part = partition_groups(y, s)?;
    let cells = [part.dis_pos, part.dis_neg, part.adv_pos, part.adv_neg];
    let stratified_on_cells = cells.iter().all(|c| c.is_empty() || c.len() >= k);
    let strata: Vec<Vec<usize>> = if stratified_on_cells {
        cells.into_iter().filter(|c| !c.is_empty()).collect()
    } else {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, &yi) in y.values().iter().enumerate() {
            if yi == 1 {
                pos.push(i);
            } else {
                neg.push(i);
            }
        }
        [pos, neg].into_iter().filter(|c| !c.is_empty()).collect()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; n];
    let mut counter = 0usize;
    for mut stratum in strata {
        stratum.shuffle(&mut rng);
        for idx in stratum {
            fold_of[idx] = counter % k;
            counter += 1;
        }
    }

    let folds = (0..k)
        .map(|f| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (i, &fi) in fold_of.iter().enumerate() {
                if fi == f {
                    test.push(i);
                } else {
                    train.push(i);
                }
            }
            FoldIndices { train, test }
        })
        .collect();
    Ok(KfoldPlan {
        folds,
        stratified_on_cells,
    })
}

fn kfold_seed(config_seed: u64, protected_label: &str) -> u64 {
    seed_for(config_seed, &format!("kfold::{protected_label}"))
}

fn cell_seed(
    config_seed: u64,
    condition: Condition,
    model: ModelKind,
    protected_label: &str,
    fold: usize,
) -> u64 {
    seed_for(
        config_seed,
        &format!("cell::{}::{}::{}::{}", condition.as_str(), model.as_str(), protected_label, fold),
    )
}

/// Fits a predictor for one condition on already-standardized training data.
pub(crate) fn fit_condition(
    config: &ExperimentConfig,
    condition: Condition,
    model: ModelKind,
    x_train: &FeatureMatrix,
    y_train: &BinaryLabels,
    s_train: &ProtectedAttribute,
    seed: u64,
) -> Result<Predictor> {
    let spec = ModelSpec {
        kind: model,
        logistic: config.logistic.clone(),
        tree: config.tree.clone(),
        forest: config.forest.clone(),
        seed,
    };

    Ok(match condition {
        Condition::Baseline | Condition::RemoveProtected => {
            Predictor::Base(fit_base(&spec, x_train, y_train, None)?)
        }
        Condition::RelabelTarget => {
            let d = Dataset::new(x_train.clone(), y_train.clone(), s_train.clone())?;
            let ranker = LogisticRanker {
                config: config.logistic.clone(),
            };
            let (new_y, _plan) = relabel(&d, &ranker)?;
            Predictor::Base(fit_base(&spec, x_train, &new_y, None)?)
        }
        Condition::CounterfactualModel => {
            let kinds = infer_feature_kinds(x_train);
            Predictor::Acf(fit_linear_acf(x_train, y_train, s_train, &kinds, &spec)?)
        }
        Condition::RejectOption => Predictor::RejectOption {
            base: fit_base(&spec, x_train, y_train, None)?,
            theta: config.theta,
        },
        Condition::Reweigh => {
            let weights = reweigh(y_train, s_train)?;
            Predictor::Base(fit_base(&spec, x_train, y_train, Some(&weights))?)
        }
        Condition::UniformSampling => {
            let d = Dataset::new(x_train.clone(), y_train.clone(), s_train.clone())?;
            let sampled = uniform_sample(&d, seed_for(seed, "uniform_sample"))?;
            Predictor::Base(fit_base(&spec, &sampled.x, &sampled.y, None)?)
        }
        Condition::PreferentialSampling => {
            let d = Dataset::new(x_train.clone(), y_train.clone(), s_train.clone())?;
            let ranker = LogisticRanker {
                config: config.logistic.clone(),
            };
            let sampled = preferential_sample(&d, &ranker, seed_for(seed, "preferential_sample"))?;
            Predictor::Base(fit_base(&spec, &sampled.x, &sampled.y, None)?)
        }
        Condition::PrejudiceRemover => {
            if model != ModelKind::Logistic {
                return Err(Error::Config(format!(
                    "the PRR condition requires the logistic model type, got {model}"
                )));
            }
            let prr = PrejudiceRemoverConfig {
                eta: config.eta,
                penalty_kind: PenaltyKind::L2,
                l2_lambda: config.logistic.l2_lambda,
                max_iter: config.logistic.max_iter,
                tol: config.logistic.tol,
                track_objective: false,
            };
            Predictor::PrejudiceRemover(fit_prejudice_remover(x_train, y_train, s_train, &prr)?)
        }
        Condition::DisagreementEnsemble => {
            let n_train = x_train.n_rows();
            let mut members = Vec::with_capacity(config.daec_members);
            for j in 0..config.daec_members {
                let member_seed = seed_for(seed, &format!("daec::{j}"));
                let mut rng = ChaCha8Rng::seed_from_u64(member_seed);
                let boot: Vec<usize> = (0..n_train).map(|_| rng.gen_range(0..n_train)).collect();
                let member_spec = ModelSpec {
                    seed: member_seed,
                    ..spec.clone()
                };
                members.push(fit_base(
                    &member_spec,
                    &x_train.select_rows(&boot),
                    &y_train.select(&boot),
                    None,
                )?);
            }
            Predictor::Ensemble { members }
        }
    })
}

/// Drops protected columns when the condition asks for it, standardizes with
/// training-fold statistics, and returns the working matrix.
pub(crate) fn prepare_features(
    condition: Condition,
    data_x: &FeatureMatrix,
    protected_source_columns: &[String],
    numeric_column_names: &[String],
    train_rows: &[usize],
) -> Result<(FeatureMatrix, Standardizer)> {
    let x_work = if condition == Condition::RemoveProtected && !protected_source_columns.is_empty()
    {
        data_x.drop_columns(protected_source_columns)?
    } else {
        data_x.clone()
    };
    let numeric_idx: Vec<usize> = x_work
        .column_names()
        .iter()
        .enumerate()
        .filter(|(_, name)| numeric_column_names.contains(name))
        .map(|(j, _)| j)
        .collect();
    let standardizer = Standardizer::fit_rows(&x_work, &numeric_idx, train_rows)?;
    let x_std = standardizer.transform(&x_work)?;
    Ok((x_std, standardizer))
}

/// Fits one (condition, model) cell on a training fold, per the condition's
/// recipe, and returns the fitted predictor plus the standardized full
/// feature matrix used for scoring both splits.
fn fit_fold(
    config: &ExperimentConfig,
    condition: Condition,
    model: ModelKind,
    data: &ExperimentData,
    fold: &FoldIndices,
    seed: u64,
) -> Result<(Predictor, FeatureMatrix)> {
    let (x_std, _standardizer) = prepare_features(
        condition,
        &data.x,
        &data.protected_source_columns,
        &data.numeric_column_names,
        &fold.train,
    )?;
    let predictor = fit_condition(
        config,
        condition,
        model,
        &x_std.select_rows(&fold.train),
        &data.y.select(&fold.train),
        &data.s.select(&fold.train),
        seed,
    )?;
    Ok((predictor, x_std))
}

fn score_fold(
    predictor: &Predictor,
    x_std: &FeatureMatrix,
    data: &ExperimentData,
    condition: Condition,
    model: ModelKind,
    fold_no: usize,
    fold: &FoldIndices,
) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::with_capacity(2);
    for (split, idx) in [(Split::Train, &fold.train), (Split::Test, &fold.test)] {
        let x_split = x_std.select_rows(idx);
        let y_split = data.y.select(idx);
        let s_split = data.s.select(idx);
        let (labels, scores) = predictor.predict(&x_split, Some(&s_split))?;
        let auc_value = auc(&y_split, &scores)?;
        let md_value = mean_difference(&labels, &s_split)?.value;
        rows.push(ReportRow {
            condition,
            model,
            protected: data.protected_label.clone(),
            fold: fold_no,
            split,
            auc: round6(auc_value),
            mean_difference: round6(md_value),
        });
    }
    Ok(rows)
}

/// Runs one condition for one model type across all folds of one protected
/// context. Fold failures are recorded and the run continues.
pub fn run_condition(
    config: &ExperimentConfig,
    condition: Condition,
    model: ModelKind,
    data: &ExperimentData,
) -> Result<(Vec<ReportRow>, Vec<FoldFailure>)> {
    config.validate()?;
    let plan = stratified_kfold(
        &data.y,
        &data.s,
        config.folds,
        kfold_seed(config.seed, &data.protected_label),
    )?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (fold_no, fold) in plan.folds.iter().enumerate() {
        let seed = cell_seed(config.seed, condition, model, &data.protected_label, fold_no);
        match fit_fold(config, condition, model, data, fold, seed)
            .and_then(|(p, x)| score_fold(&p, &x, data, condition, model, fold_no, fold))
        {
            Ok(mut fold_rows) => rows.append(&mut fold_rows),
            Err(e) => failures.push(FoldFailure {
                condition,
                model,
                protected: data.protected_label.clone(),
                fold: fold_no,
                message: e.to_string(),
            }),
        }
    }
    Ok((rows, failures))
}

/// Runs the full (condition x model x protected x fold) grid. Cells execute
/// independently (in parallel) and rows are assembled in grid order, so the
/// report is identical regardless of scheduling.
pub fn run_experiment(
    config: &ExperimentConfig,
    data_by_protected: &[ExperimentData],
) -> Result<ExperimentReport> {
    config.validate()?;
    if data_by_protected.is_empty() {
        return Err(Error::Config("no protected attribute contexts given".into()));
    }

    let mut notes = Vec::new();
    let mut plans = Vec::with_capacity(data_by_protected.len());
    for data in data_by_protected {
        let plan = stratified_kfold(
            &data.y,
            &data.s,
            config.folds,
            kfold_seed(config.seed, &data.protected_label),
        )?;
        if !plan.stratified_on_cells {
            notes.push(format!(
                "protected '{}': a (label, group) cell is smaller than the fold count; folds were stratified on labels alone",
                data.protected_label
            ));
        }
        plans.push(plan);
    }

    // (condition index, model index, protected index, fold index)
    let mut cells = Vec::new();
    for ci in 0..config.conditions.len() {
        for mi in 0..config.model_types.len() {
            for (pi, plan) in plans.iter().enumerate() {
                for fi in 0..plan.folds.len() {
                    cells.push((ci, mi, pi, fi));
                }
            }
        }
    }

    let outcomes: Vec<(usize, std::result::Result<Vec<ReportRow>, FoldFailure>)> = cells
        .par_iter()
        .enumerate()
        .map(|(order, &(ci, mi, pi, fi))| {
            let condition = config.conditions[ci];
            let model = config.model_types[mi];
            let data = &data_by_protected[pi];
            let fold = &plans[pi].folds[fi];
            let seed = cell_seed(config.seed, condition, model, &data.protected_label, fi);
            let outcome = fit_fold(config, condition, model, data, fold, seed)
                .and_then(|(p, x)| score_fold(&p, &x, data, condition, model, fi, fold))
                .map_err(|e| FoldFailure {
                    condition,
                    model,
                    protected: data.protected_label.clone(),
                    fold: fi,
                    message: e.to_string(),
                });
            (order, outcome)
        })
        .collect();

    let mut ordered = outcomes;
    ordered.sort_by_key(|(order, _)| *order);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (_, outcome) in ordered {
        match outcome {
            Ok(mut r) => rows.append(&mut r),
            Err(f) => failures.push(f),
        }
    }

    Ok(ExperimentReport {
        rows,
        failures,
        notes,
    })
}

/// Pearson correlation between AUC and mean difference over the test rows of
/// each (condition, protected) cell, across model types and folds.
pub fn fairness_utility_correlation(report: &ExperimentReport) -> Vec<CorrelationCell> {
    let mut order: Vec<(Condition, String)> = Vec::new();
    for row in &report.rows {
        let key = (row.condition, row.protected.clone());
        if !order.contains(&key) {
            order.push(key);
        }
    }
    order
        .into_iter()
        .map(|(condition, protected)| {
            let points: Vec<(f64, f64)> = report
                .rows
                .iter()
                .filter(|r| {
                    r.condition == condition && r.protected == protected && r.split == Split::Test
                })
                .map(|r| (r.auc, r.mean_difference))
                .collect();
            let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
            match pearson_r_with_ci(&xs, &ys) {
                Ok(r) => CorrelationCell {
                    condition,
                    protected,
                    n_points: points.len(),
                    r: Some(r),
                    note: None,
                },
                Err(e) => CorrelationCell {
                    condition,
                    protected,
                    n_points: points.len(),
                    r: None,
                    note: Some(e.to_string()),
                },
            }
        })
        .collect()
}

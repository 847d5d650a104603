//! Command-line front end: dataset audits, model training and prediction,
//! the cross-validation experiment grid, and report regeneration.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
//! Every option can also come from a `key = value` config file (`--config`);
//! command-line flags win over file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::audit::audit_dataset;
use crate::core::ProtectedAttribute;
use crate::data::{
    encode, load_csv_dataset, load_german_credit, EncodedGermanCredit, ProtectedName, Standardizer,
};
use crate::error::{Error, Result};
use crate::estimators::{ForestConfig, LogisticConfig, ModelKind, TreeConfig};
use crate::metrics::DEFAULT_KNN_K;
use crate::model_io::{load_model, save_model, TrainedArtifact};
use crate::model_selection::{
    correlation_csv, fairness_utility_correlation, run_experiment, summary_csv, Condition,
    CorrelationCell, ExperimentConfig, ExperimentData, ExperimentReport, SummaryRow,
};
use crate::postprocess::DEFAULT_THETA;

#[derive(Debug, Parser)]
#[command(
    name = "fairkit",
    version,
    about = "Fairness-aware machine learning toolkit: measure discrimination, train mitigated models, run experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure discrimination metrics of a dataset per protected attribute.
    Audit(AuditArgs),
    /// Train a (fairness-aware) model and write it to a model file.
    Train(TrainArgs),
    /// Predict labels and scores from a saved model file.
    Predict(PredictArgs),
    /// Run the cross-validation experiment grid and write report files.
    Experiment(ExperimentArgs),
    /// Recompute summary and correlation tables from a row file.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    German,
    Csv,
}

impl DataFormat {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "german" => Ok(DataFormat::German),
            "csv" => Ok(DataFormat::Csv),
            other => Err(Error::Config(format!(
                "unknown data format '{other}' (expected german or csv)"
            ))),
        }
    }
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Path to the dataset file.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Dataset layout: german (UCI german.data) or csv.
    #[arg(long)]
    pub data_format: Option<String>,
    /// Comma-separated protected attribute names.
    #[arg(long)]
    pub protected: Option<String>,
    /// Target column name (csv format only).
    #[arg(long)]
    pub target_col: Option<String>,
    /// Neighbor count for the knn metrics.
    #[arg(long)]
    pub knn_k: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Key = value file supplying any of the above; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub data_format: Option<String>,
    /// Protected attribute the mitigation method should use.
    #[arg(long)]
    pub protected: Option<String>,
    #[arg(long)]
    pub target_col: Option<String>,
    /// Model type: logistic, tree, or forest.
    #[arg(long)]
    pub model: Option<String>,
    /// Training condition (B, RPA, RTV, CFM, ROC, RW, US, PS, PRR, DAEC).
    #[arg(long)]
    pub condition: Option<String>,
    /// Where to write the model file.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// RNG seed; required for stochastic conditions and forests.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub l2_lambda: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub daec_members: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Path to a saved model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub data_format: Option<String>,
    /// Protected attribute to use when the model needs one (defaults to the
    /// attribute recorded in the model file).
    #[arg(long)]
    pub protected: Option<String>,
    #[arg(long)]
    pub target_col: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub data_format: Option<String>,
    /// Comma-separated protected attribute names.
    #[arg(long)]
    pub protected: Option<String>,
    #[arg(long)]
    pub target_col: Option<String>,
    /// Comma-separated conditions (default: B,RPA,RTV,CFM,ROC).
    #[arg(long)]
    pub conditions: Option<String>,
    /// Comma-separated model types (default: logistic,tree,forest).
    #[arg(long)]
    pub models: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// RNG seed (required; cross-validation shuffling is stochastic).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub daec_members: Option<usize>,
    #[arg(long)]
    pub l2_lambda: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    #[arg(long)]
    pub trees: Option<usize>,
    /// Directory for the report files.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Also write tidy long-format plot data.
    #[arg(long)]
    pub emit_plot_data: bool,
    /// Worker thread bound for the experiment grid.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Row file written by the experiment subcommand.
    #[arg(long)]
    pub rows: Option<PathBuf>,
    /// Directory for regenerated summary/correlation files (print-only when
    /// omitted).
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub emit_plot_data: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// `key = value` config file; unknown keys are rejected so typos fail loudly.
struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    fn load(path: Option<&Path>, known_keys: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(Error::Config(format!(
                        "config line {} is not 'key = value': '{line}'",
                        i + 1
                    )));
                };
                let key = key.trim().to_string();
                if !known_keys.contains(&key.as_str()) {
                    return Err(Error::Config(format!(
                        "unknown config key '{key}' at line {}",
                        i + 1
                    )));
                }
                values.insert(key, value.trim().to_string());
            }
        }
        Ok(Self { values })
    }

    fn get_str(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!("config value '{raw}' for '{key}' is invalid"))
            }),
        }
    }

    fn get_flag(&self, key: &str) -> Result<bool> {
        match self.values.get(key).map(String::as_str) {
            None => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(other) => Err(Error::Config(format!(
                "config value '{other}' for '{key}' is not a boolean"
            ))),
        }
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required option --{flag}")))
}

fn parse_list(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Everything a subcommand needs from one dataset + protected attribute:
/// mirrors the experiment runner's per-context input.
fn german_contexts(path: &Path, protected: &[String]) -> Result<Vec<ExperimentData>> {
    let records = load_german_credit(path)?;
    let enc = encode(&records)?;
    let numeric_names: Vec<String> = enc
        .numeric_columns
        .iter()
        .map(|&j| enc.x.column_names()[j].clone())
        .collect();
    protected
        .iter()
        .map(|name| {
            let pn = ProtectedName::parse(name)?;
            Ok(ExperimentData {
                protected_label: name.clone(),
                x: enc.x.clone(),
                y: enc.y.clone(),
                s: enc.protected(pn).clone(),
                protected_source_columns: enc.protected_source_columns(pn),
                numeric_column_names: numeric_names.clone(),
            })
        })
        .collect()
}

fn csv_contexts(
    path: &Path,
    protected: &[String],
    target_col: &str,
) -> Result<Vec<ExperimentData>> {
    protected
        .iter()
        .map(|name| {
            let ds = load_csv_dataset(path, Some(target_col), Some(name))?;
            let numeric_names: Vec<String> = ds
                .numeric_columns
                .iter()
                .map(|&j| ds.x.column_names()[j].clone())
                .collect();
            Ok(ExperimentData {
                protected_label: name.clone(),
                y: ds.y.ok_or_else(|| {
                    Error::Config(format!("csv file has no target column '{target_col}'"))
                })?,
                s: ds.s.expect("protected column requested"),
                protected_source_columns: vec![name.clone()],
                numeric_column_names: numeric_names,
                x: ds.x,
            })
        })
        .collect()
}

fn load_contexts(
    format: DataFormat,
    path: &Path,
    protected: &[String],
    target_col: &str,
) -> Result<Vec<ExperimentData>> {
    match format {
        DataFormat::German => german_contexts(path, protected),
        DataFormat::Csv => csv_contexts(path, protected, target_col),
    }
}

fn default_protected(format: DataFormat, given: Option<String>) -> Result<Vec<String>> {
    match given {
        Some(raw) => {
            let list = parse_list(&raw);
            if list.is_empty() {
                return Err(Error::Config("--protected list is empty".into()));
            }
            Ok(list)
        }
        None => match format {
            DataFormat::German => Ok(ProtectedName::ALL
                .iter()
                .map(|p| p.as_str().to_string())
                .collect()),
            DataFormat::Csv => Err(Error::Config(
                "--protected is required for csv datasets".into(),
            )),
        },
    }
}

fn write_or_print(output: Option<&Path>, content: &str) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Audit(args) => cmd_audit(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Report(args) => cmd_report(args),
    }
}

const AUDIT_KEYS: &[&str] = &[
    "dataset", "data_format", "protected", "target_col", "knn_k", "output", "format",
];

pub fn cmd_audit(args: &AuditArgs) -> Result<()> {
    let file = ConfigFile::load(args.config.as_deref(), AUDIT_KEYS)?;
    let dataset = require(
        args.dataset.clone().or_else(|| file.get_str("dataset").map(PathBuf::from)),
        "dataset",
    )?;
    let format = DataFormat::parse(
        &args
            .data_format
            .clone()
            .or_else(|| file.get_str("data_format"))
            .unwrap_or_else(|| "german".into()),
    )?;
    let protected = default_protected(
        format,
        args.protected.clone().or_else(|| file.get_str("protected")),
    )?;
    let target_col = args
        .target_col
        .clone()
        .or_else(|| file.get_str("target_col"))
        .unwrap_or_else(|| "y".into());
    let knn_k = match args.knn_k {
        Some(k) => k,
        None => file.get_parsed::<usize>("knn_k")?.unwrap_or(DEFAULT_KNN_K),
    };
    let out_format = args
        .format
        .clone()
        .or_else(|| file.get_str("format"))
        .unwrap_or_else(|| "csv".into());
    if out_format != "csv" && out_format != "json" {
        return Err(Error::Config(format!(
            "unknown output format '{out_format}' (expected csv or json)"
        )));
    }
    let output = args.output.clone().or_else(|| file.get_str("output").map(PathBuf::from));

    let contexts = load_contexts(format, &dataset, &protected, &target_col)?;
    // All contexts share X and y; standardize the numeric columns on the full
    // dataset for the knn metrics.
    let first = &contexts[0];
    let numeric_idx: Vec<usize> = first
        .x
        .column_names()
        .iter()
        .enumerate()
        .filter(|(_, name)| first.numeric_column_names.contains(name))
        .map(|(j, _)| j)
        .collect();
    let standardizer = Standardizer::fit(&first.x, &numeric_idx)?;
    let x_std = standardizer.transform(&first.x)?;
    let protected_refs: Vec<&ProtectedAttribute> = contexts.iter().map(|c| &c.s).collect();
    let report = audit_dataset(&x_std, &first.y, &protected_refs, knn_k)?;

    let content = if out_format == "json" {
        report.to_json()
    } else {
        report.to_csv()
    };
    write_or_print(output.as_deref(), &content)
}

const TRAIN_KEYS: &[&str] = &[
    "dataset", "data_format", "protected", "target_col", "model", "condition", "output", "seed",
    "l2_lambda", "max_iter", "tol", "eta", "theta", "max_depth", "min_samples_leaf", "trees",
    "daec_members",
];

struct HyperParams {
    logistic: LogisticConfig,
    tree: TreeConfig,
    forest: ForestConfig,
    theta: f64,
    eta: f64,
    daec_members: usize,
}

#[allow(clippy::too_many_arguments)] // one slot per hyperparameter flag
fn resolve_hyperparams(
    file: &ConfigFile,
    l2_lambda: Option<f64>,
    max_iter: Option<usize>,
    tol: Option<f64>,
    eta: Option<f64>,
    theta: Option<f64>,
    max_depth: Option<usize>,
    min_samples_leaf: Option<usize>,
    trees: Option<usize>,
    daec_members: Option<usize>,
) -> Result<HyperParams> {
    let logistic = LogisticConfig {
        l2_lambda: match l2_lambda {
            Some(v) => v,
            None => file.get_parsed("l2_lambda")?.unwrap_or(1.0),
        },
        max_iter: match max_iter {
            Some(v) => v,
            None => file.get_parsed("max_iter")?.unwrap_or(1000),
        },
        tol: match tol {
            Some(v) => v,
            None => file.get_parsed("tol")?.unwrap_or(1e-6),
        },
        track_objective: false,
    };
    let max_depth = match max_depth {
        Some(v) => Some(v),
        None => file.get_parsed("max_depth")?,
    };
    let min_samples_leaf = match min_samples_leaf {
        Some(v) => v,
        None => file.get_parsed("min_samples_leaf")?.unwrap_or(1),
    };
    let n_trees = match trees {
        Some(v) => v,
        None => file.get_parsed("trees")?.unwrap_or(100),
    };
    Ok(HyperParams {
        logistic,
        tree: TreeConfig {
            max_depth,
            min_samples_leaf,
        },
        forest: ForestConfig {
            n_trees,
            max_depth,
            min_samples_leaf,
            feature_subsample: None,
        },
        theta: match theta {
            Some(v) => v,
            None => file.get_parsed("theta")?.unwrap_or(DEFAULT_THETA),
        },
        eta: match eta {
            Some(v) => v,
            None => file.get_parsed("eta")?.unwrap_or(1.0),
        },
        daec_members: match daec_members {
            Some(v) => v,
            None => file.get_parsed("daec_members")?.unwrap_or(5),
        },
    })
}

fn condition_is_stochastic(condition: Condition) -> bool {
    matches!(
        condition,
        Condition::UniformSampling | Condition::PreferentialSampling | Condition::DisagreementEnsemble
    )
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let file = ConfigFile::load(args.config.as_deref(), TRAIN_KEYS)?;
    let dataset = require(
        args.dataset.clone().or_else(|| file.get_str("dataset").map(PathBuf::from)),
        "dataset",
    )?;
    let format = DataFormat::parse(
        &args
            .data_format
            .clone()
            .or_else(|| file.get_str("data_format"))
            .unwrap_or_else(|| "german".into()),
    )?;
    let model = ModelKind::parse(&require(
        args.model.clone().or_else(|| file.get_str("model")),
        "model",
    )?)
    .ok_or_else(|| Error::Config("unknown model type (expected logistic, tree, forest)".into()))?;
    let condition = Condition::parse(
        &args
            .condition
            .clone()
            .or_else(|| file.get_str("condition"))
            .unwrap_or_else(|| "B".into()),
    )?;
    let output = require(
        args.output.clone().or_else(|| file.get_str("output").map(PathBuf::from)),
        "output",
    )?;
    let seed = match args.seed {
        Some(s) => Some(s),
        None => file.get_parsed("seed")?,
    };
    let stochastic = model == ModelKind::Forest || condition_is_stochastic(condition);
    if stochastic && seed.is_none() {
        return Err(Error::Config(format!(
            "--seed is required: condition {condition} with model {model} is stochastic"
        )));
    }
    let seed = seed.unwrap_or(0);

    let protected_flag = args.protected.clone().or_else(|| file.get_str("protected"));
    let needs_protected = condition != Condition::Baseline;
    let protected = match (&protected_flag, needs_protected, format) {
        (Some(p), _, _) => Some(p.clone()),
        (None, false, _) => None,
        (None, true, _) => {
            return Err(Error::Config(format!(
                "--protected is required for condition {condition}"
            )))
        }
    };

    let target_col = args
        .target_col
        .clone()
        .or_else(|| file.get_str("target_col"))
        .unwrap_or_else(|| "y".into());
    let params = resolve_hyperparams(
        &file,
        args.l2_lambda,
        args.max_iter,
        args.tol,
        args.eta,
        args.theta,
        args.max_depth,
        args.min_samples_leaf,
        args.trees,
        args.daec_members,
    )?;

    // Baseline without a protected attribute still needs a context to carry
    // X and y; synthesize one over the first german attribute or the csv
    // target alone.
    let context_name = protected.clone().unwrap_or_else(|| match format {
        DataFormat::German => ProtectedName::Female.as_str().to_string(),
        DataFormat::Csv => String::new(),
    });
    let data = if context_name.is_empty() {
        // Protected-free csv baseline: fabricate an all-advantaged vector,
        // which baseline fitting never reads.
        let ds = load_csv_dataset(&dataset, Some(&target_col), None)?;
        let numeric_names: Vec<String> = ds
            .numeric_columns
            .iter()
            .map(|&j| ds.x.column_names()[j].clone())
            .collect();
        let n = ds.x.n_rows();
        ExperimentData {
            protected_label: String::new(),
            y: ds
                .y
                .ok_or_else(|| Error::Config(format!("csv file has no target column '{target_col}'")))?,
            s: ProtectedAttribute::new(vec![0; n.max(1)], "none")?,
            protected_source_columns: Vec::new(),
            numeric_column_names: numeric_names,
            x: ds.x,
        }
    } else {
        let mut contexts =
            load_contexts(format, &dataset, std::slice::from_ref(&context_name), &target_col)?;
        contexts.remove(0)
    };

    let config = ExperimentConfig {
        conditions: vec![condition],
        model_types: vec![model],
        folds: 2, // unused by direct fitting
        seed,
        theta: params.theta,
        eta: params.eta,
        daec_members: params.daec_members,
        logistic: params.logistic,
        tree: params.tree,
        forest: params.forest,
    };
    config.validate()?;

    let all_rows: Vec<usize> = (0..data.x.n_rows()).collect();
    let (x_std, standardizer) = crate::model_selection::prepare_features(
        condition,
        &data.x,
        &data.protected_source_columns,
        &data.numeric_column_names,
        &all_rows,
    )?;
    let predictor = crate::model_selection::fit_condition(
        &config, condition, model, &x_std, &data.y, &data.s, seed,
    )?;

    let artifact = TrainedArtifact {
        condition: condition.as_str().to_string(),
        protected_name: protected,
        feature_columns: x_std.column_names().to_vec(),
        standardizer,
        predictor,
    };
    save_model(&artifact, &output)?;
    println!(
        "wrote {} model (condition {condition}) to {}",
        model,
        output.display()
    );
    Ok(())
}

const PREDICT_KEYS: &[&str] = &[
    "model", "dataset", "data_format", "protected", "target_col", "output",
];

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let file = ConfigFile::load(args.config.as_deref(), PREDICT_KEYS)?;
    let model_path = require(
        args.model.clone().or_else(|| file.get_str("model").map(PathBuf::from)),
        "model",
    )?;
    let dataset = require(
        args.dataset.clone().or_else(|| file.get_str("dataset").map(PathBuf::from)),
        "dataset",
    )?;
    let format = DataFormat::parse(
        &args
            .data_format
            .clone()
            .or_else(|| file.get_str("data_format"))
            .unwrap_or_else(|| "german".into()),
    )?;
    let target_col = args
        .target_col
        .clone()
        .or_else(|| file.get_str("target_col"))
        .unwrap_or_else(|| "y".into());
    let output = args.output.clone().or_else(|| file.get_str("output").map(PathBuf::from));

    let artifact = load_model(&model_path)?;
    let protected_name = args
        .protected
        .clone()
        .or_else(|| file.get_str("protected"))
        .or_else(|| artifact.protected_name.clone());

    let (x_raw, s) = match format {
        DataFormat::German => {
            let records = load_german_credit(&dataset)?;
            let enc: EncodedGermanCredit = encode(&records)?;
            let s = match &protected_name {
                Some(name) => Some(enc.protected(ProtectedName::parse(name)?).clone()),
                None => None,
            };
            (enc.x, s)
        }
        DataFormat::Csv => {
            // Target column optional at prediction time.
            let has_target = {
                let text = std::fs::read_to_string(&dataset)?;
                text.lines()
                    .next()
                    .map(|h| h.split(',').any(|c| c.trim() == target_col))
                    .unwrap_or(false)
            };
            let target = has_target.then_some(target_col.as_str());
            let ds = match load_csv_dataset(&dataset, target, protected_name.as_deref()) {
                Ok(ds) => ds,
                // Models that never read the protected attribute tolerate a
                // missing protected column.
                Err(Error::Config(_)) if !artifact.predictor.needs_protected() => {
                    load_csv_dataset(&dataset, target, None)?
                }
                Err(e) => return Err(e),
            };
            (ds.x, ds.s)
        }
    };

    if artifact.predictor.needs_protected() && s.is_none() {
        return Err(Error::Config(
            "this model requires a protected attribute; pass --protected or provide the column"
                .into(),
        ));
    }

    let x = x_raw.select_columns(&artifact.feature_columns)?;
    let x_std = artifact.standardizer.transform(&x)?;
    let (labels, scores) = artifact.predictor.predict(&x_std, s.as_ref())?;

    let mut content = String::from("index,label,score\n");
    for (i, (&l, &p)) in labels.values().iter().zip(scores.values()).enumerate() {
        content.push_str(&format!("{i},{l},{p:.6}\n"));
    }
    write_or_print(output.as_deref(), &content)
}

const EXPERIMENT_KEYS: &[&str] = &[
    "dataset", "data_format", "protected", "target_col", "conditions", "models", "folds", "seed",
    "theta", "eta", "daec_members", "l2_lambda", "max_iter", "tol", "max_depth",
    "min_samples_leaf", "trees", "output_dir", "emit_plot_data", "jobs",
];

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let file = ConfigFile::load(args.config.as_deref(), EXPERIMENT_KEYS)?;
    let dataset = require(
        args.dataset.clone().or_else(|| file.get_str("dataset").map(PathBuf::from)),
        "dataset",
    )?;
    let format = DataFormat::parse(
        &args
            .data_format
            .clone()
            .or_else(|| file.get_str("data_format"))
            .unwrap_or_else(|| "german".into()),
    )?;
    let protected = default_protected(
        format,
        args.protected.clone().or_else(|| file.get_str("protected")),
    )?;
    let target_col = args
        .target_col
        .clone()
        .or_else(|| file.get_str("target_col"))
        .unwrap_or_else(|| "y".into());
    let conditions: Vec<Condition> = parse_list(
        &args
            .conditions
            .clone()
            .or_else(|| file.get_str("conditions"))
            .unwrap_or_else(|| "B,RPA,RTV,CFM,ROC".into()),
    )
    .iter()
    .map(|c| Condition::parse(c))
    .collect::<Result<_>>()?;
    let models: Vec<ModelKind> = parse_list(
        &args
            .models
            .clone()
            .or_else(|| file.get_str("models"))
            .unwrap_or_else(|| "logistic,tree,forest".into()),
    )
    .iter()
    .map(|m| {
        ModelKind::parse(m).ok_or_else(|| Error::Config(format!("unknown model type '{m}'")))
    })
    .collect::<Result<_>>()?;
    let folds = match args.folds {
        Some(v) => v,
        None => file.get_parsed("folds")?.unwrap_or(10),
    };
    let seed = require(
        match args.seed {
            Some(s) => Some(s),
            None => file.get_parsed("seed")?,
        },
        "seed",
    )?;
    let params = resolve_hyperparams(
        &file,
        args.l2_lambda,
        args.max_iter,
        args.tol,
        args.eta,
        args.theta,
        args.max_depth,
        args.min_samples_leaf,
        args.trees,
        args.daec_members,
    )?;
    let output_dir = require(
        args.output_dir
            .clone()
            .or_else(|| file.get_str("output_dir").map(PathBuf::from)),
        "output-dir",
    )?;
    let emit_plot_data = args.emit_plot_data || file.get_flag("emit_plot_data")?;
    let jobs = match args.jobs {
        Some(v) => Some(v),
        None => file.get_parsed("jobs")?,
    };

    let config = ExperimentConfig {
        conditions,
        model_types: models,
        folds,
        seed,
        theta: params.theta,
        eta: params.eta,
        daec_members: params.daec_members,
        logistic: params.logistic,
        tree: params.tree,
        forest: params.forest,
    };
    config.validate()?;
    let contexts = load_contexts(format, &dataset, &protected, &target_col)?;

    let report = match jobs {
        Some(n) if n >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot build a {n}-thread pool: {e}")))?
            .install(|| run_experiment(&config, &contexts)),
        _ => run_experiment(&config, &contexts),
    }?;

    std::fs::create_dir_all(&output_dir)?;
    std::fs::write(output_dir.join("experiment_rows.csv"), report.to_csv())?;
    std::fs::write(output_dir.join("experiment_rows.json"), report.to_json())?;
    let summary = report.summary();
    std::fs::write(output_dir.join("experiment_summary.csv"), summary_csv(&summary))?;
    let correlation = fairness_utility_correlation(&report);
    std::fs::write(
        output_dir.join("correlation.csv"),
        correlation_csv(&correlation),
    )?;
    if emit_plot_data {
        std::fs::write(output_dir.join("plot_data.csv"), report.plot_data_csv())?;
    }

    print!("{}", render_summary(&summary, &correlation, &report));

    if report.rows.is_empty() {
        return Err(Error::Integrity(
            "every grid cell failed; see the failures section of experiment_rows.json".into(),
        ));
    }
    Ok(())
}

const REPORT_KEYS: &[&str] = &["rows", "output_dir", "emit_plot_data"];

pub fn cmd_report(args: &ReportArgs) -> Result<()> {
    let file = ConfigFile::load(args.config.as_deref(), REPORT_KEYS)?;
    let rows_path = require(
        args.rows.clone().or_else(|| file.get_str("rows").map(PathBuf::from)),
        "rows",
    )?;
    let output_dir = args
        .output_dir
        .clone()
        .or_else(|| file.get_str("output_dir").map(PathBuf::from));
    let emit_plot_data = args.emit_plot_data || file.get_flag("emit_plot_data")?;

    let report = ExperimentReport::from_csv(&std::fs::read_to_string(&rows_path)?)?;
    let summary = report.summary();
    let correlation = fairness_utility_correlation(&report);
    if let Some(dir) = &output_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("experiment_summary.csv"), summary_csv(&summary))?;
        std::fs::write(dir.join("correlation.csv"), correlation_csv(&correlation))?;
        if emit_plot_data {
            std::fs::write(dir.join("plot_data.csv"), report.plot_data_csv())?;
        }
    }
    print!("{}", render_summary(&summary, &correlation, &report));
    Ok(())
}

fn render_summary(
    summary: &[SummaryRow],
    correlation: &[CorrelationCell],
    report: &ExperimentReport,
) -> String {
    let mut out = String::new();
    out.push_str("== summary: fold means per condition / model / protected ==\n");
    out.push_str(&format!(
        "{:<10} {:<9} {:<15} {:<6} {:>10} {:>10}\n",
        "condition", "model", "protected", "split", "mean_auc", "mean_md"
    ));
    for row in summary {
        out.push_str(&format!(
            "{:<10} {:<9} {:<15} {:<6} {:>10.6} {:>10.6}\n",
            row.condition.as_str(),
            row.model.as_str(),
            row.protected,
            row.split.as_str(),
            row.mean_auc,
            row.mean_mean_difference
        ));
    }
    out.push_str("\n== fairness-utility correlation (test split, across models and folds) ==\n");
    out.push_str(&format!(
        "{:<10} {:<15} {:>4} {:>10} {:>22}\n",
        "condition", "protected", "n", "pearson_r", "95% CI"
    ));
    for cell in correlation {
        match &cell.r {
            Some(r) => out.push_str(&format!(
                "{:<10} {:<15} {:>4} {:>10.6} ({:>9.6}, {:>9.6})\n",
                cell.condition.as_str(),
                cell.protected,
                cell.n_points,
                r.value,
                r.ci_low,
                r.ci_high
            )),
            None => out.push_str(&format!(
                "{:<10} {:<15} {:>4} {:>10} {}\n",
                cell.condition.as_str(),
                cell.protected,
                cell.n_points,
                "n/a",
                cell.note.as_deref().unwrap_or("undefined")
            )),
        }
    }
    if !report.notes.is_empty() {
        out.push_str("\n== notes ==\n");
        for note in &report.notes {
            out.push_str(&format!("- {note}\n"));
        }
    }
    if !report.failures.is_empty() {
        out.push_str("\n== failures ==\n");
        for f in &report.failures {
            out.push_str(&format!(
                "- {} {} {} fold {}: {}\n",
                f.condition.as_str(),
                f.model.as_str(),
                f.protected,
                f.fold,
                f.message
            ));
        }
    }
    out
}

/// Maps errors onto the documented exit codes: 1 usage, 2 data, 3 internal.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) | Error::Parameter(_) => 1,
        Error::Io(_)
        | Error::Parse { .. }
        | Error::Integrity(_)
        | Error::Validation(_)
        | Error::LengthMismatch { .. }
        | Error::ModelFormat(_)
        | Error::UndefinedMetric { .. }
        | Error::UndefinedWeight(_)
        | Error::InfeasibleRelabel { .. }
        | Error::InfeasibleSample { .. }
        | Error::DegenerateResidualizer(_)
        | Error::ShapeMismatch { .. } => 2,
    }
}

//! Experiment report rows, aggregation, and (de)serialization. Metric values
//! are fixed to six decimal places when rows are created so every downstream
//! artifact (CSV, JSON, summaries) is exactly recomputable from the row file.

use serde::{Deserialize, Serialize};

use super::Condition;
use crate::error::{Error, Result};
use crate::estimators::ModelKind;
use crate::metrics::MetricResult;

pub const REPORT_CSV_HEADER: &str = "condition,model,protected,fold,split,auc,mean_difference";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Parse {
                line: 0,
                message: format!("unknown split '{other}'"),
            }),
        }
    }
}

pub(crate) fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub condition: Condition,
    pub model: ModelKind,
    pub protected: String,
    pub fold: usize,
    pub split: Split,
    pub auc: f64,
    pub mean_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldFailure {
    pub condition: Condition,
    pub model: ModelKind,
    pub protected: String,
    pub fold: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub failures: Vec<FoldFailure>,
    pub notes: Vec<String>,
}

/// Per-(condition, model, protected, split) fold means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub condition: Condition,
    pub model: ModelKind,
    pub protected: String,
    pub split: Split,
    pub mean_auc: f64,
    pub mean_mean_difference: f64,
    pub folds: usize,
}

impl ExperimentReport {
    /// Fold means per cell, in first-appearance order of the rows.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut order: Vec<(Condition, ModelKind, String, Split)> = Vec::new();
        for row in &self.rows {
            let key = (row.condition, row.model, row.protected.clone(), row.split);
            if !order.contains(&key) {
                order.push(key);
            }
        }
        order
            .into_iter()
            .map(|(condition, model, protected, split)| {
                let cell: Vec<&ReportRow> = self
                    .rows
                    .iter()
                    .filter(|r| {
                        r.condition == condition
                            && r.model == model
                            && r.protected == protected
                            && r.split == split
                    })
                    .collect();
                let n = cell.len() as f64;
                SummaryRow {
                    condition,
                    model,
                    protected,
                    split,
                    mean_auc: cell.iter().map(|r| r.auc).sum::<f64>() / n,
                    mean_mean_difference: cell.iter().map(|r| r.mean_difference).sum::<f64>() / n,
                    folds: cell.len(),
                }
            })
            .collect()
    }

    /// Mean test metrics for one cell, if any rows exist.
    pub fn mean_test_md(
        &self,
        condition: Condition,
        model: ModelKind,
        protected: &str,
    ) -> Option<f64> {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| {
                r.condition == condition
                    && r.model == model
                    && r.protected == protected
                    && r.split == Split::Test
            })
            .map(|r| r.mean_difference)
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{:.6},{:.6}\n",
                r.condition.as_str(),
                r.model.as_str(),
                r.protected,
                r.fold,
                r.split.as_str(),
                r.auc,
                r.mean_difference
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header == REPORT_CSV_HEADER => {}
            Some((_, header)) => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected header '{header}'"),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty report file".into(),
                })
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected 7 fields, found {}", fields.len()),
                });
            }
            let parse_f64 = |v: &str, what: &str| -> Result<f64> {
                v.parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("'{v}' is not a valid {what}"),
                })
            };
            rows.push(ReportRow {
                condition: Condition::parse(fields[0]).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?,
                model: ModelKind::parse(fields[1]).ok_or_else(|| Error::Parse {
                    line: i + 1,
                    message: format!("unknown model '{}'", fields[1]),
                })?,
                protected: fields[2].to_string(),
                fold: fields[3].parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("'{}' is not a valid fold index", fields[3]),
                })?,
                split: Split::parse(fields[4]).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?,
                auc: parse_f64(fields[5], "auc")?,
                mean_difference: parse_f64(fields[6], "mean difference")?,
            });
        }
        Ok(ExperimentReport {
            rows,
            failures: Vec::new(),
            notes: Vec::new(),
        })
    }

    /// JSON mirror of the row file, with failures and notes included.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Tidy long-format data for external plotting: one metric value per row.
    pub fn plot_data_csv(&self) -> String {
        let mut out = String::from("condition,model,protected,fold,split,metric,value\n");
        for r in &self.rows {
            for (metric, value) in [("auc", r.auc), ("mean_difference", r.mean_difference)] {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{:.6}\n",
                    r.condition.as_str(),
                    r.model.as_str(),
                    r.protected,
                    r.fold,
                    r.split.as_str(),
                    metric,
                    value
                ));
            }
        }
        out
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out =
        String::from("condition,model,protected,split,mean_auc,mean_mean_difference,folds\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{}\n",
            r.condition.as_str(),
            r.model.as_str(),
            r.protected,
            r.split.as_str(),
            r.mean_auc,
            r.mean_mean_difference,
            r.folds
        ));
    }
    out
}

/// Fairness-utility correlation for one (condition, protected) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCell {
    pub condition: Condition,
    pub protected: String,
    pub n_points: usize,
    pub r: Option<MetricResult>,
    pub note: Option<String>,
}

pub fn correlation_csv(cells: &[CorrelationCell]) -> String {
    let mut out = String::from("condition,protected,n_points,pearson_r,ci_low,ci_high,note\n");
    for c in cells {
        match &c.r {
            Some(r) => out.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.6},\n",
                c.condition.as_str(),
                c.protected,
                c.n_points,
                r.value,
                r.ci_low,
                r.ci_high
            )),
            None => out.push_str(&format!(
                "{},{},{},,,,{}\n",
                c.condition.as_str(),
                c.protected,
                c.n_points,
                c.note.as_deref().unwrap_or("undefined")
            )),
        }
    }
    out
}

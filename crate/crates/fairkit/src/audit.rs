//! Dataset audits: group-level and individual-level discrimination metrics
//! per protected attribute, with undefined metrics reported as null fields
//! rather than failures.

use crate::core::{BinaryLabels, FeatureMatrix, ProtectedAttribute};
use crate::error::Result;
use crate::metrics::{
    consistency, mean_difference, normalized_mean_difference, situation_test_score,
};

#[derive(Debug, Clone, PartialEq)]
pub struct AuditEntry {
    pub protected: String,
    pub metric: String,
    pub value: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    /// Reason a metric is undefined.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    pub knn_k: usize,
}

/// Audits the dataset against every given protected attribute. Features must
/// already be encoded and standardized; the knn metrics read them as-is.
pub fn audit_dataset(
    x: &FeatureMatrix,
    y: &BinaryLabels,
    protected: &[&ProtectedAttribute],
    knn_k: usize,
) -> Result<AuditReport> {
    let mut entries = Vec::new();
    for &s in protected {
        let name = s.name().to_string();
        match mean_difference(y, s) {
            Ok(md) => entries.push(AuditEntry {
                protected: name.clone(),
                metric: "mean_difference".into(),
                value: Some(md.value),
                ci_low: Some(md.ci_low),
                ci_high: Some(md.ci_high),
                note: None,
            }),
            Err(e) => entries.push(undefined(&name, "mean_difference", e.to_string())),
        }
        match normalized_mean_difference(y, s) {
            Ok(nmd) => entries.push(AuditEntry {
                protected: name.clone(),
                metric: "normalized_mean_difference".into(),
                value: Some(nmd.value),
                ci_low: Some(nmd.ci_low),
                ci_high: Some(nmd.ci_high),
                note: None,
            }),
            Err(e) => entries.push(undefined(&name, "normalized_mean_difference", e.to_string())),
        }
        match consistency(x, y, knn_k) {
            Ok(c) => entries.push(AuditEntry {
                protected: name.clone(),
                metric: "consistency".into(),
                value: Some(c),
                ci_low: None,
                ci_high: None,
                note: None,
            }),
            Err(e) => entries.push(undefined(&name, "consistency", e.to_string())),
        }
        match situation_test_score(x, y, s, knn_k) {
            Ok(t) => entries.push(AuditEntry {
                protected: name.clone(),
                metric: "situation_test_score".into(),
                value: Some(t),
                ci_low: None,
                ci_high: None,
                note: None,
            }),
            Err(e) => entries.push(undefined(&name, "situation_test_score", e.to_string())),
        }
    }
    Ok(AuditReport { entries, knn_k })
}

fn undefined(protected: &str, metric: &str, note: String) -> AuditEntry {
    AuditEntry {
        protected: protected.to_string(),
        metric: metric.to_string(),
        value: None,
        ci_low: None,
        ci_high: None,
        note: Some(note),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

impl AuditReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("protected,metric,value,ci_low,ci_high,note\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.protected,
                e.metric,
                fmt_opt(e.value),
                fmt_opt(e.ci_low),
                fmt_opt(e.ci_high),
                e.note.as_deref().unwrap_or("")
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|e| {
                serde_json::json!({
                    "protected": e.protected,
                    "metric": e.metric,
                    "value": e.value.map(round6),
                    "ci_low": e.ci_low.map(round6),
                    "ci_high": e.ci_high.map(round6),
                    "note": e.note,
                })
            })
            .collect();
        let doc = serde_json::json!({
            "knn_k": self.knn_k,
            "entries": entries,
        });
        serde_json::to_string_pretty(&doc).expect("audit serialization cannot fail")
    }

    pub fn value_of(&self, protected: &str, metric: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.protected == protected && e.metric == metric)
            .and_then(|e| e.value)
    }
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

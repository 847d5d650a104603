//! Versioned, checksummed model files: a human-readable JSON envelope whose
//! payload is hashed so tampering and version drift fail loudly at load time.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::core::{BinaryLabels, FeatureMatrix, ProbabilityScores, ProtectedAttribute};
use crate::data::Standardizer;
use crate::error::{Error, Result};
use crate::estimators::{BaseModel, Classifier, LinearAcfModel, PrejudiceRemoverModel};
use crate::postprocess::{daec_predict, roc_relabel};

pub const MODEL_FORMAT: &str = "fairkit-model";
pub const MODEL_VERSION: u64 = 1;

/// Every prediction strategy the toolkit can persist and serve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "predictor", rename_all = "snake_case")]
pub enum Predictor {
    Base(BaseModel),
    PrejudiceRemover(PrejudiceRemoverModel),
    Acf(LinearAcfModel),
    RejectOption { base: BaseModel, theta: f64 },
    Ensemble { members: Vec<BaseModel> },
}

impl Predictor {
    /// Whether prediction requires the protected attribute alongside X.
    pub fn needs_protected(&self) -> bool {
        matches!(
            self,
            Predictor::Acf(_) | Predictor::RejectOption { .. } | Predictor::Ensemble { .. }
        )
    }

    /// Labels and probability scores for the given features. Postprocessing
    /// predictors re-assign labels but report the underlying probabilities
    /// (the ensemble reports the member mean).
    pub fn predict(
        &self,
        x: &FeatureMatrix,
        s: Option<&ProtectedAttribute>,
    ) -> Result<(BinaryLabels, ProbabilityScores)> {
        let require_s = || {
            s.ok_or_else(|| {
                Error::Config(
                    "this model requires the protected attribute at prediction time".into(),
                )
            })
        };
        match self {
            Predictor::Base(m) => {
                let scores = m.predict_proba(x)?;
                Ok((scores.threshold(), scores))
            }
            Predictor::PrejudiceRemover(m) => {
                let scores = m.predict_proba(x)?;
                Ok((scores.threshold(), scores))
            }
            Predictor::Acf(m) => m.predict_with_protected(x, require_s()?),
            Predictor::RejectOption { base, theta } => {
                let scores = base.predict_proba(x)?;
                let labels = roc_relabel(&scores, require_s()?, *theta)?;
                Ok((labels, scores))
            }
            Predictor::Ensemble { members } => {
                let s = require_s()?;
                let refs: Vec<&dyn Classifier> =
                    members.iter().map(|m| m as &dyn Classifier).collect();
                let labels = daec_predict(&refs, x, s)?;
                let mut acc = vec![0.0; x.n_rows()];
                for m in members {
                    for (a, &p) in acc.iter_mut().zip(m.predict_proba(x)?.values()) {
                        *a += p;
                    }
                }
                let scores = ProbabilityScores::new(
                    acc.into_iter().map(|v| v / members.len() as f64).collect(),
                )?;
                Ok((labels, scores))
            }
        }
    }
}

/// A fitted model plus everything needed to reproduce its inputs: the
/// feature column set (after any protected-column drop), the training-fold
/// standardization, and the training condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedArtifact {
    pub condition: String,
    pub protected_name: Option<String>,
    pub feature_columns: Vec<String>,
    pub standardizer: Standardizer,
    pub predictor: Predictor,
}

pub fn to_model_string(artifact: &TrainedArtifact) -> Result<String> {
    let payload = serde_json::to_value(artifact)
        .map_err(|e| Error::ModelFormat(format!("serialization failed: {e}")))?;
    let payload_text = serde_json::to_string(&payload)
        .map_err(|e| Error::ModelFormat(format!("serialization failed: {e}")))?;
    let checksum = hex_digest(payload_text.as_bytes());
    let envelope = serde_json::json!({
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "checksum": checksum,
        "model": payload,
    });
    serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::ModelFormat(format!("serialization failed: {e}")))
}

pub fn from_model_string(text: &str) -> Result<TrainedArtifact> {
    let envelope: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::ModelFormat(format!("not valid JSON: {e}")))?;
    let format = envelope.get("format").and_then(|v| v.as_str());
    if format != Some(MODEL_FORMAT) {
        return Err(Error::ModelFormat(format!(
            "not a {MODEL_FORMAT} file (format field: {format:?})"
        )));
    }
    let version = envelope.get("version").and_then(|v| v.as_u64());
    if version != Some(MODEL_VERSION) {
        return Err(Error::ModelFormat(format!(
            "unsupported model version {version:?}, this build reads version {MODEL_VERSION}"
        )));
    }
    let stored_checksum = envelope
        .get("checksum")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::ModelFormat("missing checksum".into()))?;
    let payload = envelope
        .get("model")
        .ok_or_else(|| Error::ModelFormat("missing model payload".into()))?;
    let payload_text = serde_json::to_string(payload)
        .map_err(|e| Error::ModelFormat(format!("payload re-serialization failed: {e}")))?;
    let actual = hex_digest(payload_text.as_bytes());
    if actual != stored_checksum {
        return Err(Error::ModelFormat(
            "checksum mismatch: the model payload was modified after saving".into(),
        ));
    }
    serde_json::from_value(payload.clone())
        .map_err(|e| Error::ModelFormat(format!("malformed model payload: {e}")))
}

pub fn save_model(artifact: &TrainedArtifact, path: &Path) -> Result<()> {
    std::fs::write(path, to_model_string(artifact)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TrainedArtifact> {
    from_model_string(&std::fs::read_to_string(path)?)
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

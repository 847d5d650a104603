//! Dataset ingestion and encoding.

mod csv;
mod german;

pub use csv::{load_csv_dataset, CsvDataset};
pub use german::{
    encode, encode_for, load_german_credit, records_from_str, verify_reference_distribution,
    EncodedGermanCredit, ProtectedName, RawGermanCreditRecord, GERMAN_RECORD_COUNT,
};

use serde::{Deserialize, Serialize};

use crate::core::FeatureMatrix;
use crate::error::{Error, Result};

/// Z-scoring of selected columns with statistics taken from whatever rows the
/// standardizer was fit on, so cross-validation can fit on training folds
/// only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub columns: Vec<usize>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Identity transform (no standardized columns).
    pub fn identity() -> Self {
        Self {
            columns: Vec::new(),
            means: Vec::new(),
            stds: Vec::new(),
        }
    }

    pub fn fit(x: &FeatureMatrix, columns: &[usize]) -> Result<Self> {
        let all: Vec<usize> = (0..x.n_rows()).collect();
        Self::fit_rows(x, columns, &all)
    }

    /// Fits means and standard deviations on the given rows only.
    pub fn fit_rows(x: &FeatureMatrix, columns: &[usize], rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Parameter(
                "standardizer needs at least one row".into(),
            ));
        }
        for &j in columns {
            if j >= x.n_cols() {
                return Err(Error::Parameter(format!(
                    "column index {j} out of range for {} columns",
                    x.n_cols()
                )));
            }
        }
        let n = rows.len() as f64;
        let mut means = Vec::with_capacity(columns.len());
        let mut stds = Vec::with_capacity(columns.len());
        for &j in columns {
            let mean = rows.iter().map(|&i| x.values()[(i, j)]).sum::<f64>() / n;
            let var = rows
                .iter()
                .map(|&i| {
                    let d = x.values()[(i, j)] - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            let sd = var.sqrt();
            means.push(mean);
            // Constant columns only get centered.
            stds.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Ok(Self {
            columns: columns.to_vec(),
            means,
            stds,
        })
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let mut values = x.values().clone();
        for ((&j, &mean), &sd) in self.columns.iter().zip(&self.means).zip(&self.stds) {
            if j >= x.n_cols() {
                return Err(Error::ShapeMismatch {
                    expected: j + 1,
                    actual: x.n_cols(),
                });
            }
            for v in values.column_mut(j) {
                *v = (*v - mean) / sd;
            }
        }
        FeatureMatrix::new(values, x.column_names().to_vec())
    }
}

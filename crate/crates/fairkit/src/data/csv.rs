//! Minimal CSV ingestion for user-supplied datasets: a header row, all-numeric
//! columns, an optional binary target column, and an optional binary
//! protected column (which stays in the feature matrix; the
//! remove-protected-attribute condition drops it by name).

use std::path::Path;

use crate::core::{BinaryLabels, FeatureMatrix, ProtectedAttribute};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CsvDataset {
    pub x: FeatureMatrix,
    pub y: Option<BinaryLabels>,
    pub s: Option<ProtectedAttribute>,
    /// Feature columns that are not 0/1-valued.
    pub numeric_columns: Vec<usize>,
}

/// Loads a CSV file. `target_col` (when present in the header) becomes the
/// labels and is excluded from features; `protected_col` becomes the
/// protected attribute and remains a feature column.
pub fn load_csv_dataset(
    path: &Path,
    target_col: Option<&str>,
    protected_col: Option<&str>,
) -> Result<CsvDataset> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();

    let target_idx = match target_col {
        Some(name) => Some(columns.iter().position(|c| c == name).ok_or_else(|| {
            Error::Config(format!("target column '{name}' not found in header"))
        })?),
        None => None,
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut targets: Vec<u8> = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected {} fields, found {}", columns.len(), fields.len()),
            });
        }
        let mut row = Vec::with_capacity(columns.len());
        for (j, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("'{}' in column '{}' is not numeric", field.trim(), columns[j]),
            })?;
            if Some(j) == target_idx {
                if value != 0.0 && value != 1.0 {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("target value {value} is not 0 or 1"),
                    });
                }
                targets.push(value as u8);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }

    let feature_names: Vec<String> = columns
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != target_idx)
        .map(|(_, c)| c.clone())
        .collect();
    let n = rows.len();
    let m = feature_names.len();
    let mut flat = Vec::with_capacity(n * m);
    for row in &rows {
        flat.extend_from_slice(row);
    }
    let x = FeatureMatrix::new(
        ndarray::Array2::from_shape_vec((n, m), flat)
            .map_err(|e| Error::Validation(e.to_string()))?,
        feature_names.clone(),
    )?;

    let s = match protected_col {
        Some(name) => {
            let j = feature_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| {
                    Error::Config(format!("protected column '{name}' not found in header"))
                })?;
            let values: Vec<u8> = x
                .values()
                .column(j)
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if v == 0.0 || v == 1.0 {
                        Ok(v as u8)
                    } else {
                        Err(Error::Parse {
                            line: i + 2,
                            message: format!("protected value {v} is not 0 or 1"),
                        })
                    }
                })
                .collect::<Result<_>>()?;
            Some(ProtectedAttribute::new(values, name)?)
        }
        None => None,
    };

    let numeric_columns = (0..m)
        .filter(|&j| x.values().column(j).iter().any(|&v| v != 0.0 && v != 1.0))
        .collect();

    let y = if targets.is_empty() {
        None
    } else {
        Some(BinaryLabels::new(targets)?)
    };
    Ok(CsvDataset {
        x,
        y,
        s,
        numeric_columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_features_target_and_protected() {
        let f = write_temp("a,b,s,y\n1.5,0,1,1\n2.5,1,0,0\n3.5,1,1,1\n");
        let ds = load_csv_dataset(f.path(), Some("y"), Some("s")).unwrap();
        assert_eq!(ds.x.n_cols(), 3);
        assert_eq!(ds.x.column_names(), ["a", "b", "s"]);
        assert_eq!(ds.y.as_ref().unwrap().values(), &[1, 0, 1]);
        assert_eq!(ds.s.as_ref().unwrap().values(), &[1, 0, 1]);
        assert_eq!(ds.numeric_columns, vec![0]);
    }

    #[test]
    fn missing_protected_column_is_config_error() {
        let f = write_temp("a,y\n1,0\n2,1\n");
        assert!(matches!(
            load_csv_dataset(f.path(), Some("y"), Some("s")),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn non_numeric_cell_names_line() {
        let f = write_temp("a,y\n1,0\nx,1\n");
        match load_csv_dataset(f.path(), Some("y"), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}

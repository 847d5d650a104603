//! Shared data model: feature matrices, binary labels, protected attributes,
//! sample weights, and probability scores.
//!
//! Labels and protected attributes are stored as 0/1 integers rather than
//! booleans so that group proportions fall out as means of indicator vectors.
//! All types are immutable after construction.

use ndarray::Array2;

use crate::error::{Error, Result};

/// An n-by-m matrix of encoded features with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
    column_names: Vec<String>,
}

impl FeatureMatrix {
    /// Builds a feature matrix, checking that every entry is finite and that
    /// column names are unique and match the column count.
    pub fn new(values: Array2<f64>, column_names: Vec<String>) -> Result<Self> {
        let (n, m) = values.dim();
        if n == 0 || m == 0 {
            return Err(Error::Validation(format!(
                "feature matrix must be non-empty, got {n}x{m}"
            )));
        }
        if column_names.len() != m {
            return Err(Error::Validation(format!(
                "{} column names for {} columns",
                column_names.len(),
                m
            )));
        }
        for (j, name) in column_names.iter().enumerate() {
            if column_names[..j].contains(name) {
                return Err(Error::Validation(format!("duplicate column name '{name}'")));
            }
        }
        for ((i, j), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::Validation(format!(
                    "non-finite feature value {v} at ({i}, {j})"
                )));
            }
        }
        Ok(Self { values, column_names })
    }

    /// Convenience constructor from row vectors with generated column names
    /// (`x0`, `x1`, ...).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(n * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::Validation(format!(
                    "ragged rows: expected {m} values, got {}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        let values = Array2::from_shape_vec((n, m), flat)
            .map_err(|e| Error::Validation(e.to_string()))?;
        let names = (0..m).map(|j| format!("x{j}")).collect();
        Self::new(values, names)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> ndarray::ArrayView1<'_, f64> {
        self.values.row(i)
    }

    /// New matrix holding only the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let m = self.n_cols();
        let mut out = Array2::zeros((indices.len(), m));
        for (r, &i) in indices.iter().enumerate() {
            out.row_mut(r).assign(&self.values.row(i));
        }
        Self {
            values: out,
            column_names: self.column_names.clone(),
        }
    }

    /// New matrix without the named columns. Unknown names are an error.
    pub fn drop_columns(&self, names: &[String]) -> Result<Self> {
        for name in names {
            if !self.column_names.contains(name) {
                return Err(Error::Validation(format!("unknown column '{name}'")));
            }
        }
        let keep: Vec<usize> = (0..self.n_cols())
            .filter(|&j| !names.contains(&self.column_names[j]))
            .collect();
        if keep.is_empty() {
            return Err(Error::Validation(
                "dropping all columns leaves an empty matrix".into(),
            ));
        }
        let mut out = Array2::zeros((self.n_rows(), keep.len()));
        for (c, &j) in keep.iter().enumerate() {
            out.column_mut(c).assign(&self.values.column(j));
        }
        Ok(Self {
            values: out,
            column_names: keep.iter().map(|&j| self.column_names[j].clone()).collect(),
        })
    }

    /// New matrix holding only the named columns, in the given order.
    pub fn select_columns(&self, names: &[String]) -> Result<Self> {
        let mut picked = Vec::with_capacity(names.len());
        for name in names {
            let j = self
                .column_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Validation(format!("unknown column '{name}'")))?;
            picked.push(j);
        }
        let mut out = Array2::zeros((self.n_rows(), picked.len()));
        for (c, &j) in picked.iter().enumerate() {
            out.column_mut(c).assign(&self.values.column(j));
        }
        Self::new(out, names.to_vec())
    }

    /// New matrix with an extra column appended.
    pub fn append_column(&self, name: &str, column: &[f64]) -> Result<Self> {
        if column.len() != self.n_rows() {
            return Err(Error::LengthMismatch {
                left: "matrix rows",
                left_len: self.n_rows(),
                right: "appended column",
                right_len: column.len(),
            });
        }
        let mut out = Array2::zeros((self.n_rows(), self.n_cols() + 1));
        out.slice_mut(ndarray::s![.., ..self.n_cols()])
            .assign(&self.values);
        for (i, &v) in column.iter().enumerate() {
            out[(i, self.n_cols())] = v;
        }
        let mut names = self.column_names.clone();
        names.push(name.to_string());
        Self::new(out, names)
    }
}

/// Length-n vector over {0, 1}; 1 is the desirable outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryLabels {
    values: Vec<u8>,
}

impl BinaryLabels {
    pub fn new(values: Vec<u8>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if v > 1 {
                return Err(Error::Validation(format!(
                    "label {v} at position {i} is not in {{0, 1}}"
                )));
            }
        }
        if values.is_empty() {
            return Err(Error::Validation("labels must be non-empty".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, u8> {
        self.values.iter()
    }

    /// Fraction of positive labels.
    pub fn positive_rate(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum::<f64>() / self.values.len() as f64
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            values: indices.iter().map(|&i| self.values[i]).collect(),
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// Length-n vector over {0, 1}; 1 marks the disadvantaged group, 0 the
/// advantaged group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtectedAttribute {
    values: Vec<u8>,
    name: String,
}

impl ProtectedAttribute {
    pub fn new(values: Vec<u8>, name: impl Into<String>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if v > 1 {
                return Err(Error::Validation(format!(
                    "protected attribute value {v} at position {i} is not in {{0, 1}}"
                )));
            }
        }
        if values.is_empty() {
            return Err(Error::Validation(
                "protected attribute must be non-empty".into(),
            ));
        }
        Ok(Self {
            values,
            name: name.into(),
        })
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of observations in the disadvantaged group.
    pub fn disadvantaged_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1).count()
    }

    /// Complemented attribute (groups swapped), for symmetry checks.
    pub fn complement(&self) -> Self {
        Self {
            values: self.values.iter().map(|&v| 1 - v).collect(),
            name: format!("not_{}", self.name),
        }
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            values: indices.iter().map(|&i| self.values[i]).collect(),
            name: self.name.clone(),
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// Per-observation non-negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWeights {
    values: Vec<f64>,
}

impl SampleWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &w) in values.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Validation(format!(
                    "weight {w} at position {i} must be finite and >= 0"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn uniform(n: usize) -> Self {
        Self { values: vec![1.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Length-n vector of probabilities in [0, 1], read as P(y = 1 | x).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityScores {
    values: Vec<f64>,
}

impl ProbabilityScores {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &p) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!(
                    "probability {p} at position {i} is outside [0, 1]"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Labels from thresholding at 0.5 (p >= 0.5 maps to 1).
    pub fn threshold(&self) -> BinaryLabels {
        BinaryLabels {
            values: self.values.iter().map(|&p| u8::from(p >= 0.5)).collect(),
        }
    }
}

/// The universal input triple (X, y, s).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: FeatureMatrix,
    pub y: BinaryLabels,
    pub s: ProtectedAttribute,
}

impl Dataset {
    pub fn new(x: FeatureMatrix, y: BinaryLabels, s: ProtectedAttribute) -> Result<Self> {
        if x.n_rows() != y.len() {
            return Err(Error::LengthMismatch {
                left: "X",
                left_len: x.n_rows(),
                right: "y",
                right_len: y.len(),
            });
        }
        if y.len() != s.len() {
            return Err(Error::LengthMismatch {
                left: "y",
                left_len: y.len(),
                right: "s",
                right_len: s.len(),
            });
        }
        Ok(Self { x, y, s })
    }

    pub fn n_rows(&self) -> usize {
        self.x.n_rows()
    }

    /// Dataset restricted to the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(indices),
            y: self.y.select(indices),
            s: self.s.select(indices),
        }
    }
}

/// Index sets of the four (group, label) cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    /// Disadvantaged, positively labelled.
    pub dis_pos: Vec<usize>,
    /// Disadvantaged, negatively labelled.
    pub dis_neg: Vec<usize>,
    /// Advantaged, positively labelled.
    pub adv_pos: Vec<usize>,
    /// Advantaged, negatively labelled.
    pub adv_neg: Vec<usize>,
}

impl GroupPartition {
    pub fn total(&self) -> usize {
        self.dis_pos.len() + self.dis_neg.len() + self.adv_pos.len() + self.adv_neg.len()
    }

    /// Cell sizes in (dis_pos, dis_neg, adv_pos, adv_neg) order.
    pub fn cell_sizes(&self) -> [usize; 4] {
        [
            self.dis_pos.len(),
            self.dis_neg.len(),
            self.adv_pos.len(),
            self.adv_neg.len(),
        ]
    }

    pub fn disadvantaged_count(&self) -> usize {
        self.dis_pos.len() + self.dis_neg.len()
    }

    pub fn advantaged_count(&self) -> usize {
        self.adv_pos.len() + self.adv_neg.len()
    }
}

/// Splits observation indices into the four (group, label) cells.
pub fn partition_groups(y: &BinaryLabels, s: &ProtectedAttribute) -> Result<GroupPartition> {
    if y.len() != s.len() {
        return Err(Error::LengthMismatch {
            left: "y",
            left_len: y.len(),
            right: "s",
            right_len: s.len(),
        });
    }
    let mut part = GroupPartition {
        dis_pos: Vec::new(),
        dis_neg: Vec::new(),
        adv_pos: Vec::new(),
        adv_neg: Vec::new(),
    };
    for (i, (&yi, &si)) in y.iter().zip(s.values().iter()).enumerate() {
        match (si, yi) {
            (1, 1) => part.dis_pos.push(i),
            (1, 0) => part.dis_neg.push(i),
            (0, 1) => part.adv_pos.push(i),
            _ => part.adv_neg.push(i),
        }
    }
    Ok(part)
}

/// Re-validates every invariant of an already-constructed dataset.
///
/// The typed constructors enforce these on construction; this entry point
/// exists for data arriving through deserialization or FFI-style paths.
pub fn validate_dataset(d: Dataset) -> Result<Dataset> {
    for ((i, j), v) in d.x.values().indexed_iter() {
        if !v.is_finite() {
            return Err(Error::Validation(format!(
                "non-finite feature value {v} at ({i}, {j})"
            )));
        }
    }
    for (i, &v) in d.y.values().iter().enumerate() {
        if v > 1 {
            return Err(Error::Validation(format!(
                "label {v} at position {i} is not in {{0, 1}}"
            )));
        }
    }
    for (i, &v) in d.s.values().iter().enumerate() {
        if v > 1 {
            return Err(Error::Validation(format!(
                "protected attribute value {v} at position {i} is not in {{0, 1}}"
            )));
        }
    }
    if d.x.n_rows() != d.y.len() || d.y.len() != d.s.len() {
        return Err(Error::Validation(format!(
            "length mismatch: X has {} rows, y has {}, s has {}",
            d.x.n_rows(),
            d.y.len(),
            d.s.len()
        )));
    }
    Ok(d)
}

//! German Credit ingestion: the UCI space-separated `german.data` layout of
//! twenty coded attributes plus a risk code (1 = good, 2 = bad), encoded into
//! a one-hot/numeric feature matrix with three protected-attribute variants.

use crate::core::{BinaryLabels, Dataset, FeatureMatrix, ProtectedAttribute};
use crate::error::{Error, Result};
use ndarray::Array2;
use std::path::Path;

/// The canonical file describes exactly this many applicants.
pub const GERMAN_RECORD_COUNT: usize = 1000;

/// Allowed codes per categorical attribute, in the UCI dictionary order.
const CHECKING_STATUS: &[&str] = &["A11", "A12", "A13", "A14"];
const CREDIT_HISTORY: &[&str] = &["A30", "A31", "A32", "A33", "A34"];
const PURPOSE: &[&str] = &[
    "A40", "A41", "A42", "A43", "A44", "A45", "A46", "A47", "A48", "A49", "A410",
];
const SAVINGS_STATUS: &[&str] = &["A61", "A62", "A63", "A64", "A65"];
const EMPLOYMENT_SINCE: &[&str] = &["A71", "A72", "A73", "A74", "A75"];
const PERSONAL_STATUS: &[&str] = &["A91", "A92", "A93", "A94", "A95"];
const OTHER_DEBTORS: &[&str] = &["A101", "A102", "A103"];
const PROPERTY: &[&str] = &["A121", "A122", "A123", "A124"];
const OTHER_PLANS: &[&str] = &["A141", "A142", "A143"];
const HOUSING: &[&str] = &["A151", "A152", "A153"];
const JOB: &[&str] = &["A171", "A172", "A173", "A174"];
const TELEPHONE: &[&str] = &["A191", "A192"];
const FOREIGN_WORKER: &[&str] = &["A201", "A202"];

/// Personal-status codes marking female applicants.
const FEMALE_CODES: &[&str] = &["A92", "A95"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGermanCreditRecord {
    pub checking_status: String,
    pub duration_months: u32,
    pub credit_history: String,
    pub purpose: String,
    pub credit_amount: u32,
    pub savings_status: String,
    pub employment_since: String,
    pub installment_rate: u32,
    pub personal_status: String,
    pub other_debtors: String,
    pub residence_since: u32,
    pub property: String,
    pub age: u32,
    pub other_installment_plans: String,
    pub housing: String,
    pub existing_credits: u32,
    pub job: String,
    pub num_dependents: u32,
    pub telephone: String,
    pub foreign_worker: String,
    /// 1 = good credit risk, 2 = bad.
    pub risk: u8,
}

fn parse_code(field: &str, allowed: &[&str], what: &str, line: usize) -> Result<String> {
    if allowed.contains(&field) {
        Ok(field.to_string())
    } else {
        Err(Error::Parse {
            line,
            message: format!("'{field}' is not a valid {what} code"),
        })
    }
}

fn parse_number(field: &str, what: &str, line: usize) -> Result<u32> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("'{field}' is not a valid {what}"),
    })
}

fn parse_record(line_text: &str, line: usize) -> Result<RawGermanCreditRecord> {
    let fields: Vec<&str> = line_text.split_whitespace().collect();
    if fields.len() != 21 {
        return Err(Error::Parse {
            line,
            message: format!("expected 21 whitespace-separated fields, found {}", fields.len()),
        });
    }
    let risk = match fields[20] {
        "1" => 1,
        "2" => 2,
        other => {
            return Err(Error::Parse {
                line,
                message: format!("'{other}' is not a valid risk code (1 or 2)"),
            })
        }
    };
    Ok(RawGermanCreditRecord {
        checking_status: parse_code(fields[0], CHECKING_STATUS, "checking status", line)?,
        duration_months: parse_number(fields[1], "duration", line)?,
        credit_history: parse_code(fields[2], CREDIT_HISTORY, "credit history", line)?,
        purpose: parse_code(fields[3], PURPOSE, "purpose", line)?,
        credit_amount: parse_number(fields[4], "credit amount", line)?,
        savings_status: parse_code(fields[5], SAVINGS_STATUS, "savings status", line)?,
        employment_since: parse_code(fields[6], EMPLOYMENT_SINCE, "employment duration", line)?,
        installment_rate: parse_number(fields[7], "installment rate", line)?,
        personal_status: parse_code(fields[8], PERSONAL_STATUS, "personal status", line)?,
        other_debtors: parse_code(fields[9], OTHER_DEBTORS, "other debtors", line)?,
        residence_since: parse_number(fields[10], "residence duration", line)?,
        property: parse_code(fields[11], PROPERTY, "property", line)?,
        age: parse_number(fields[12], "age", line)?,
        other_installment_plans: parse_code(fields[13], OTHER_PLANS, "installment plans", line)?,
        housing: parse_code(fields[14], HOUSING, "housing", line)?,
        existing_credits: parse_number(fields[15], "existing credits", line)?,
        job: parse_code(fields[16], JOB, "job", line)?,
        num_dependents: parse_number(fields[17], "dependent count", line)?,
        telephone: parse_code(fields[18], TELEPHONE, "telephone", line)?,
        foreign_worker: parse_code(fields[19], FOREIGN_WORKER, "foreign worker", line)?,
        risk,
    })
}

/// Parses records from the raw file text. Line numbers in errors are
/// 1-based; blank lines are skipped.
pub fn records_from_str(text: &str) -> Result<Vec<RawGermanCreditRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_record(line, i + 1)?);
    }
    if records.len() != GERMAN_RECORD_COUNT {
        return Err(Error::Integrity(format!(
            "expected {GERMAN_RECORD_COUNT} records, found {}",
            records.len()
        )));
    }
    Ok(records)
}

/// Loads and validates the canonical file from disk.
pub fn load_german_credit(path: &Path) -> Result<Vec<RawGermanCreditRecord>> {
    let text = std::fs::read_to_string(path)?;
    records_from_str(&text)
}

/// Documented marginal counts of the canonical file, used by the download
/// helper and the reproduction checks: 700 good risks, 310 female
/// applicants, 963 foreign workers, 190 applicants below age 25.
pub fn verify_reference_distribution(records: &[RawGermanCreditRecord]) -> Result<()> {
    let good = records.iter().filter(|r| r.risk == 1).count();
    let female = records
        .iter()
        .filter(|r| FEMALE_CODES.contains(&r.personal_status.as_str()))
        .count();
    let foreign = records.iter().filter(|r| r.foreign_worker == "A201").count();
    let young = records.iter().filter(|r| r.age < 25).count();
    let expected = [(good, 700, "good risks"), (female, 310, "female"),
                    (foreign, 963, "foreign workers"), (young, 190, "age below 25")];
    for (got, want, what) in expected {
        if got != want {
            return Err(Error::Integrity(format!(
                "distribution mismatch: {got} {what}, canonical file has {want}"
            )));
        }
    }
    Ok(())
}

/// Protected-attribute variants extracted from the records. The
/// disadvantaged group is always coded 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtectedName {
    Female,
    ForeignWorker,
    AgeBelow25,
}

impl ProtectedName {
    pub const ALL: [ProtectedName; 3] = [
        ProtectedName::Female,
        ProtectedName::ForeignWorker,
        ProtectedName::AgeBelow25,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtectedName::Female => "female",
            ProtectedName::ForeignWorker => "foreign_worker",
            ProtectedName::AgeBelow25 => "age_below_25",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "female" => Ok(ProtectedName::Female),
            "foreign_worker" => Ok(ProtectedName::ForeignWorker),
            "age_below_25" => Ok(ProtectedName::AgeBelow25),
            other => Err(Error::Config(format!(
                "unknown protected attribute '{other}' (expected female, foreign_worker, or age_below_25)"
            ))),
        }
    }
}

impl std::fmt::Display for ProtectedName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The encoded dataset: one-hot categoricals plus raw numeric columns
/// (standardization is applied separately so cross-validation can use
/// training-fold statistics), the good/bad target, and all three protected
/// variants.
#[derive(Debug, Clone)]
pub struct EncodedGermanCredit {
    pub x: FeatureMatrix,
    pub y: BinaryLabels,
    /// Indices of the numeric (non-indicator) columns.
    pub numeric_columns: Vec<usize>,
    female: ProtectedAttribute,
    foreign_worker: ProtectedAttribute,
    age_below_25: ProtectedAttribute,
}

impl EncodedGermanCredit {
    pub fn protected(&self, name: ProtectedName) -> &ProtectedAttribute {
        match name {
            ProtectedName::Female => &self.female,
            ProtectedName::ForeignWorker => &self.foreign_worker,
            ProtectedName::AgeBelow25 => &self.age_below_25,
        }
    }

    /// Feature columns that encode the protected attribute's source data;
    /// the remove-protected-attribute condition drops these.
    pub fn protected_source_columns(&self, name: ProtectedName) -> Vec<String> {
        let prefix = match name {
            ProtectedName::Female => "personal_status=",
            ProtectedName::ForeignWorker => "foreign_worker=",
            ProtectedName::AgeBelow25 => return vec!["age".to_string()],
        };
        self.x
            .column_names()
            .iter()
            .filter(|c| c.starts_with(prefix))
            .cloned()
            .collect()
    }

    pub fn dataset(&self, name: ProtectedName) -> Result<Dataset> {
        Dataset::new(self.x.clone(), self.y.clone(), self.protected(name).clone())
    }
}

struct ColumnBuilder {
    names: Vec<String>,
    numeric: Vec<usize>,
    values: Vec<Vec<f64>>,
}

impl ColumnBuilder {
    fn new(n: usize) -> Self {
        Self {
            names: Vec::new(),
            numeric: Vec::new(),
            values: vec![Vec::new(); n],
        }
    }

    fn numeric_column(&mut self, name: &str, get: impl Fn(usize) -> f64) {
        self.numeric.push(self.names.len());
        self.names.push(name.to_string());
        for (i, row) in self.values.iter_mut().enumerate() {
            row.push(get(i));
        }
    }

    fn one_hot(&mut self, name: &str, codes: &[&str], get: impl Fn(usize) -> String) {
        for code in codes {
            self.names.push(format!("{name}={code}"));
        }
        for (i, row) in self.values.iter_mut().enumerate() {
            let value = get(i);
            for code in codes {
                row.push(f64::from(value == *code));
            }
        }
    }
}

/// Encodes records into the feature matrix and all protected variants.
/// Column layout follows the attribute order of the raw file; the full code
/// dictionary is used, so the layout does not depend on which codes occur.
pub fn encode(records: &[RawGermanCreditRecord]) -> Result<EncodedGermanCredit> {
    if records.is_empty() {
        return Err(Error::Validation("no records to encode".into()));
    }
    let n = records.len();
    let mut b = ColumnBuilder::new(n);
    b.one_hot("checking_status", CHECKING_STATUS, |i| records[i].checking_status.clone());
    b.numeric_column("duration_months", |i| records[i].duration_months as f64);
    b.one_hot("credit_history", CREDIT_HISTORY, |i| records[i].credit_history.clone());
    b.one_hot("purpose", PURPOSE, |i| records[i].purpose.clone());
    b.numeric_column("credit_amount", |i| records[i].credit_amount as f64);
    b.one_hot("savings_status", SAVINGS_STATUS, |i| records[i].savings_status.clone());
    b.one_hot("employment_since", EMPLOYMENT_SINCE, |i| records[i].employment_since.clone());
    b.numeric_column("installment_rate", |i| records[i].installment_rate as f64);
    b.one_hot("personal_status", PERSONAL_STATUS, |i| records[i].personal_status.clone());
    b.one_hot("other_debtors", OTHER_DEBTORS, |i| records[i].other_debtors.clone());
    b.numeric_column("residence_since", |i| records[i].residence_since as f64);
    b.one_hot("property", PROPERTY, |i| records[i].property.clone());
    b.numeric_column("age", |i| records[i].age as f64);
    b.one_hot("other_installment_plans", OTHER_PLANS, |i| {
        records[i].other_installment_plans.clone()
    });
    b.one_hot("housing", HOUSING, |i| records[i].housing.clone());
    b.numeric_column("existing_credits", |i| records[i].existing_credits as f64);
    b.one_hot("job", JOB, |i| records[i].job.clone());
    b.numeric_column("num_dependents", |i| records[i].num_dependents as f64);
    b.one_hot("telephone", TELEPHONE, |i| records[i].telephone.clone());
    b.one_hot("foreign_worker", FOREIGN_WORKER, |i| records[i].foreign_worker.clone());

    let m = b.names.len();
    let mut flat = Vec::with_capacity(n * m);
    for row in &b.values {
        flat.extend_from_slice(row);
    }
    let x = FeatureMatrix::new(
        Array2::from_shape_vec((n, m), flat).map_err(|e| Error::Validation(e.to_string()))?,
        b.names,
    )?;

    let y = BinaryLabels::new(records.iter().map(|r| u8::from(r.risk == 1)).collect())?;
    let female = ProtectedAttribute::new(
        records
            .iter()
            .map(|r| u8::from(FEMALE_CODES.contains(&r.personal_status.as_str())))
            .collect(),
        ProtectedName::Female.as_str(),
    )?;
    let foreign_worker = ProtectedAttribute::new(
        records
            .iter()
            .map(|r| u8::from(r.foreign_worker == "A201"))
            .collect(),
        ProtectedName::ForeignWorker.as_str(),
    )?;
    let age_below_25 = ProtectedAttribute::new(
        records.iter().map(|r| u8::from(r.age < 25)).collect(),
        ProtectedName::AgeBelow25.as_str(),
    )?;

    Ok(EncodedGermanCredit {
        x,
        y,
        numeric_columns: b.numeric,
        female,
        foreign_worker,
        age_below_25,
    })
}

/// One-call form: encode and select a single protected variant.
pub fn encode_for(records: &[RawGermanCreditRecord], protected_name: &str) -> Result<Dataset> {
    let name = ProtectedName::parse(protected_name)?;
    encode(records)?.dataset(name)
}

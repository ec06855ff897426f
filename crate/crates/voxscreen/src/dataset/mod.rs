//! The labeled feature matrix and its transformations.

mod csv_io;
mod prune;
mod smote;

pub use csv_io::{load_csv, load_csv_reader, save_csv, write_csv};
pub use prune::{pearson_abs, prune_correlated};
pub use smote::smote;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Screening label. `Pd` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Pd,
    NonPd,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Pd => "PD",
            Label::NonPd => "non-PD",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "PD" => Ok(Label::Pd),
            "non-PD" => Ok(Label::NonPd),
            other => Err(Error::Parse(format!("unknown label {other:?}"))),
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, Label::Pd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
    Unspecified,
}

impl Gender {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unspecified => "unspecified",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "male" => Ok(Gender::Male),
            "female" => Ok(Gender::Female),
            "unspecified" | "" => Ok(Gender::Unspecified),
            other => Err(Error::Parse(format!("unknown gender {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Environment {
    Home,
    Lab,
}

impl Environment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Environment::Home => "home",
            Environment::Lab => "lab",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "home" => Ok(Environment::Home),
            "lab" => Ok(Environment::Lab),
            other => Err(Error::Parse(format!("unknown environment {other:?}"))),
        }
    }
}

/// Per-recording metadata carried alongside the feature row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub id: String,
    pub label: Label,
    pub gender: Gender,
    /// Age in years.
    pub age: f64,
    pub environment: Environment,
    pub country: String,
    /// True for rows synthesized by the oversampler; never persisted.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
}

impl RecordMeta {
    pub fn new(
        id: impl Into<String>,
        label: Label,
        gender: Gender,
        age: f64,
        environment: Environment,
        country: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            label,
            gender,
            age,
            environment,
            country: country.into(),
            synthetic: false,
        }
    }
}

/// A named feature matrix with one metadata record per row.
///
/// Missing values are explicit (`None`) and flow through CSV as empty
/// cells; they are imputed with training-fold medians at model time, never
/// at assembly time.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub meta: Vec<RecordMeta>,
}

impl FeatureMatrix {
    /// Builds a matrix and validates the invariants: unique ids, unique
    /// names, rectangular rows, non-negative ages.
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<Option<f64>>>,
        meta: Vec<RecordMeta>,
    ) -> Result<Self> {
        if rows.len() != meta.len() {
            return Err(Error::Schema(format!(
                "{} rows but {} metadata records",
                rows.len(),
                meta.len()
            )));
        }
        let unique_names: BTreeSet<&String> = feature_names.iter().collect();
        if unique_names.len() != feature_names.len() {
            return Err(Error::Schema("duplicate feature names".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(Error::Schema(format!(
                    "row {i} has {} values, expected {}",
                    row.len(),
                    feature_names.len()
                )));
            }
        }
        let unique_ids: BTreeSet<&String> = meta.iter().map(|m| &m.id).collect();
        if unique_ids.len() != meta.len() {
            return Err(Error::Schema("duplicate record ids".into()));
        }
        if meta.iter().any(|m| m.age < 0.0) {
            return Err(Error::Schema("negative age".into()));
        }
        Ok(Self {
            feature_names,
            rows,
            meta,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Positive-class indicator per row.
    pub fn labels(&self) -> Vec<bool> {
        self.meta.iter().map(|m| m.label.is_positive()).collect()
    }

    /// New matrix keeping only the rows selected by `keep`.
    pub fn filter_rows(&self, keep: impl Fn(usize, &RecordMeta) -> bool) -> FeatureMatrix {
        let mut rows = Vec::new();
        let mut meta = Vec::new();
        for (i, m) in self.meta.iter().enumerate() {
            if keep(i, m) {
                rows.push(self.rows[i].clone());
                meta.push(m.clone());
            }
        }
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            rows,
            meta,
        }
    }

    /// New matrix keeping only the named columns, in this matrix's own
    /// column order (so selecting every name reproduces the matrix
    /// exactly).
    pub fn select_features(&self, names: &BTreeSet<String>) -> FeatureMatrix {
        let idx: Vec<usize> = self
            .feature_names
            .iter()
            .enumerate()
            .filter(|(_, n)| names.contains(*n))
            .map(|(i, _)| i)
            .collect();
        FeatureMatrix {
            feature_names: idx.iter().map(|&i| self.feature_names[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&i| r[i]).collect())
                .collect(),
            meta: self.meta.clone(),
        }
    }

    /// Per-feature median of the non-missing values; 0.0 for all-missing
    /// columns.
    pub fn column_medians(&self) -> Vec<f64> {
        (0..self.n_features())
            .map(|j| {
                let mut vals: Vec<f64> = self.rows.iter().filter_map(|r| r[j]).collect();
                if vals.is_empty() {
                    return 0.0;
                }
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let n = vals.len();
                if n % 2 == 1 {
                    vals[n / 2]
                } else {
                    0.5 * (vals[n / 2 - 1] + vals[n / 2])
                }
            })
            .collect()
    }

    /// Dense copy with missing values replaced by the given medians.
    pub fn imputed_rows(&self, medians: &[f64]) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(j, v)| v.unwrap_or(medians[j]))
                    .collect()
            })
            .collect()
    }
}

/// Assembles one matrix row from extracted features; purely a layout
/// operation, deterministic by construction.
pub fn assemble_row(
    classic: &crate::features::ClassicFeatures,
    nonlinear: &crate::features::NonlinearFeatures,
    all_features: bool,
) -> Vec<Option<f64>> {
    crate::features::feature_row(classic, nonlinear, all_features)
}

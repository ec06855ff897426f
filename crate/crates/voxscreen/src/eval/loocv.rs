//! Leave-one-out cross-validation driver.
//!
//! Each fold fits the full preprocessing stack on its n-1 training rows
//! only: median imputation, minority oversampling, then the tree learner.
//! The held-out row meets nothing but the scoring path, so poisoning its
//! features cannot move any fold's model. Fold RNG streams derive from
//! `(seed, row index)`, which makes folds order-independent and keeps the
//! fold models identical across feature-subset reruns with the same seed.

use std::collections::BTreeMap;

use crate::config::derive_seed;
use crate::dataset::{smote, FeatureMatrix, Label};
use crate::error::{Error, Result};
use crate::learn::{train, TrainerConfig, TreeEnsemble};

/// Scores and per-fold model fingerprints of one LOOCV run.
#[derive(Debug, Clone, PartialEq)]
pub struct LoocvOutcome {
    /// Held-out probability per record id (missing for skipped folds).
    pub scores: BTreeMap<String, f64>,
    /// Hex digest of each fold's trained model file.
    pub fold_fingerprints: BTreeMap<String, String>,
    /// Ids whose fold had a single-class training set.
    pub skipped: Vec<String>,
}

/// One trained fold: everything needed to score held-out rows.
pub struct FoldModel {
    pub model: TreeEnsemble,
    /// Training-fold medians used to impute incoming rows.
    pub medians: Vec<f64>,
}

impl FoldModel {
    /// Scores a raw (possibly incomplete) feature row.
    pub fn score(&self, row: &[Option<f64>]) -> Result<f64> {
        let dense: Vec<f64> = row
            .iter()
            .enumerate()
            .map(|(j, v)| v.unwrap_or(self.medians[j]))
            .collect();
        self.model.predict_proba(&dense)
    }
}

/// Trains the model for fold `held_out` from the other rows only.
///
/// Errors with `DegenerateLabels` when the training portion is
/// single-class.
pub fn fit_fold(
    m: &FeatureMatrix,
    held_out: usize,
    trainer: &TrainerConfig,
    smote_k: usize,
    seed: u64,
) -> Result<FoldModel> {
    let fold_seed = derive_seed(seed, held_out as u64);
    let train_m = m.filter_rows(|j, _| j != held_out);
    fit_training_set(&train_m, trainer, smote_k, fold_seed)
}

/// Fits imputation, oversampling, and the learner on a training set.
pub fn fit_training_set(
    train_m: &FeatureMatrix,
    trainer: &TrainerConfig,
    smote_k: usize,
    stream_seed: u64,
) -> Result<FoldModel> {
    let labels = train_m.labels();
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::DegenerateLabels(
            "training portion is single-class".into(),
        ));
    }

    let medians = train_m.column_medians();
    let imputed_rows: Vec<Vec<Option<f64>>> = train_m
        .imputed_rows(&medians)
        .into_iter()
        .map(|r| r.into_iter().map(Some).collect())
        .collect();
    let imputed = FeatureMatrix {
        feature_names: train_m.feature_names.clone(),
        rows: imputed_rows,
        meta: train_m.meta.clone(),
    };

    let minority = if pos * 2 <= labels.len() {
        Label::Pd
    } else {
        Label::NonPd
    };
    let minority_count = pos.min(labels.len() - pos);
    let balanced = if minority_count >= 2 {
        smote(&imputed, smote_k, minority, derive_seed(stream_seed, 1))?
    } else {
        imputed // too few rows to interpolate; train as-is
    };

    let x: Vec<Vec<f64>> = balanced
        .rows
        .iter()
        .map(|r| r.iter().map(|v| v.expect("balanced matrix is dense")).collect())
        .collect();
    let model = train(
        &x,
        &balanced.labels(),
        &balanced.feature_names,
        &trainer.with_seed(derive_seed(stream_seed, 2)),
    )?;

    Ok(FoldModel { model, medians })
}

/// Runs all n folds.
///
/// Folds whose training portion is single-class are skipped and reported;
/// any other error aborts the run.
pub fn loocv(
    m: &FeatureMatrix,
    trainer: &TrainerConfig,
    smote_k: usize,
    seed: u64,
) -> Result<LoocvOutcome> {
    if m.n_rows() < 3 {
        return Err(Error::InvalidArgument(format!(
            "loocv needs at least 3 rows, got {}",
            m.n_rows()
        )));
    }
    let mut outcome = LoocvOutcome {
        scores: BTreeMap::new(),
        fold_fingerprints: BTreeMap::new(),
        skipped: Vec::new(),
    };
    for i in 0..m.n_rows() {
        let id = m.meta[i].id.clone();
        match fit_fold(m, i, trainer, smote_k, seed) {
            Ok(fold) => {
                let score = fold.score(&m.rows[i])?;
                outcome.scores.insert(id.clone(), score);
                outcome
                    .fold_fingerprints
                    .insert(id, fold.model.fingerprint());
            }
            Err(Error::DegenerateLabels(_)) => outcome.skipped.push(id),
            Err(e) => return Err(e),
        }
    }
    Ok(outcome)
}

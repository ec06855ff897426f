//! Incremental-feature validation of the attribution ranking.
//!
//! Rebuilds the LOOCV experiment on the top-k ranked features for
//! k = 1..K and records AUC and accuracy per k. Because the retained
//! columns keep their original matrix order and fold seeds depend only on
//! `(seed, row index)`, the k = full point reproduces the full-model
//! metrics exactly.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::Result;
use crate::eval::{accuracy_confusion, auc, loocv};
use crate::explain::GlobalImportance;
use crate::learn::TrainerConfig;

/// One point of the validation curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub auc: f64,
    pub accuracy: f64,
    /// Three-point moving average of AUC (shrinking window at the edges).
    pub auc_ma3: f64,
}

/// Runs LOOCV on the top-k features for k = 1..=k_max.
///
/// `k_max` is truncated to the feature count. Strata are not recomputed;
/// the curve tracks the primary metrics only.
pub fn shap_validation_curve(
    m: &FeatureMatrix,
    ranking: &GlobalImportance,
    trainer: &TrainerConfig,
    smote_k: usize,
    seed: u64,
    k_max: usize,
) -> Result<Vec<CurvePoint>> {
    let ranked = ranking.names();
    let k_max = k_max.min(ranked.len()).min(m.n_features());
    let labels_by_id: std::collections::BTreeMap<&str, bool> = m
        .meta
        .iter()
        .map(|x| (x.id.as_str(), x.label.is_positive()))
        .collect();

    let mut points = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let keep: BTreeSet<String> = ranked.iter().take(k).cloned().collect();
        let sub = m.select_features(&keep);
        let outcome = loocv(&sub, trainer, smote_k, seed)?;
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        for (id, s) in &outcome.scores {
            scores.push(*s);
            labels.push(labels_by_id[id.as_str()]);
        }
        let a = auc(&scores, &labels)?;
        let (acc, _) = accuracy_confusion(&scores, &labels, 0.5);
        points.push(CurvePoint {
            k,
            auc: a,
            accuracy: acc,
            auc_ma3: 0.0,
        });
    }

    let aucs: Vec<f64> = points.iter().map(|p| p.auc).collect();
    for (i, p) in points.iter_mut().enumerate() {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(aucs.len() - 1);
        p.auc_ma3 = aucs[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
    }
    Ok(points)
}

/// Plot-data TSV: `k, auc, accuracy, auc_ma3`.
pub fn curve_to_tsv(points: &[CurvePoint]) -> String {
    let mut out = String::from("k\tauc\taccuracy\tauc_ma3\n");
    for p in points {
        out.push_str(&format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\n",
            p.k, p.auc, p.accuracy, p.auc_ma3
        ));
    }
    out
}

//! Evaluation: LOOCV scores, metrics, strata, ablations, reports.

mod ablation;
mod loocv;
mod metrics;

pub use ablation::{ablation, AblationMode, AblationOutcome, AblationRun};
pub use loocv::{fit_fold, fit_training_set, loocv, FoldModel, LoocvOutcome};
pub use metrics::{
    accuracy_confusion, auc, stratified_eval, Confusion, StrataSpec, StratumMetrics,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::learn::TrainerConfig;

/// Versioned evaluation report (`report/1`).
///
/// Serializes with sorted keys so identical runs emit identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: String,
    /// Fingerprint of the pipeline configuration that produced the run.
    pub fingerprint: String,
    pub seed: u64,
    /// Rows that received a score.
    pub n: usize,
    pub auc: f64,
    pub accuracy: f64,
    pub confusion: Confusion,
    pub per_sample_scores: BTreeMap<String, f64>,
    pub strata: BTreeMap<String, StratumMetrics>,
    pub skipped_folds: Vec<String>,
}

pub const REPORT_VERSION: &str = "report/1";

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Runs LOOCV on the matrix and assembles the full report.
pub fn evaluate(
    m: &FeatureMatrix,
    trainer: &TrainerConfig,
    smote_k: usize,
    seed: u64,
    fingerprint: &str,
    strata_spec: &StrataSpec,
) -> Result<EvalReport> {
    let outcome = loocv(m, trainer, smote_k, seed)?;

    // metrics over the rows that were scored, in matrix order
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    let mut meta = Vec::new();
    for (i, rm) in m.meta.iter().enumerate() {
        if let Some(&s) = outcome.scores.get(&rm.id) {
            scores.push(s);
            labels.push(m.labels()[i]);
            meta.push(rm.clone());
        }
    }
    let auc_value = auc(&scores, &labels)?;
    let (accuracy, confusion) = accuracy_confusion(&scores, &labels, 0.5);
    let strata = stratified_eval(&scores, &labels, &meta, strata_spec);

    Ok(EvalReport {
        version: REPORT_VERSION.to_string(),
        fingerprint: fingerprint.to_string(),
        seed,
        n: scores.len(),
        auc: auc_value,
        accuracy,
        confusion,
        per_sample_scores: outcome.scores,
        strata,
        skipped_folds: outcome.skipped,
    })
}

/// Renders the performance table: a header plus one
/// `name | auc | accuracy` row per model, three decimals, mirroring the
/// published layout.
pub fn format_performance_table(rows: &[(String, f64, f64)]) -> String {
    let mut out = String::from("Algorithm | AUC | Accuracy\n");
    for (name, auc, accuracy) in rows {
        out.push_str(&format!("{name} | {auc:.3} | {accuracy:.3}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Environment, Gender, Label, RecordMeta};
    use crate::learn::BoostConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_matrix() -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let names = vec!["f0".to_string(), "f1".to_string()];
        let mut rows = Vec::new();
        let mut meta = Vec::new();
        for i in 0..16 {
            let positive = i % 2 == 0;
            let c = if positive { 1.0 } else { -1.0 };
            rows.push(vec![
                Some(c + rng.gen_range(-0.4..0.4)),
                Some(rng.gen_range(-1.0..1.0)),
            ]);
            meta.push(RecordMeta::new(
                format!("r{i}"),
                if positive { Label::Pd } else { Label::NonPd },
                if i % 3 == 0 { Gender::Female } else { Gender::Male },
                40.0 + i as f64,
                if i % 8 == 0 {
                    Environment::Lab
                } else {
                    Environment::Home
                },
                "US",
            ));
        }
        FeatureMatrix::new(names, rows, meta).unwrap()
    }

    fn trainer() -> TrainerConfig {
        TrainerConfig::Boosted(BoostConfig {
            n_rounds: 20,
            max_depth: 2,
            learning_rate: 0.3,
            ..Default::default()
        })
    }

    #[test]
    fn report_roundtrips_through_json() {
        let m = small_matrix();
        let report = evaluate(&m, &trainer(), 3, 7, "fp", &StrataSpec::default()).unwrap();
        let json = report.to_json();
        let back = EvalReport::from_json(&json).unwrap();
        assert_eq!(report, back);
        // byte determinism
        assert_eq!(json, back.to_json());
    }

    #[test]
    fn report_contains_five_strata_by_default() {
        let m = small_matrix();
        let report = evaluate(&m, &trainer(), 3, 7, "fp", &StrataSpec::default()).unwrap();
        let keys: Vec<&String> = report.strata.keys().collect();
        assert_eq!(keys.len(), 5);
        for k in ["male", "female", "age50plus", "home", "lab"] {
            assert!(report.strata.contains_key(k), "missing {k}");
        }
    }

    #[test]
    fn table_renders_the_published_layout() {
        let table = format_performance_table(&[
            ("SVM".to_string(), 0.751, 0.735),
            ("XGBoost".to_string(), 0.750, 0.741),
        ]);
        assert!(table.contains("XGBoost | 0.750 | 0.741"));
        assert!(table.starts_with("Algorithm | AUC | Accuracy\n"));
    }
}

//! Robustness experiments: drop the lab subset, or repeatedly drop a
//! random fraction of the home recordings, and re-run LOOCV.

use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::derive_seed;
use crate::dataset::{Environment, FeatureMatrix};
use crate::error::Result;
use crate::eval::{evaluate, EvalReport, StrataSpec};
use crate::learn::TrainerConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AblationMode {
    /// Drop every lab recording, evaluate once.
    RemoveLab,
    /// Drop `floor(fraction * n)` home recordings at random, `runs` times.
    RemoveRandomFraction { fraction: f64, runs: usize },
}

/// One ablation repetition.
#[derive(Debug, Clone)]
pub struct AblationRun {
    pub removed: Vec<String>,
    pub report: EvalReport,
}

#[derive(Debug, Clone)]
pub struct AblationOutcome {
    pub runs: Vec<AblationRun>,
    pub mean_auc: f64,
    pub mean_accuracy: f64,
    /// True when there was nothing to remove; no runs were made.
    pub noop: bool,
}

/// Runs the requested ablation.
#[allow(clippy::too_many_arguments)]
pub fn ablation(
    m: &FeatureMatrix,
    trainer: &TrainerConfig,
    mode: AblationMode,
    smote_k: usize,
    seed: u64,
    fingerprint: &str,
    strata: &StrataSpec,
) -> Result<AblationOutcome> {
    let noop = AblationOutcome {
        runs: Vec::new(),
        mean_auc: f64::NAN,
        mean_accuracy: f64::NAN,
        noop: true,
    };

    let mut runs = Vec::new();
    match mode {
        AblationMode::RemoveLab => {
            let removed: Vec<String> = m
                .meta
                .iter()
                .filter(|x| x.environment == Environment::Lab)
                .map(|x| x.id.clone())
                .collect();
            if removed.is_empty() {
                return Ok(noop);
            }
            let kept = m.filter_rows(|_, x| x.environment != Environment::Lab);
            let report = evaluate(&kept, trainer, smote_k, seed, fingerprint, strata)?;
            runs.push(AblationRun { removed, report });
        }
        AblationMode::RemoveRandomFraction { fraction, runs: n_runs } => {
            let drop_count = (fraction * m.n_rows() as f64).floor() as usize;
            let home: Vec<usize> = (0..m.n_rows())
                .filter(|&i| m.meta[i].environment == Environment::Home)
                .collect();
            if drop_count == 0 || home.is_empty() || n_runs == 0 {
                return Ok(noop);
            }
            for r in 0..n_runs {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1_000 + r as u64));
                let mut pool = home.clone();
                pool.shuffle(&mut rng);
                let dropped: std::collections::BTreeSet<usize> =
                    pool.into_iter().take(drop_count.min(home.len())).collect();
                let removed: Vec<String> =
                    dropped.iter().map(|&i| m.meta[i].id.clone()).collect();
                let kept = m.filter_rows(|i, _| !dropped.contains(&i));
                let report = evaluate(
                    &kept,
                    trainer,
                    smote_k,
                    derive_seed(seed, 2_000 + r as u64),
                    fingerprint,
                    strata,
                )?;
                runs.push(AblationRun { removed, report });
            }
        }
    }

    let mean_auc = runs.iter().map(|r| r.report.auc).sum::<f64>() / runs.len() as f64;
    let mean_accuracy = runs.iter().map(|r| r.report.accuracy).sum::<f64>() / runs.len() as f64;
    Ok(AblationOutcome {
        runs,
        mean_auc,
        mean_accuracy,
        noop: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Gender, Label, RecordMeta};
    use crate::learn::BoostConfig;
    use rand::Rng;

    fn trainer() -> TrainerConfig {
        TrainerConfig::Boosted(BoostConfig {
            n_rounds: 15,
            max_depth: 2,
            learning_rate: 0.3,
            ..Default::default()
        })
    }

    fn cohort(n: usize, lab_every: usize) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let names = vec!["f0".to_string(), "f1".to_string()];
        let mut rows = Vec::new();
        let mut meta = Vec::new();
        for i in 0..n {
            let positive = i % 2 == 0;
            let c = if positive { 1.0 } else { -1.0 };
            rows.push(vec![
                Some(c + rng.gen_range(-0.5..0.5)),
                Some(c + rng.gen_range(-0.5..0.5)),
            ]);
            meta.push(RecordMeta::new(
                format!("r{i}"),
                if positive { Label::Pd } else { Label::NonPd },
                Gender::Male,
                60.0,
                if lab_every > 0 && i % lab_every == 0 {
                    Environment::Lab
                } else {
                    Environment::Home
                },
                "US",
            ));
        }
        FeatureMatrix::new(names, rows, meta).unwrap()
    }

    #[test]
    fn remove_lab_with_no_lab_rows_is_noop() {
        let m = cohort(12, 0);
        let out = ablation(
            &m,
            &trainer(),
            AblationMode::RemoveLab,
            3,
            5,
            "fp",
            &StrataSpec::default(),
        )
        .unwrap();
        assert!(out.noop);
        assert!(out.runs.is_empty());
    }

    #[test]
    fn remove_lab_drops_exactly_the_lab_rows() {
        let m = cohort(20, 5);
        let out = ablation(
            &m,
            &trainer(),
            AblationMode::RemoveLab,
            3,
            5,
            "fp",
            &StrataSpec::default(),
        )
        .unwrap();
        assert!(!out.noop);
        assert_eq!(out.runs.len(), 1);
        assert_eq!(out.runs[0].removed.len(), 4);
        assert_eq!(out.runs[0].report.n, 16);
    }

    #[test]
    fn random_fraction_runs_have_expected_size_and_mean() {
        let m = cohort(40, 10);
        let out = ablation(
            &m,
            &trainer(),
            AblationMode::RemoveRandomFraction {
                fraction: 0.07,
                runs: 4,
            },
            3,
            9,
            "fp",
            &StrataSpec::default(),
        )
        .unwrap();
        assert_eq!(out.runs.len(), 4);
        for run in &out.runs {
            // floor(0.07 * 40) = 2 rows dropped, all from home
            assert_eq!(run.removed.len(), 2);
            assert_eq!(run.report.n, 38);
        }
        let mean: f64 = out.runs.iter().map(|r| r.report.auc).sum::<f64>() / 4.0;
        assert!((out.mean_auc - mean).abs() < 1e-15);
    }
}

//! Classification metrics: AUC, accuracy, confusion counts, strata.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{Environment, Gender, RecordMeta};
use crate::error::{Error, Result};

/// Confusion counts at a fixed decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Area under the ROC curve via the rank statistic.
///
/// Equal to the fraction of (positive, negative) pairs where the positive
/// scores higher, counting ties as one half, which is also the
/// trapezoidal area under the ROC curve. Ties get averaged ranks, so the
/// result matches brute-force pair counting exactly.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument(
            "scores and labels must align".into(),
        ));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Undefined(
            "auc needs both classes present".into(),
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    // average ranks over tie groups, 1-based
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0usize;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }

    let u = rank_sum_pos - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// Accuracy and confusion at `threshold`; predicts positive when
/// `score >= threshold`.
pub fn accuracy_confusion(scores: &[f64], labels: &[bool], threshold: f64) -> (f64, Confusion) {
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    let total = c.total().max(1);
    ((c.tp + c.tn) as f64 / total as f64, c)
}

/// Metrics of one stratum; `defined = false` (and `None` metrics) when the
/// stratum is empty or single-class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumMetrics {
    pub n: usize,
    pub defined: bool,
    pub auc: Option<f64>,
    pub accuracy: Option<f64>,
    pub confusion: Option<Confusion>,
}

/// Which stratum families to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrataSpec {
    pub gender: bool,
    pub age50: bool,
    pub environment: bool,
}

impl Default for StrataSpec {
    fn default() -> Self {
        Self {
            gender: true,
            age50: true,
            environment: true,
        }
    }
}

impl StrataSpec {
    /// Parses a comma-separated list like `gender,age50,environment`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut spec = Self {
            gender: false,
            age50: false,
            environment: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "gender" => spec.gender = true,
                "age50" => spec.age50 = true,
                "environment" => spec.environment = true,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown stratum family {other:?}"
                    )))
                }
            }
        }
        Ok(spec)
    }
}

/// Recomputes the metrics inside each requested stratum.
///
/// Families expand to strata named `male`, `female`, `age50plus`, `home`,
/// and `lab`. Strata where AUC is undefined are flagged, not dropped.
pub fn stratified_eval(
    scores: &[f64],
    labels: &[bool],
    meta: &[RecordMeta],
    spec: &StrataSpec,
) -> BTreeMap<String, StratumMetrics> {
    let mut out = BTreeMap::new();
    let mut add = |name: &str, member: &dyn Fn(&RecordMeta) -> bool| {
        let idx: Vec<usize> = (0..meta.len()).filter(|&i| member(&meta[i])).collect();
        let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
        let l: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
        let metrics = match auc(&s, &l) {
            Ok(a) => {
                let (acc, conf) = accuracy_confusion(&s, &l, 0.5);
                StratumMetrics {
                    n: idx.len(),
                    defined: true,
                    auc: Some(a),
                    accuracy: Some(acc),
                    confusion: Some(conf),
                }
            }
            Err(_) => StratumMetrics {
                n: idx.len(),
                defined: false,
                auc: None,
                accuracy: None,
                confusion: None,
            },
        };
        out.insert(name.to_string(), metrics);
    };

    if spec.gender {
        add("male", &|m: &RecordMeta| m.gender == Gender::Male);
        add("female", &|m: &RecordMeta| m.gender == Gender::Female);
    }
    if spec.age50 {
        add("age50plus", &|m: &RecordMeta| m.age >= 50.0);
    }
    if spec.environment {
        add("home", &|m: &RecordMeta| m.environment == Environment::Home);
        add("lab", &|m: &RecordMeta| m.environment == Environment::Lab);
    }
    out
}

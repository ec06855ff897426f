//! Native tree-ensemble learners over a shared serializable model format.
//!
//! Both learners produce [`TreeEnsemble`]s: a bagged forest of Gini trees
//! whose leaves hold class-1 fractions, and a gradient-boosted model whose
//! trees fit second-order statistics of the logistic loss. Every node keeps
//! its training cover so the attribution module can form cover-weighted
//! conditional expectations.

mod boosted;
mod forest;
mod model;
mod split;

pub use boosted::train_boosted;
pub use forest::train_forest;
pub use model::{model_from_json, model_to_json, model_to_json_with_meta};

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

/// One tree node. Children are indices into the tree's node array; samples
/// with `x[feature] < threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        cover: f64,
    },
    Leaf {
        value: f64,
        cover: f64,
    },
}

impl Node {
    pub fn cover(&self) -> f64 {
        match self {
            Node::Split { cover, .. } | Node::Leaf { cover, .. } => *cover,
        }
    }
}

/// A binary decision tree stored as a flat node array with the root at 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// Root-to-leaf traversal.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if x[*feature] < *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Cover-weighted expectation of the tree output.
    pub fn expected_value(&self) -> f64 {
        self.expected_from(0)
    }

    fn expected_from(&self, i: usize) -> f64 {
        match &self.nodes[i] {
            Node::Leaf { value, .. } => *value,
            Node::Split {
                left, right, cover, ..
            } => {
                let cl = self.nodes[*left].cover();
                let cr = self.nodes[*right].cover();
                debug_assert!(*cover > 0.0);
                (cl * self.expected_from(*left) + cr * self.expected_from(*right)) / cover
            }
        }
    }

    /// Checks that every split's cover equals the sum of its children's.
    pub fn covers_consistent(&self) -> bool {
        self.nodes.iter().all(|n| match n {
            Node::Leaf { .. } => true,
            Node::Split {
                left, right, cover, ..
            } => {
                let sum = self.nodes[*left].cover() + self.nodes[*right].cover();
                (sum - cover).abs() <= 1e-9 * cover.max(1.0)
            }
        })
    }

    pub fn max_depth(&self) -> usize {
        self.depth_from(0)
    }

    fn depth_from(&self, i: usize) -> usize {
        match &self.nodes[i] {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => {
                1 + self.depth_from(*left).max(self.depth_from(*right))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Forest,
    Boosted,
}

/// A serialized forest or boosted model.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    pub kind: ModelKind,
    /// Log-odds offset for boosted models; 0 for forests.
    pub base_score: f64,
    pub feature_names: Vec<String>,
    pub trees: Vec<DecisionTree>,
    /// 1.0 per tree for forests, learning-rate for boosted trees.
    pub tree_weights: Vec<f64>,
}

impl TreeEnsemble {
    /// The attribution-space output: mean leaf fraction for forests, the
    /// pre-sigmoid log-odds for boosted models.
    pub fn margin(&self, x: &[f64]) -> f64 {
        match self.kind {
            ModelKind::Forest => {
                let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
                sum / self.trees.len() as f64
            }
            ModelKind::Boosted => {
                let mut m = self.base_score;
                for (t, w) in self.trees.iter().zip(&self.tree_weights) {
                    m += w * t.predict(x);
                }
                m
            }
        }
    }

    /// Probability of the positive class for a complete feature row.
    ///
    /// Missing values must already be imputed; the row length must match
    /// the model's feature list.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_names.len() {
            return Err(Error::Schema(format!(
                "row has {} features, model expects {}",
                x.len(),
                self.feature_names.len()
            )));
        }
        Ok(match self.kind {
            ModelKind::Forest => self.margin(x),
            ModelKind::Boosted => sigmoid(self.margin(x)),
        })
    }

    /// Per-tree weights in margin space: `1/M` for forests so the weighted
    /// sum reproduces the mean, the stored learning-rate weights for
    /// boosted models.
    pub fn margin_weights(&self) -> Vec<f64> {
        match self.kind {
            ModelKind::Forest => {
                vec![1.0 / self.trees.len() as f64; self.trees.len()]
            }
            ModelKind::Boosted => self.tree_weights.clone(),
        }
    }

    /// Cover-weighted expected margin over the training distribution.
    pub fn expected_margin(&self) -> f64 {
        let base = match self.kind {
            ModelKind::Forest => 0.0,
            ModelKind::Boosted => self.base_score,
        };
        base + self
            .trees
            .iter()
            .zip(self.margin_weights())
            .map(|(t, w)| w * t.expected_value())
            .sum::<f64>()
    }

    /// Hex SHA-256 of the serialized model; used as the per-fold model
    /// fingerprint in reports and leakage checks.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = model_to_json(self);
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Trainer selection with hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainerConfig {
    Forest(ForestConfig),
    Boosted(BoostConfig),
}

impl TrainerConfig {
    pub fn with_seed(&self, seed: u64) -> TrainerConfig {
        match self {
            TrainerConfig::Forest(c) => {
                let mut c = c.clone();
                c.seed = seed;
                TrainerConfig::Forest(c)
            }
            TrainerConfig::Boosted(c) => {
                let mut c = c.clone();
                c.seed = seed;
                TrainerConfig::Boosted(c)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features tried per split; `None` means `round(sqrt(p))`.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 8,
            mtry: None,
            min_leaf: 2,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostConfig {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// L2 regularization on leaf values.
    pub lambda: f64,
    pub min_child_weight: f64,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            n_rounds: 300,
            max_depth: 4,
            learning_rate: 0.1,
            lambda: 1.0,
            min_child_weight: 1.0,
            seed: 42,
        }
    }
}

/// Trains on dense rows with the selected learner.
pub fn train(
    x: &[Vec<f64>],
    y: &[bool],
    feature_names: &[String],
    cfg: &TrainerConfig,
) -> Result<TreeEnsemble> {
    match cfg {
        TrainerConfig::Forest(c) => train_forest(x, y, feature_names, c),
        TrainerConfig::Boosted(c) => train_boosted(x, y, feature_names, c),
    }
}

/// Trains straight from a feature matrix, imputing missing cells with the
/// matrix's own column medians.
pub fn train_matrix(m: &FeatureMatrix, cfg: &TrainerConfig) -> Result<TreeEnsemble> {
    let medians = m.column_medians();
    let x = m.imputed_rows(&medians);
    train(&x, &m.labels(), &m.feature_names, cfg)
}

pub(crate) fn check_labels(y: &[bool]) -> Result<()> {
    if y.len() < 2 {
        return Err(Error::DegenerateLabels("fewer than 2 rows".into()));
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::DegenerateLabels(
            "training labels contain a single class".into(),
        ));
    }
    Ok(())
}

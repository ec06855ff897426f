//! Exact Shapley attribution for tree ensembles and its aggregates.
//!
//! Attribution happens in margin space: the pre-sigmoid log-odds for
//! boosted models, the mean leaf fraction for forests. For every instance,
//! `base_value + sum(phi)` equals the margin (local accuracy), with
//! `base_value` the cover-weighted expected margin of the model.

mod brute;
mod curve;
mod treeshap;

pub use brute::{brute_force_phi, conditional_expectation, BRUTE_FORCE_MAX_FEATURES};
pub use curve::{curve_to_tsv, shap_validation_curve, CurvePoint};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::TreeEnsemble;

/// Per-instance attribution: `base_value + sum(phi)` equals the model
/// margin for the instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapAttribution {
    pub instance_id: String,
    pub base_value: f64,
    /// One value per model feature, in model feature order.
    pub phi: Vec<f64>,
}

impl ShapAttribution {
    pub fn sum_phi(&self) -> f64 {
        self.phi.iter().sum()
    }
}

/// Features ranked by mean absolute attribution, descending; ties break by
/// feature name so the ranking is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub ranked: Vec<(String, f64)>,
}

impl GlobalImportance {
    pub fn names(&self) -> Vec<String> {
        self.ranked.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn top(&self, k: usize) -> Vec<String> {
        self.ranked.iter().take(k).map(|(n, _)| n.clone()).collect()
    }
}

/// Path-dependent TreeSHAP over the whole ensemble.
pub fn tree_shap(model: &TreeEnsemble, x: &[f64], instance_id: &str) -> Result<ShapAttribution> {
    validate(model, x)?;
    let p = model.feature_names.len();
    let mut phi = vec![0.0; p];
    let weights = model.margin_weights();
    for (tree, w) in model.trees.iter().zip(&weights) {
        let mut tree_phi = vec![0.0; p];
        treeshap::tree_shap(tree, x, &mut tree_phi);
        for (acc, v) in phi.iter_mut().zip(&tree_phi) {
            *acc += w * v;
        }
    }
    Ok(ShapAttribution {
        instance_id: instance_id.to_string(),
        base_value: model.expected_margin(),
        phi,
    })
}

/// Exhaustive-coalition Shapley values; the oracle counterpart of
/// [`tree_shap`]. Limited to models with at most
/// [`BRUTE_FORCE_MAX_FEATURES`] features.
pub fn brute_force_shap(
    model: &TreeEnsemble,
    x: &[f64],
    instance_id: &str,
) -> Result<ShapAttribution> {
    validate(model, x)?;
    if model.feature_names.len() > BRUTE_FORCE_MAX_FEATURES {
        return Err(Error::TooLarge(format!(
            "{} features exceeds the 2^p enumeration limit of {BRUTE_FORCE_MAX_FEATURES}",
            model.feature_names.len()
        )));
    }
    Ok(ShapAttribution {
        instance_id: instance_id.to_string(),
        base_value: model.expected_margin(),
        phi: brute_force_phi(model, x),
    })
}

fn validate(model: &TreeEnsemble, x: &[f64]) -> Result<()> {
    if x.len() != model.feature_names.len() {
        return Err(Error::Schema(format!(
            "row has {} features, model expects {}",
            x.len(),
            model.feature_names.len()
        )));
    }
    for tree in &model.trees {
        if tree
            .nodes
            .iter()
            .any(|n| !n.cover().is_finite() || n.cover() <= 0.0)
        {
            return Err(Error::ModelUnsupported(
                "attribution needs a positive cover at every node".into(),
            ));
        }
    }
    Ok(())
}

/// Mean absolute attribution per feature across instances, ranked.
pub fn global_importance(
    attributions: &[ShapAttribution],
    feature_names: &[String],
) -> Result<GlobalImportance> {
    if attributions.is_empty() {
        return Err(Error::InvalidArgument("no attributions".into()));
    }
    let p = feature_names.len();
    if attributions.iter().any(|a| a.phi.len() != p) {
        return Err(Error::Schema(
            "attribution length does not match feature list".into(),
        ));
    }
    let mut mean_abs = vec![0.0; p];
    for a in attributions {
        for (m, v) in mean_abs.iter_mut().zip(&a.phi) {
            *m += v.abs();
        }
    }
    for m in &mut mean_abs {
        *m /= attributions.len() as f64;
    }
    let mut ranked: Vec<(String, f64)> = feature_names
        .iter()
        .cloned()
        .zip(mean_abs)
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(GlobalImportance { ranked })
}

/// Attribution table as CSV: `id,base,<feature...>` with one row per
/// instance.
pub fn attributions_to_csv(
    attributions: &[ShapAttribution],
    feature_names: &[String],
) -> String {
    let mut out = String::from("id,base");
    for n in feature_names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for a in attributions {
        out.push_str(&a.instance_id);
        out.push_str(&format!(",{:.16e}", a.base_value));
        for v in &a.phi {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push('\n');
    }
    out
}

/// Importance report serialized with a version tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub version: String,
    pub fingerprint: String,
    pub seed: u64,
    pub importance: Vec<ImportanceEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub mean_abs_phi: f64,
}

impl ImportanceReport {
    pub fn new(importance: &GlobalImportance, fingerprint: &str, seed: u64) -> Self {
        Self {
            version: "importance/1".into(),
            fingerprint: fingerprint.to_string(),
            seed,
            importance: importance
                .ranked
                .iter()
                .map(|(feature, mean_abs_phi)| ImportanceEntry {
                    feature: feature.clone(),
                    mean_abs_phi: *mean_abs_phi,
                })
                .collect(),
        }
    }
}

/// Random small trees and ensembles for the equivalence sweeps; used by the
/// unit, property, and acceptance tests.
#[doc(hidden)]
pub mod test_support {
    use rand::Rng;

    use crate::learn::{DecisionTree, ModelKind, Node, TreeEnsemble};

    /// A random binary tree with consistent covers.
    pub fn random_tree<R: Rng>(rng: &mut R, n_features: usize, max_depth: usize) -> DecisionTree {
        let mut tree = DecisionTree::default();
        let cover = rng.gen_range(20.0..120.0);
        build(rng, &mut tree, n_features, max_depth, 0, cover);
        tree
    }

    fn build<R: Rng>(
        rng: &mut R,
        tree: &mut DecisionTree,
        n_features: usize,
        max_depth: usize,
        depth: usize,
        cover: f64,
    ) -> usize {
        let leaf = depth >= max_depth || rng.gen_bool(0.3) || cover < 2.0;
        if leaf {
            tree.nodes.push(Node::Leaf {
                value: rng.gen_range(-3.0..3.0),
                cover,
            });
            return tree.nodes.len() - 1;
        }
        let split = rng.gen_range(0.2..0.8);
        let cl = (cover * split).max(1.0);
        let cr = (cover - cl).max(1.0);
        let me = tree.nodes.len();
        tree.nodes.push(Node::Split {
            feature: rng.gen_range(0..n_features),
            threshold: rng.gen_range(-1.0..1.0),
            left: 0,
            right: 0,
            cover: cl + cr,
        });
        let l = build(rng, tree, n_features, max_depth, depth + 1, cl);
        let r = build(rng, tree, n_features, max_depth, depth + 1, cr);
        if let Node::Split { left, right, .. } = &mut tree.nodes[me] {
            *left = l;
            *right = r;
        }
        me
    }

    /// A random ensemble of either kind with covers at every node.
    pub fn random_ensemble<R: Rng>(
        rng: &mut R,
        n_features: usize,
        max_depth: usize,
        max_trees: usize,
    ) -> TreeEnsemble {
        let n_trees = rng.gen_range(1..=max_trees);
        let kind = if rng.gen_bool(0.5) {
            ModelKind::Forest
        } else {
            ModelKind::Boosted
        };
        let trees: Vec<DecisionTree> = (0..n_trees)
            .map(|_| random_tree(rng, n_features, max_depth))
            .collect();
        let tree_weights = match kind {
            ModelKind::Forest => vec![1.0; n_trees],
            ModelKind::Boosted => vec![rng.gen_range(0.05..0.5); n_trees],
        };
        TreeEnsemble {
            kind,
            base_score: if matches!(kind, ModelKind::Boosted) {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            },
            feature_names: (0..n_features).map(|i| format!("f{i}")).collect(),
            trees,
            tree_weights,
        }
    }
}

/// Ordered map used by the report types for deterministic serialization.
pub type ScoreMap = BTreeMap<String, f64>;

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fast_path_matches_brute_force_on_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for trial in 0..100 {
            let model = test_support::random_ensemble(&mut rng, 4, 3, 5);
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let fast = tree_shap(&model, &x, "i").unwrap();
            let brute = brute_force_shap(&model, &x, "i").unwrap();
            for (a, b) in fast.phi.iter().zip(&brute.phi) {
                assert!((a - b).abs() <= 1e-9, "trial {trial}: {a} vs {b}");
            }
            assert!((fast.base_value - brute.base_value).abs() <= 1e-9);
        }
    }

    #[test]
    fn local_accuracy_on_fuzzed_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let model = test_support::random_ensemble(&mut rng, 6, 4, 6);
            for _ in 0..10 {
                let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let a = tree_shap(&model, &x, "i").unwrap();
                let margin = model.margin(&x);
                assert!(
                    (a.base_value + a.sum_phi() - margin).abs() <= 1e-9,
                    "{} + {} != {margin}",
                    a.base_value,
                    a.sum_phi()
                );
            }
        }
    }

    #[test]
    fn importance_takes_abs_before_mean() {
        let names = vec!["a".to_string(), "b".to_string()];
        let attributions = vec![
            ShapAttribution {
                instance_id: "1".into(),
                base_value: 0.0,
                phi: vec![2.0, 0.5],
            },
            ShapAttribution {
                instance_id: "2".into(),
                base_value: 0.0,
                phi: vec![-2.0, 0.5],
            },
        ];
        let imp = global_importance(&attributions, &names).unwrap();
        assert_eq!(imp.ranked[0], ("a".to_string(), 2.0));
        assert_eq!(imp.ranked[1], ("b".to_string(), 0.5));
    }

    #[test]
    fn importance_hand_sum_three_by_three() {
        let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let attributions = vec![
            ShapAttribution {
                instance_id: "1".into(),
                base_value: 0.0,
                phi: vec![1.0, -4.0, 0.0],
            },
            ShapAttribution {
                instance_id: "2".into(),
                base_value: 0.0,
                phi: vec![2.0, 5.0, 0.0],
            },
            ShapAttribution {
                instance_id: "3".into(),
                base_value: 0.0,
                phi: vec![-3.0, -6.0, 0.0],
            },
        ];
        let imp = global_importance(&attributions, &names).unwrap();
        // means: a = 2, b = 5, c = 0
        assert_eq!(imp.ranked[0], ("b".to_string(), 5.0));
        assert_eq!(imp.ranked[1], ("a".to_string(), 2.0));
        assert_eq!(imp.ranked[2], ("c".to_string(), 0.0));
    }

    #[test]
    fn all_zero_attributions_rank_by_name() {
        let names = vec!["z".to_string(), "a".to_string()];
        let attributions = vec![ShapAttribution {
            instance_id: "1".into(),
            base_value: 0.0,
            phi: vec![0.0, 0.0],
        }];
        let imp = global_importance(&attributions, &names).unwrap();
        assert_eq!(imp.names(), vec!["a".to_string(), "z".to_string()]);
    }

    #[test]
    fn importance_argmax_stable_under_instance_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let names: Vec<String> = (0..5).map(|i| format!("f{i}")).collect();
        let mut attributions: Vec<ShapAttribution> = (0..40)
            .map(|i| ShapAttribution {
                instance_id: format!("r{i}"),
                base_value: 0.0,
                phi: (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            })
            .collect();
        let first = global_importance(&attributions, &names).unwrap();
        attributions.reverse();
        let second = global_importance(&attributions, &names).unwrap();
        assert_eq!(first.ranked[0].0, second.ranked[0].0);
    }

    #[test]
    fn too_many_features_for_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = test_support::random_ensemble(&mut rng, 16, 2, 2);
        let x = vec![0.0; 16];
        assert!(matches!(
            brute_force_shap(&model, &x, "i"),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn zero_cover_is_model_unsupported() {
        use crate::learn::{DecisionTree, ModelKind, Node};
        let model = TreeEnsemble {
            kind: ModelKind::Forest,
            base_score: 0.0,
            feature_names: vec!["a".into()],
            trees: vec![DecisionTree {
                nodes: vec![
                    Node::Split {
                        feature: 0,
                        threshold: 0.0,
                        left: 1,
                        right: 2,
                        cover: 0.0,
                    },
                    Node::Leaf {
                        value: 0.0,
                        cover: 0.0,
                    },
                    Node::Leaf {
                        value: 1.0,
                        cover: 0.0,
                    },
                ],
            }],
            tree_weights: vec![1.0],
        };
        assert!(matches!(
            tree_shap(&model, &[0.5], "i"),
            Err(Error::ModelUnsupported(_))
        ));
    }
}

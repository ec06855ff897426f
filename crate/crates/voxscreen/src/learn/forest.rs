//! Bagged random forest with Gini splits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::derive_seed;
use crate::error::Result;
use crate::learn::split::best_gini_split;
use crate::learn::{check_labels, DecisionTree, ForestConfig, ModelKind, Node, TreeEnsemble};

/// Trains a random forest.
///
/// Each tree sees a bootstrap resample of the rows and tries
/// `mtry` (default `round(sqrt(p))`) features per split. Leaves hold the
/// class-1 fraction of their bootstrap samples, so the ensemble mean is
/// already a probability. Per-tree RNG streams derive from
/// `(seed, tree index)`, making the result independent of build order.
pub fn train_forest(
    x: &[Vec<f64>],
    y: &[bool],
    feature_names: &[String],
    cfg: &ForestConfig,
) -> Result<TreeEnsemble> {
    check_labels(y)?;
    let p = feature_names.len();
    let mtry = cfg.mtry.unwrap_or_else(|| ((p as f64).sqrt().round() as usize).clamp(1, p));

    let mut trees = Vec::with_capacity(cfg.n_trees);
    for t in 0..cfg.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, t as u64));
        let idx: Vec<usize> = (0..x.len()).map(|_| rng.gen_range(0..x.len())).collect();
        let mut tree = DecisionTree::default();
        grow(&mut tree, x, y, idx, 0, cfg, mtry, p, &mut rng);
        trees.push(tree);
    }

    Ok(TreeEnsemble {
        kind: ModelKind::Forest,
        base_score: 0.0,
        feature_names: feature_names.to_vec(),
        tree_weights: vec![1.0; trees.len()],
        trees,
    })
}

#[allow(clippy::too_many_arguments)]
fn grow(
    tree: &mut DecisionTree,
    x: &[Vec<f64>],
    y: &[bool],
    idx: Vec<usize>,
    depth: usize,
    cfg: &ForestConfig,
    mtry: usize,
    p: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    let cover = idx.len() as f64;
    let pos = idx.iter().filter(|&&i| y[i]).count();
    let make_leaf = |tree: &mut DecisionTree| {
        tree.nodes.push(Node::Leaf {
            value: pos as f64 / cover,
            cover,
        });
        tree.nodes.len() - 1
    };

    if depth >= cfg.max_depth || pos == 0 || pos == idx.len() || idx.len() < 2 * cfg.min_leaf {
        return make_leaf(tree);
    }

    let features = sample_features(rng, p, mtry);
    let split = match best_gini_split(x, y, &idx, &features, cfg.min_leaf) {
        Some(s) => s,
        None => return make_leaf(tree),
    };

    let me = tree.nodes.len();
    tree.nodes.push(Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
        cover,
    });
    let left = grow(tree, x, y, split.left, depth + 1, cfg, mtry, p, rng);
    let right = grow(tree, x, y, split.right, depth + 1, cfg, mtry, p, rng);
    if let Node::Split {
        left: l, right: r, ..
    } = &mut tree.nodes[me]
    {
        *l = left;
        *r = right;
    }
    me
}

/// `mtry` distinct feature indices, returned sorted so the split search
/// visits them in canonical order.
fn sample_features(rng: &mut ChaCha8Rng, p: usize, mtry: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..p).collect();
    let mut picked = Vec::with_capacity(mtry);
    for _ in 0..mtry.min(p) {
        let j = rng.gen_range(0..pool.len());
        picked.push(pool.swap_remove(j));
    }
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::learn::model_to_json;

    fn separable_1d(n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
        let x: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![(i as f64 / n as f64) * 4.0 - 2.0])
            .collect();
        let y: Vec<bool> = x.iter().map(|r| r[0] > 0.0).collect();
        (x, y)
    }

    #[test]
    fn separable_data_trains_to_high_accuracy() {
        let (x, y) = separable_1d(100);
        let cfg = ForestConfig {
            n_trees: 50,
            ..Default::default()
        };
        let model = train_forest(&x, &y, &["x".to_string()], &cfg).unwrap();
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(r, &label)| (model.predict_proba(r).unwrap() >= 0.5) == label)
            .count();
        assert!(correct as f64 / x.len() as f64 >= 0.99);
    }

    #[test]
    fn single_class_errors() {
        let x = vec![vec![1.0], vec![2.0]];
        let y = vec![true, true];
        assert!(matches!(
            train_forest(&x, &y, &["x".to_string()], &ForestConfig::default()),
            Err(Error::DegenerateLabels(_))
        ));
    }

    #[test]
    fn same_seed_identical_serialization() {
        let (x, y) = separable_1d(60);
        let cfg = ForestConfig {
            n_trees: 20,
            ..Default::default()
        };
        let a = train_forest(&x, &y, &["x".to_string()], &cfg).unwrap();
        let b = train_forest(&x, &y, &["x".to_string()], &cfg).unwrap();
        assert_eq!(model_to_json(&a), model_to_json(&b));
    }

    #[test]
    fn covers_are_consistent() {
        let (x, y) = separable_1d(80);
        let model =
            train_forest(&x, &y, &["x".to_string()], &ForestConfig::default()).unwrap();
        for t in &model.trees {
            assert!(t.covers_consistent());
        }
    }

    #[test]
    fn predictions_invariant_to_tree_order() {
        let (x, y) = separable_1d(80);
        let model =
            train_forest(&x, &y, &["x".to_string()], &ForestConfig::default()).unwrap();
        let mut reversed = model.clone();
        reversed.trees.reverse();
        for r in &x {
            assert_eq!(
                model.predict_proba(r).unwrap(),
                reversed.predict_proba(r).unwrap()
            );
        }
    }
}

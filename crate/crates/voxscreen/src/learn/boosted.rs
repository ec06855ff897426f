//! Gradient boosting on the logistic loss with second-order splits.

use crate::error::Result;
use crate::learn::split::best_gradient_split;
use crate::learn::{check_labels, sigmoid, BoostConfig, DecisionTree, ModelKind, Node, TreeEnsemble};

/// Trains a boosted tree model.
///
/// The base score is the log-odds of the class prior. Each round fits a
/// regression tree to the gradient/hessian pairs of the logistic loss,
/// with split gain
/// `[G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)] / 2`
/// and leaf value `-G/(H+l)`; the running margins advance by
/// `learning_rate` times the tree output.
pub fn train_boosted(
    x: &[Vec<f64>],
    y: &[bool],
    feature_names: &[String],
    cfg: &BoostConfig,
) -> Result<TreeEnsemble> {
    check_labels(y)?;
    let n = x.len();
    let pos = y.iter().filter(|&&v| v).count() as f64;
    let base_score = (pos / (n as f64 - pos)).ln();

    let mut margins = vec![base_score; n];
    let mut trees = Vec::with_capacity(cfg.n_rounds);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];

    for _ in 0..cfg.n_rounds {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            grad[i] = p - if y[i] { 1.0 } else { 0.0 };
            hess[i] = p * (1.0 - p);
        }
        let mut tree = DecisionTree::default();
        let idx: Vec<usize> = (0..n).collect();
        grow(&mut tree, x, &grad, &hess, idx, 0, cfg, feature_names.len());
        for (i, m) in margins.iter_mut().enumerate() {
            *m += cfg.learning_rate * tree.predict(&x[i]);
        }
        trees.push(tree);
    }

    Ok(TreeEnsemble {
        kind: ModelKind::Boosted,
        base_score,
        feature_names: feature_names.to_vec(),
        tree_weights: vec![cfg.learning_rate; trees.len()],
        trees,
    })
}

#[allow(clippy::too_many_arguments)]
fn grow(
    tree: &mut DecisionTree,
    x: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    idx: Vec<usize>,
    depth: usize,
    cfg: &BoostConfig,
    n_features: usize,
) -> usize {
    let cover = idx.len() as f64;
    let g: f64 = idx.iter().map(|&i| grad[i]).sum();
    let h: f64 = idx.iter().map(|&i| hess[i]).sum();
    let make_leaf = |tree: &mut DecisionTree| {
        tree.nodes.push(Node::Leaf {
            value: -g / (h + cfg.lambda),
            cover,
        });
        tree.nodes.len() - 1
    };

    if depth >= cfg.max_depth || idx.len() < 2 {
        return make_leaf(tree);
    }
    let split = match best_gradient_split(
        x,
        grad,
        hess,
        &idx,
        n_features,
        cfg.lambda,
        cfg.min_child_weight,
    ) {
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
    let left = grow(tree, x, grad, hess, split.left, depth + 1, cfg, n_features);
    let right = grow(tree, x, grad, hess, split.right, depth + 1, cfg, n_features);
    if let Node::Split {
        left: l, right: r, ..
    } = &mut tree.nodes[me]
    {
        *l = left;
        *r = right;
    }
    me
}

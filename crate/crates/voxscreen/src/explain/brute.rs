//! Exhaustive-coalition Shapley oracle.
//!
//! Enumerates every coalition of features and averages marginal
//! contributions with the exact Shapley weights. Conditional expectations
//! use the same cover-weighted traversal semantics as the fast path, so
//! the two routes must agree to numerical precision.

use crate::learn::{DecisionTree, Node, TreeEnsemble};

/// Maximum feature count for the `2^p` enumeration.
pub const BRUTE_FORCE_MAX_FEATURES: usize = 15;

/// Exact Shapley values of the ensemble margin by coalition enumeration.
///
/// `phi[f] = sum over S not containing f of
///  |S|! (p - |S| - 1)! / p! * (v(S + f) - v(S))`,
/// with `v(S)` the cover-weighted conditional expectation of the margin.
pub fn brute_force_phi(model: &TreeEnsemble, x: &[f64]) -> Vec<f64> {
    let p = model.feature_names.len();
    let weights = model.margin_weights();

    // v(S) per coalition mask, summed over weighted trees
    let mut v = vec![0.0f64; 1 << p];
    for (tree, w) in model.trees.iter().zip(&weights) {
        for (mask, value) in v.iter_mut().enumerate() {
            *value += w * conditional_expectation(tree, 0, x, mask as u32);
        }
    }

    // Shapley weights by coalition size
    let factorial = |n: usize| -> f64 { (1..=n).map(|k| k as f64).product::<f64>().max(1.0) };
    let weight_by_size: Vec<f64> = (0..p)
        .map(|s| factorial(s) * factorial(p - s - 1) / factorial(p))
        .collect();

    let mut phi = vec![0.0; p];
    for f in 0..p {
        let bit = 1u32 << f;
        for mask in 0..(1u32 << p) {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            phi[f] += weight_by_size[s] * (v[(mask | bit) as usize] - v[mask as usize]);
        }
    }
    phi
}

/// Cover-weighted conditional expectation: features in the coalition follow
/// the decision path of `x`; the rest split by cover.
pub fn conditional_expectation(tree: &DecisionTree, node: usize, x: &[f64], coalition: u32) -> f64 {
    match &tree.nodes[node] {
        Node::Leaf { value, .. } => *value,
        Node::Split {
            feature,
            threshold,
            left,
            right,
            cover,
        } => {
            if coalition & (1u32 << feature) != 0 {
                let next = if x[*feature] < *threshold { *left } else { *right };
                conditional_expectation(tree, next, x, coalition)
            } else {
                let wl = tree.nodes[*left].cover() / cover;
                let wr = tree.nodes[*right].cover() / cover;
                wl * conditional_expectation(tree, *left, x, coalition)
                    + wr * conditional_expectation(tree, *right, x, coalition)
            }
        }
    }
}

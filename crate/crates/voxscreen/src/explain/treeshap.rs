//! Path-dependent TreeSHAP for a single tree.
//!
//! When the traversal reaches a node split on a feature already being
//! conditioned on, it simply follows the decision path; otherwise both
//! subtrees are visited and their results combine through cover-weighted
//! path fractions. The `extend`/`unwind` bookkeeping carries, for each
//! unique feature on the path, the fraction of coalitions flowing hot
//! (`one_fraction`) and cold (`zero_fraction`) plus the permutation weight
//! of each path prefix.

use crate::learn::{DecisionTree, Node};

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: Option<usize>,
    zero_fraction: f64,
    one_fraction: f64,
    pweight: f64,
}

/// Exact per-feature contributions of one tree to the margin of `x`,
/// relative to the tree's cover-weighted expectation.
pub fn tree_shap(tree: &DecisionTree, x: &[f64], phi: &mut [f64]) {
    recurse(tree, 0, x, Vec::new(), 1.0, 1.0, None, phi);
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: &DecisionTree,
    node: usize,
    x: &[f64],
    mut path: Vec<PathElement>,
    zero_fraction: f64,
    one_fraction: f64,
    feature: Option<usize>,
    phi: &mut [f64],
) {
    extend(&mut path, zero_fraction, one_fraction, feature);

    match &tree.nodes[node] {
        Node::Leaf { value, .. } => {
            for i in 1..path.len() {
                let w = unwound_sum(&path, i);
                let el = &path[i];
                phi[el.feature.expect("non-root path elements carry a feature")] +=
                    w * (el.one_fraction - el.zero_fraction) * value;
            }
        }
        Node::Split {
            feature: split_feature,
            threshold,
            left,
            right,
            cover,
        } => {
            let (hot, cold) = if x[*split_feature] < *threshold {
                (*left, *right)
            } else {
                (*right, *left)
            };
            let hot_zero = tree.nodes[hot].cover() / cover;
            let cold_zero = tree.nodes[cold].cover() / cover;

            // a repeated feature on the path is unwound and its fractions
            // fold into the new element
            let mut incoming_zero = 1.0;
            let mut incoming_one = 1.0;
            if let Some(k) = (1..path.len()).find(|&k| path[k].feature == Some(*split_feature)) {
                incoming_zero = path[k].zero_fraction;
                incoming_one = path[k].one_fraction;
                unwind(&mut path, k);
            }

            recurse(
                tree,
                hot,
                x,
                path.clone(),
                hot_zero * incoming_zero,
                incoming_one,
                Some(*split_feature),
                phi,
            );
            recurse(
                tree,
                cold,
                x,
                path,
                cold_zero * incoming_zero,
                0.0,
                Some(*split_feature),
                phi,
            );
        }
    }
}

fn extend(path: &mut Vec<PathElement>, zero_fraction: f64, one_fraction: f64, feature: Option<usize>) {
    let depth = path.len();
    path.push(PathElement {
        feature,
        zero_fraction,
        one_fraction,
        pweight: if depth == 0 { 1.0 } else { 0.0 },
    });
    for i in (0..depth).rev() {
        path[i + 1].pweight +=
            one_fraction * path[i].pweight * (i + 1) as f64 / (depth + 1) as f64;
        path[i].pweight = zero_fraction * path[i].pweight * (depth - i) as f64 / (depth + 1) as f64;
    }
}

/// Removes element `k`, redistributing its fractions out of the prefix
/// weights.
fn unwind(path: &mut Vec<PathElement>, k: usize) {
    let depth = path.len() - 1;
    let one_fraction = path[k].one_fraction;
    let zero_fraction = path[k].zero_fraction;
    let mut next = path[depth].pweight;

    for i in (0..depth).rev() {
        if one_fraction != 0.0 {
            let tmp = path[i].pweight;
            path[i].pweight = next * (depth + 1) as f64 / ((i + 1) as f64 * one_fraction);
            next = tmp - path[i].pweight * zero_fraction * (depth - i) as f64 / (depth + 1) as f64;
        } else {
            path[i].pweight =
                path[i].pweight * (depth + 1) as f64 / (zero_fraction * (depth - i) as f64);
        }
    }
    for i in k..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
    path.pop();
}

/// Total weight the path would have if element `k` were unwound, without
/// mutating it.
fn unwound_sum(path: &[PathElement], k: usize) -> f64 {
    let depth = path.len() - 1;
    let one_fraction = path[k].one_fraction;
    let zero_fraction = path[k].zero_fraction;
    let mut next = path[depth].pweight;
    let mut total = 0.0;

    if one_fraction != 0.0 {
        for i in (0..depth).rev() {
            let tmp = next / ((i + 1) as f64 * one_fraction);
            total += tmp;
            next = path[i].pweight - tmp * zero_fraction * (depth - i) as f64;
        }
    } else {
        for i in (0..depth).rev() {
            total += path[i].pweight / (zero_fraction * (depth - i) as f64);
        }
    }
    total * (depth + 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::Node;

    fn depth1_tree(cover_left: f64, cover_right: f64, v_left: f64, v_right: f64) -> DecisionTree {
        DecisionTree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                    cover: cover_left + cover_right,
                },
                Node::Leaf {
                    value: v_left,
                    cover: cover_left,
                },
                Node::Leaf {
                    value: v_right,
                    cover: cover_right,
                },
            ],
        }
    }

    #[test]
    fn leaf_only_tree_attributes_nothing() {
        let tree = DecisionTree {
            nodes: vec![Node::Leaf {
                value: 3.25,
                cover: 7.0,
            }],
        };
        let mut phi = vec![0.0; 2];
        tree_shap(&tree, &[1.0, 2.0], &mut phi);
        assert_eq!(phi, vec![0.0, 0.0]);
    }

    #[test]
    fn depth1_tree_matches_two_coalition_shapley() {
        // covers 30/70, values 10/100; x goes right.
        // E = 0.3*10 + 0.7*100 = 73; phi_0 = f(x) - E = 27
        let tree = depth1_tree(30.0, 70.0, 10.0, 100.0);
        let mut phi = vec![0.0; 1];
        tree_shap(&tree, &[0.9], &mut phi);
        assert!((phi[0] - 27.0).abs() < 1e-12, "{}", phi[0]);

        // x goes left: phi_0 = 10 - 73 = -63
        let mut phi = vec![0.0; 1];
        tree_shap(&tree, &[0.1], &mut phi);
        assert!((phi[0] + 63.0).abs() < 1e-12);
    }

    #[test]
    fn dummy_feature_gets_exact_zero() {
        let tree = depth1_tree(50.0, 50.0, -1.0, 1.0);
        let mut phi = vec![0.0; 3];
        tree_shap(&tree, &[0.9, 123.0, -5.0], &mut phi);
        assert_eq!(phi[1], 0.0);
        assert_eq!(phi[2], 0.0);
    }

    #[test]
    fn symmetric_features_share_credit() {
        // x0 and x1 play identical roles in a mirrored depth-2 tree
        let tree = DecisionTree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.0,
                    left: 1,
                    right: 2,
                    cover: 100.0,
                },
                Node::Split {
                    feature: 1,
                    threshold: 0.0,
                    left: 3,
                    right: 4,
                    cover: 50.0,
                },
                Node::Split {
                    feature: 1,
                    threshold: 0.0,
                    left: 5,
                    right: 6,
                    cover: 50.0,
                },
                Node::Leaf {
                    value: 0.0,
                    cover: 25.0,
                },
                Node::Leaf {
                    value: 1.0,
                    cover: 25.0,
                },
                Node::Leaf {
                    value: 1.0,
                    cover: 25.0,
                },
                Node::Leaf {
                    value: 2.0,
                    cover: 25.0,
                },
            ],
        };
        let mut phi = vec![0.0; 2];
        tree_shap(&tree, &[1.0, 1.0], &mut phi);
        assert!((phi[0] - phi[1]).abs() < 1e-12, "{phi:?}");
    }
}

//! Model file format: `voxscreen-model/1`.
//!
//! Trees are stored as parallel node arrays. Leaves carry `feature = -1`
//! and child indices `-1`; field order is fixed so identical models
//! serialize byte-identically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{DecisionTree, ModelKind, Node, TreeEnsemble};

pub const MODEL_VERSION: &str = "voxscreen-model/1";

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: String,
    kind: ModelKind,
    base_score: f64,
    feature_names: Vec<String>,
    tree_weights: Vec<f64>,
    trees: Vec<TreeFile>,
    /// Pipeline-config fingerprint, set by the CLI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fingerprint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    feature: Vec<i64>,
    threshold: Vec<f64>,
    left: Vec<i64>,
    right: Vec<i64>,
    value: Vec<f64>,
    cover: Vec<f64>,
}

/// Serializes a model to its canonical JSON string.
pub fn model_to_json(model: &TreeEnsemble) -> String {
    model_to_json_with_meta(model, None, None)
}

/// Serialization with the run metadata the CLI embeds in every output.
pub fn model_to_json_with_meta(
    model: &TreeEnsemble,
    fingerprint: Option<&str>,
    seed: Option<u64>,
) -> String {
    let trees = model
        .trees
        .iter()
        .map(|t| {
            let n = t.nodes.len();
            let mut f = TreeFile {
                feature: Vec::with_capacity(n),
                threshold: Vec::with_capacity(n),
                left: Vec::with_capacity(n),
                right: Vec::with_capacity(n),
                value: Vec::with_capacity(n),
                cover: Vec::with_capacity(n),
            };
            for node in &t.nodes {
                match node {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                        cover,
                    } => {
                        f.feature.push(*feature as i64);
                        f.threshold.push(*threshold);
                        f.left.push(*left as i64);
                        f.right.push(*right as i64);
                        f.value.push(0.0);
                        f.cover.push(*cover);
                    }
                    Node::Leaf { value, cover } => {
                        f.feature.push(-1);
                        f.threshold.push(0.0);
                        f.left.push(-1);
                        f.right.push(-1);
                        f.value.push(*value);
                        f.cover.push(*cover);
                    }
                }
            }
            f
        })
        .collect();

    let file = ModelFile {
        version: MODEL_VERSION.to_string(),
        kind: model.kind,
        base_score: model.base_score,
        feature_names: model.feature_names.clone(),
        tree_weights: model.tree_weights.clone(),
        trees,
        fingerprint: fingerprint.map(str::to_string),
        seed,
    };
    serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
}

/// Parses a model back from JSON, validating structure.
pub fn model_from_json(json: &str) -> Result<TreeEnsemble> {
    let file: ModelFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    if file.version != MODEL_VERSION {
        return Err(Error::Schema(format!(
            "model version {:?}, expected {MODEL_VERSION:?}",
            file.version
        )));
    }
    if file.tree_weights.len() != file.trees.len() {
        return Err(Error::Schema(format!(
            "{} weights for {} trees",
            file.tree_weights.len(),
            file.trees.len()
        )));
    }
    let mut trees = Vec::with_capacity(file.trees.len());
    for (ti, t) in file.trees.iter().enumerate() {
        let n = t.feature.len();
        if [
            t.threshold.len(),
            t.left.len(),
            t.right.len(),
            t.value.len(),
            t.cover.len(),
        ]
        .iter()
        .any(|&l| l != n)
        {
            return Err(Error::Schema(format!("tree {ti}: ragged node arrays")));
        }
        if n == 0 {
            return Err(Error::Schema(format!("tree {ti}: empty")));
        }
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            if t.feature[i] < 0 {
                nodes.push(Node::Leaf {
                    value: t.value[i],
                    cover: t.cover[i],
                });
            } else {
                let (l, r) = (t.left[i], t.right[i]);
                if l < 0 || r < 0 || l as usize >= n || r as usize >= n {
                    return Err(Error::Schema(format!(
                        "tree {ti}: node {i} has bad children {l}, {r}"
                    )));
                }
                nodes.push(Node::Split {
                    feature: t.feature[i] as usize,
                    threshold: t.threshold[i],
                    left: l as usize,
                    right: r as usize,
                    cover: t.cover[i],
                });
            }
        }
        trees.push(DecisionTree { nodes });
    }
    Ok(TreeEnsemble {
        kind: file.kind,
        base_score: file.base_score,
        feature_names: file.feature_names,
        tree_weights: file.tree_weights,
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{train_boosted, train_forest, BoostConfig, ForestConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<bool> = x.iter().map(|r: &Vec<f64>| r[0] + r[1] > 0.1).collect();
        (x, y)
    }

    #[test]
    fn roundtrip_predicts_identically_on_1000_rows() {
        let (x, y) = data(80, 1);
        let names: Vec<String> = (0..3).map(|i| format!("f{i}")).collect();
        for model in [
            train_forest(
                &x,
                &y,
                &names,
                &ForestConfig {
                    n_trees: 25,
                    ..Default::default()
                },
            )
            .unwrap(),
            train_boosted(
                &x,
                &y,
                &names,
                &BoostConfig {
                    n_rounds: 30,
                    ..Default::default()
                },
            )
            .unwrap(),
        ] {
            let json = model_to_json(&model);
            let back = model_from_json(&json).unwrap();
            assert_eq!(model, back);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..1000 {
                let r: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
                assert_eq!(
                    model.predict_proba(&r).unwrap(),
                    back.predict_proba(&r).unwrap()
                );
            }
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let (x, y) = data(30, 2);
        let names: Vec<String> = (0..3).map(|i| format!("f{i}")).collect();
        let model = train_forest(
            &x,
            &y,
            &names,
            &ForestConfig {
                n_trees: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let json = model_to_json(&model).replace("voxscreen-model/1", "voxscreen-model/9");
        assert!(matches!(model_from_json(&json), Err(Error::Schema(_))));
    }

    #[test]
    fn out_of_range_children_rejected() {
        let json = r#"{
            "version": "voxscreen-model/1",
            "kind": "forest",
            "base_score": 0.0,
            "feature_names": ["a"],
            "tree_weights": [1.0],
            "trees": [{
                "feature": [0, -1],
                "threshold": [0.5, 0.0],
                "left": [1, -1],
                "right": [7, -1],
                "value": [0.0, 1.0],
                "cover": [2.0, 2.0]
            }]
        }"#;
        assert!(matches!(model_from_json(json), Err(Error::Schema(_))));
    }

    #[test]
    fn serialization_is_byte_deterministic() {
        let (x, y) = data(50, 3);
        let names: Vec<String> = (0..3).map(|i| format!("f{i}")).collect();
        let cfg = BoostConfig {
            n_rounds: 10,
            ..Default::default()
        };
        let a = model_to_json(&train_boosted(&x, &y, &names, &cfg).unwrap());
        let b = model_to_json(&train_boosted(&x, &y, &names, &cfg).unwrap());
        assert_eq!(a, b);
    }
}

//! Exact greedy split search shared by both learners.
//!
//! Candidates are midpoints between consecutive distinct sorted values.
//! Ties in gain resolve to the lowest feature index, then the lowest
//! threshold, which pins down training byte-for-byte.

/// A chosen split with the sample partition it induces.
#[derive(Debug, Clone)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

/// Finds the best Gini split over `features` for the rows in `idx`.
///
/// A split is admissible when both children hold at least `min_leaf`
/// samples. Returns `None` when nothing improves on the parent impurity.
pub fn best_gini_split(
    x: &[Vec<f64>],
    y: &[bool],
    idx: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<Split> {
    let n = idx.len() as f64;
    let pos: usize = idx.iter().filter(|&&i| y[i]).count();
    let parent_gini = gini(pos as f64, n);
    let mut best: Option<Split> = None;

    for &f in features {
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_by(|&a, &b| x[a][f].partial_cmp(&x[b][f]).unwrap().then(a.cmp(&b)));

        let mut left_n = 0f64;
        let mut left_pos = 0f64;
        for cut in 1..order.len() {
            let prev = x[order[cut - 1]][f];
            left_n += 1.0;
            if y[order[cut - 1]] {
                left_pos += 1.0;
            }
            let here = x[order[cut]][f];
            if here <= prev {
                continue; // not a distinct-value boundary
            }
            if cut < min_leaf || order.len() - cut < min_leaf {
                continue;
            }
            let right_n = n - left_n;
            let right_pos = pos as f64 - left_pos;
            let weighted =
                (left_n * gini(left_pos, left_n) + right_n * gini(right_pos, right_n)) / n;
            let gain = parent_gini - weighted;
            if gain <= 1e-12 {
                continue;
            }
            let threshold = 0.5 * (prev + here);
            if better(gain, f, threshold, &best) {
                let (l, r) = partition(x, idx, f, threshold);
                best = Some(Split {
                    feature: f,
                    threshold,
                    gain,
                    left: l,
                    right: r,
                });
            }
        }
    }
    best
}

/// Finds the split maximizing the second-order gain
/// `[G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)] / 2`
/// over all features, requiring each child's hessian mass to reach
/// `min_child_weight`.
pub fn best_gradient_split(
    x: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    idx: &[usize],
    n_features: usize,
    lambda: f64,
    min_child_weight: f64,
) -> Option<Split> {
    let g_total: f64 = idx.iter().map(|&i| grad[i]).sum();
    let h_total: f64 = idx.iter().map(|&i| hess[i]).sum();
    let parent_score = g_total * g_total / (h_total + lambda);
    let mut best: Option<Split> = None;

    for f in 0..n_features {
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_by(|&a, &b| x[a][f].partial_cmp(&x[b][f]).unwrap().then(a.cmp(&b)));

        let mut gl = 0f64;
        let mut hl = 0f64;
        for cut in 1..order.len() {
            let prev = x[order[cut - 1]][f];
            gl += grad[order[cut - 1]];
            hl += hess[order[cut - 1]];
            let here = x[order[cut]][f];
            if here <= prev {
                continue;
            }
            let gr = g_total - gl;
            let hr = h_total - hl;
            if hl < min_child_weight || hr < min_child_weight {
                continue;
            }
            let gain = 0.5
                * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_score);
            if gain <= 1e-12 {
                continue;
            }
            let threshold = 0.5 * (prev + here);
            if better(gain, f, threshold, &best) {
                let (l, r) = partition(x, idx, f, threshold);
                best = Some(Split {
                    feature: f,
                    threshold,
                    gain,
                    left: l,
                    right: r,
                });
            }
        }
    }
    best
}

fn better(gain: f64, feature: usize, threshold: f64, best: &Option<Split>) -> bool {
    match best {
        None => true,
        Some(b) => {
            gain > b.gain
                || (gain == b.gain
                    && (feature < b.feature || (feature == b.feature && threshold < b.threshold)))
        }
    }
}

fn partition(x: &[Vec<f64>], idx: &[usize], feature: usize, threshold: f64) -> (Vec<usize>, Vec<usize>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &i in idx {
        if x[i][feature] < threshold {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    (left, right)
}

fn gini(pos: f64, n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

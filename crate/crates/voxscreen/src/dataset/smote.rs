//! Synthetic minority oversampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{FeatureMatrix, Label};
use crate::error::{Error, Result};

/// Oversamples the target class until the class counts are equal.
///
/// Every synthetic point lies on the segment between a minority row `x` and
/// one of its `k` nearest minority neighbours: `x + u * (nn - x)` with
/// `u ~ Uniform(0, 1)`. Neighbour distances are Euclidean over
/// median-imputed, z-scored features so Hz-scale pitch columns cannot
/// dominate; the synthetic rows themselves are interpolated in the original
/// feature space and are therefore complete (no missing values).
///
/// `k` is clamped to `minority - 1` when the class is smaller than `k + 1`.
/// Already-balanced input is returned unchanged. Deterministic given the
/// seed; synthetic rows are flagged in their metadata.
pub fn smote(m: &FeatureMatrix, k: usize, target: Label, seed: u64) -> Result<FeatureMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("smote needs k >= 1".into()));
    }
    let minority_idx: Vec<usize> = (0..m.n_rows())
        .filter(|&i| m.meta[i].label == target)
        .collect();
    let majority_count = m.n_rows() - minority_idx.len();
    if minority_idx.len() >= majority_count {
        return Ok(m.clone());
    }
    if minority_idx.len() < 2 {
        return Err(Error::CannotOversample(format!(
            "minority class has {} row(s), need at least 2",
            minority_idx.len()
        )));
    }
    let k = k.min(minority_idx.len() - 1);

    // distance space: median-imputed, z-scored copies of the minority rows
    let medians = m.column_medians();
    let dense: Vec<Vec<f64>> = m.imputed_rows(&medians);
    let p = m.n_features();
    let mut mean = vec![0.0; p];
    for r in &dense {
        for (a, v) in mean.iter_mut().zip(r) {
            *a += v;
        }
    }
    for a in &mut mean {
        *a /= dense.len() as f64;
    }
    let mut sd = vec![0.0; p];
    for r in &dense {
        for j in 0..p {
            sd[j] += (r[j] - mean[j]).powi(2);
        }
    }
    for s in &mut sd {
        *s = (*s / dense.len() as f64).sqrt();
        if *s <= 0.0 {
            *s = 1.0;
        }
    }
    let scaled: Vec<Vec<f64>> = minority_idx
        .iter()
        .map(|&i| (0..p).map(|j| (dense[i][j] - mean[j]) / sd[j]).collect())
        .collect();

    // k nearest minority neighbours per minority row
    let neighbours: Vec<Vec<usize>> = (0..scaled.len())
        .map(|a| {
            let mut by_dist: Vec<(f64, usize)> = (0..scaled.len())
                .filter(|&b| b != a)
                .map(|b| {
                    let d: f64 = scaled[a]
                        .iter()
                        .zip(&scaled[b])
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum();
                    (d, b)
                })
                .collect();
            by_dist.sort_by(|x, y| x.partial_cmp(y).unwrap());
            by_dist.into_iter().take(k).map(|(_, b)| b).collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = m.clone();
    let deficit = majority_count - minority_idx.len();
    for s in 0..deficit {
        let a = s % minority_idx.len();
        let b = neighbours[a][rng.gen_range(0..neighbours[a].len())];
        let u: f64 = rng.gen_range(0.0..1.0);
        let xa = &dense[minority_idx[a]];
        let xb = &dense[minority_idx[b]];
        let row: Vec<Option<f64>> = xa
            .iter()
            .zip(xb)
            .map(|(va, vb)| Some(va + u * (vb - va)))
            .collect();
        let mut meta = m.meta[minority_idx[a]].clone();
        meta.id = format!("{}-syn{}", meta.id, s);
        meta.synthetic = true;
        out.rows.push(row);
        out.meta.push(meta);
    }
    Ok(out)
}

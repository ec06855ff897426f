//! Correlation screen over feature columns.

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

/// Drops one feature of every pair whose Pearson correlation exceeds the
/// threshold.
///
/// Pairs are visited in canonical column order `(i, j)` with `i < j`; when
/// both are still alive and `|r| > threshold`, the later column `j` is
/// dropped. This makes the survivor set deterministic, and guarantees that
/// no surviving pair correlates above the threshold. Correlations are
/// computed over the rows where both values are present; constant columns
/// (undefined `r`) are treated as correlation zero and never dropped for
/// correlation.
pub fn prune_correlated(
    m: &FeatureMatrix,
    threshold: f64,
) -> Result<(FeatureMatrix, Vec<String>)> {
    if m.n_rows() < 2 {
        return Err(Error::InvalidArgument(
            "pruning needs at least 2 rows".into(),
        ));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be in (0, 1], got {threshold}"
        )));
    }

    let p = m.n_features();
    let mut alive = vec![true; p];
    let mut dropped = Vec::new();
    for i in 0..p {
        if !alive[i] {
            continue;
        }
        for j in i + 1..p {
            if !alive[j] {
                continue;
            }
            if pearson_abs(m, i, j) > threshold {
                alive[j] = false;
                dropped.push(m.feature_names[j].clone());
            }
        }
    }

    let keep: std::collections::BTreeSet<String> = m
        .feature_names
        .iter()
        .zip(&alive)
        .filter(|(_, &a)| a)
        .map(|(n, _)| n.clone())
        .collect();
    Ok((m.select_features(&keep), dropped))
}

/// |Pearson r| over rows where both columns are present; 0 when undefined.
pub fn pearson_abs(m: &FeatureMatrix, i: usize, j: usize) -> f64 {
    let pairs: Vec<(f64, f64)> = m
        .rows
        .iter()
        .filter_map(|r| match (r[i], r[j]) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        })
        .collect();
    if pairs.len() < 2 {
        return 0.0;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in pairs {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0; // constant column, r undefined
    }
    (sxy / (sxx * syy).sqrt()).abs()
}

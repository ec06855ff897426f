//! Pitch statistics and the jitter/shimmer perturbation families.
//!
//! Conventions fixed here and used throughout:
//! - standard deviations are population (divide by N);
//! - median of an even count averages the two middle values;
//! - differences and centered windows never cross a voiced-region boundary;
//! - `MedianJitter` divides by the median period (and `MedianShimmer` by the
//!   median amplitude).

use crate::error::{Error, Result};
use crate::pitch::{F0Track, PeriodMarks};

/// Mean, median, and population standard deviation of the voiced F0 values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchStats {
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
}

pub fn pitch_stats(track: &F0Track) -> Result<PitchStats> {
    let f0s = track.voiced_f0s();
    if f0s.is_empty() {
        return Err(Error::NoVoicedSpeech("no voiced frames".into()));
    }
    Ok(PitchStats {
        mean: mean(&f0s),
        median: median(&f0s),
        stddev: population_stddev(&f0s),
    })
}

/// The seven jitter statistics of a mark sequence.
///
/// All relative variants are dimensionless ratios; `local_absolute` is in
/// seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterFeatures {
    /// mean |T_i - T_{i-1}| / mean T
    pub local: f64,
    /// mean |T_i - T_{i-1}| in seconds
    pub local_absolute: f64,
    /// mean |T_i - avg(T_{i-1}..T_{i+1})| / mean T
    pub rap: f64,
    /// five-point period perturbation quotient
    pub ppq5: f64,
    /// mean |dT_{i+1} - dT_i| / mean T; equals 3 * rap identically
    pub ddp: f64,
    /// alias of `local`
    pub mean: f64,
    /// median |T_i - T_{i-1}| / median T
    pub median: f64,
}

const MIN_PERIODS: usize = 5;

pub fn jitter_features(marks: &PeriodMarks) -> Result<JitterFeatures> {
    if marks.len() < MIN_PERIODS {
        return Err(Error::InsufficientPeriods {
            needed: MIN_PERIODS,
            got: marks.len(),
        });
    }
    let t = &marks.periods;
    let mean_t = mean(t);
    let median_t = median(t);

    let diffs = region_diffs(t, marks);
    if diffs.is_empty() {
        return Err(Error::InsufficientPeriods {
            needed: MIN_PERIODS,
            got: marks.len(),
        });
    }
    let local_absolute = mean(&diffs);
    let local = local_absolute / mean_t;
    let median_jitter = median(&diffs) / median_t;

    let rap = perturbation_quotient(t, marks, 1) / mean_t;
    let ppq5 = perturbation_quotient(t, marks, 2) / mean_t;

    // mean |dT_{i+1} - dT_i| over the same interior points as rap
    let mut ddp_sum = 0.0;
    let mut ddp_n = 0usize;
    for r in marks.regions() {
        let seg = &t[r];
        for i in 1..seg.len().saturating_sub(1) {
            let d1 = seg[i] - seg[i - 1];
            let d2 = seg[i + 1] - seg[i];
            ddp_sum += (d2 - d1).abs();
            ddp_n += 1;
        }
    }
    let ddp = if ddp_n > 0 {
        ddp_sum / ddp_n as f64 / mean_t
    } else {
        0.0
    };

    Ok(JitterFeatures {
        local,
        local_absolute,
        rap,
        ppq5,
        ddp,
        mean: local,
        median: median_jitter,
    })
}

/// The eight shimmer statistics. `apq11` is `None` when fewer than eleven
/// cycles are available; it is written to the feature matrix as a missing
/// value and imputed at model time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShimmerFeatures {
    /// mean |A_i - A_{i-1}| / mean A
    pub local: f64,
    /// mean |20 log10(A_i / A_{i-1})| in dB
    pub local_db: f64,
    /// three-point amplitude perturbation quotient
    pub apq3: f64,
    /// five-point amplitude perturbation quotient
    pub apq5: f64,
    /// eleven-point amplitude perturbation quotient
    pub apq11: Option<f64>,
    /// 3 * apq3 identically
    pub dda: f64,
    /// alias of `local`
    pub mean: f64,
    /// median |A_i - A_{i-1}| / median A
    pub median: f64,
}

pub fn shimmer_features(marks: &PeriodMarks) -> Result<ShimmerFeatures> {
    if marks.len() < MIN_PERIODS {
        return Err(Error::InsufficientPeriods {
            needed: MIN_PERIODS,
            got: marks.len(),
        });
    }
    let a = &marks.amplitudes;
    let mean_a = mean(a);
    let median_a = median(a);

    let diffs = region_diffs(a, marks);
    if diffs.is_empty() || mean_a <= 0.0 {
        return Err(Error::InsufficientPeriods {
            needed: MIN_PERIODS,
            got: marks.len(),
        });
    }
    let local = mean(&diffs) / mean_a;
    let median_shimmer = median(&diffs) / median_a;

    // dB variant: cycles with zero amplitude are excluded from the ratio
    let mut db_sum = 0.0;
    let mut db_n = 0usize;
    for r in marks.regions() {
        let seg = &a[r];
        for pair in seg.windows(2) {
            if pair[0] > 0.0 && pair[1] > 0.0 {
                db_sum += (20.0 * (pair[1] / pair[0]).log10()).abs();
                db_n += 1;
            }
        }
    }
    let local_db = if db_n > 0 { db_sum / db_n as f64 } else { 0.0 };

    let apq3 = perturbation_quotient(a, marks, 1) / mean_a;
    let apq5 = perturbation_quotient(a, marks, 2) / mean_a;
    let apq11 = if marks.len() >= 11 && has_window(marks, 5) {
        Some(perturbation_quotient(a, marks, 5) / mean_a)
    } else {
        None
    };

    Ok(ShimmerFeatures {
        local,
        local_db,
        apq3,
        apq5,
        apq11,
        dda: 3.0 * apq3,
        mean: local,
        median: median_shimmer,
    })
}

/// mean |x_i - centered (2h+1)-point average| over every position whose full
/// window fits inside one region.
fn perturbation_quotient(x: &[f64], marks: &PeriodMarks, half: usize) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in marks.regions() {
        let seg = &x[r];
        if seg.len() < 2 * half + 1 {
            continue;
        }
        for i in half..seg.len() - half {
            let window = &seg[i - half..=i + half];
            let avg = window.iter().sum::<f64>() / window.len() as f64;
            sum += (seg[i] - avg).abs();
            n += 1;
        }
    }
    if n > 0 {
        sum / n as f64
    } else {
        0.0
    }
}

fn has_window(marks: &PeriodMarks, half: usize) -> bool {
    marks.regions().iter().any(|r| r.len() > 2 * half)
}

/// |x_i - x_{i-1}| for consecutive pairs that stay inside one region.
fn region_diffs(x: &[f64], marks: &PeriodMarks) -> Vec<f64> {
    let mut out = Vec::new();
    for r in marks.regions() {
        for pair in x[r].windows(2) {
            out.push((pair[1] - pair[0]).abs());
        }
    }
    out
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn population_stddev(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

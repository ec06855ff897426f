//! Nonlinear dysphonia measures: RPDE, DFA, and PPE.
//!
//! These quantify, respectively, how strictly the signal repeats in phase
//! space, how self-similar its noise component is across scales, and how
//! well the speaker holds a pitch once speaker-level trends are whitened
//! away. Each is normalized into [0, 1].

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::pitch::F0Track;

/// Phase-space embedding settings for RPDE.
///
/// Defaults are compatible-in-spirit with the dysphonia literature, not
/// bit-compatible with any particular toolbox: dimension 4, delay at the
/// first autocorrelation zero crossing (capped), ball radius 0.12 signal
/// standard deviations, periods counted up to 1000 samples. Overridable
/// through the extraction config file, not CLI flags, so the default
/// feature definition stays stable.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct EmbedConfig {
    pub dimension: usize,
    /// Fixed delay in samples; `None` picks the first ACF zero crossing.
    pub delay: Option<usize>,
    pub delay_cap: usize,
    /// Ball radius as a multiple of the signal standard deviation.
    pub epsilon_factor: f64,
    /// Longest return period kept in the histogram, in samples.
    pub t_max: usize,
    /// Excerpt cap in seconds; the close-returns search is quadratic-ish.
    pub max_seconds: f64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            dimension: 4,
            delay: None,
            delay_cap: 50,
            epsilon_factor: 0.12,
            t_max: 1000,
            max_seconds: 5.0,
        }
    }
}

/// Recurrence period density entropy in [0, 1].
///
/// The signal is delay-embedded; for each point the search walks forward
/// until the trajectory has first left an epsilon-ball around it and then
/// re-entered, recording that return period. The normalized entropy of the
/// period histogram is the feature: 0 for a strictly periodic signal whose
/// returns all share one period, 1 for returns spread uniformly over all
/// periods up to `t_max`.
pub fn rpde(buf: &AudioBuffer, cfg: &EmbedConfig) -> Result<f64> {
    let x = centered_excerpt(&buf.samples, buf.sample_rate, cfg.max_seconds);
    let dim = cfg.dimension.max(1);
    let delay = cfg
        .delay
        .unwrap_or_else(|| first_acf_zero_crossing(x).min(cfg.delay_cap).max(1));
    let span = (dim - 1) * delay;
    if x.len() < cfg.t_max + span + 2 {
        return Err(Error::InsufficientSignal(format!(
            "need at least {} samples for rpde, got {}",
            cfg.t_max + span + 2,
            x.len()
        )));
    }
    let sd = stddev(x);
    if sd <= 0.0 {
        return Err(Error::InsufficientSignal("constant signal".into()));
    }
    let eps = cfg.epsilon_factor * sd;
    let eps_sq = eps * eps;
    let n_points = x.len() - span;

    let dist_sq = |i: usize, j: usize| -> f64 {
        let mut d = 0.0;
        for k in 0..dim {
            let diff = x[i + k * delay] - x[j + k * delay];
            d += diff * diff;
        }
        d
    };

    let mut periods = Vec::new();
    for i in 0..n_points {
        let mut j = i + 1;
        let horizon = (i + cfg.t_max).min(n_points - 1);
        // leave the ball
        while j <= horizon && dist_sq(i, j) < eps_sq {
            j += 1;
        }
        // first return
        while j <= horizon && dist_sq(i, j) >= eps_sq {
            j += 1;
        }
        if j <= horizon {
            periods.push(j - i);
        }
    }

    if periods.is_empty() {
        return Err(Error::NoRecurrence);
    }
    Ok(rpde_from_periods(&periods, cfg.t_max))
}

/// Histogram-entropy stage of RPDE: normalized entropy of the return-period
/// distribution, `H / ln(t_max)`.
pub fn rpde_from_periods(periods: &[usize], t_max: usize) -> f64 {
    let mut counts = vec![0usize; t_max + 1];
    let mut total = 0usize;
    for &p in periods {
        if p >= 1 && p <= t_max {
            counts[p] += 1;
            total += 1;
        }
    }
    if total == 0 || t_max <= 1 {
        return 0.0;
    }
    let mut entropy = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / total as f64;
            entropy -= p * p.ln();
        }
    }
    (entropy / (t_max as f64).ln()).clamp(0.0, 1.0)
}

fn first_acf_zero_crossing(x: &[f64]) -> usize {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let c0: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    if c0 <= 0.0 {
        return 1;
    }
    for lag in 1..n.min(1000) {
        let c: f64 = x[..n - lag]
            .iter()
            .zip(&x[lag..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum();
        if c <= 0.0 {
            return lag;
        }
    }
    1
}

/// DFA settings: ten log-spaced window sizes from `min_window` to a quarter
/// of the series length.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct DfaConfig {
    pub min_window: usize,
    pub n_windows: usize,
    pub max_seconds: f64,
}

impl Default for DfaConfig {
    fn default() -> Self {
        Self {
            min_window: 50,
            n_windows: 10,
            max_seconds: 5.0,
        }
    }
}

/// Raw scaling exponent plus its bounded logistic normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfaAnalysis {
    /// Least-squares slope of log F(L) against log L.
    pub alpha: f64,
    /// `1 / (1 + exp(-alpha))`, the [0, 1] feature value.
    pub normalized: f64,
}

/// Detrended fluctuation analysis of a buffer.
pub fn dfa(buf: &AudioBuffer, cfg: &DfaConfig) -> Result<DfaAnalysis> {
    let x = centered_excerpt(&buf.samples, buf.sample_rate, cfg.max_seconds);
    dfa_series(x, cfg)
}

/// DFA of a raw series: integrate the mean-removed signal, detrend it
/// linearly inside non-overlapping windows of each size, and fit the
/// log-log slope of the RMS residual against the window size.
pub fn dfa_series(x: &[f64], cfg: &DfaConfig) -> Result<DfaAnalysis> {
    let n = x.len();
    if n < 4 * cfg.min_window {
        return Err(Error::InsufficientSignal(format!(
            "need at least {} samples for dfa, got {n}",
            4 * cfg.min_window
        )));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut profile = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &v in x {
        acc += v - mean;
        profile.push(acc);
    }

    let max_window = n / 4;
    let sizes = log_spaced_sizes(cfg.min_window, max_window, cfg.n_windows);
    if sizes.len() < 2 {
        return Err(Error::InsufficientSignal(
            "too short for two distinct dfa window sizes".into(),
        ));
    }

    let mut log_l = Vec::with_capacity(sizes.len());
    let mut log_f = Vec::with_capacity(sizes.len());
    for &l in &sizes {
        let n_seg = n / l;
        let mut sq_sum = 0.0;
        let mut count = 0usize;
        for s in 0..n_seg {
            let seg = &profile[s * l..(s + 1) * l];
            sq_sum += linear_detrend_sq_residual(seg);
            count += l;
        }
        let f = (sq_sum / count as f64).sqrt();
        if f > 0.0 {
            log_l.push((l as f64).ln());
            log_f.push(f.ln());
        }
    }
    if log_l.len() < 2 {
        return Err(Error::InsufficientSignal(
            "degenerate fluctuation function".into(),
        ));
    }

    let alpha = slope(&log_l, &log_f);
    Ok(DfaAnalysis {
        alpha,
        normalized: 1.0 / (1.0 + (-alpha).exp()),
    })
}

/// Sum of squared residuals after least-squares line removal.
fn linear_detrend_sq_residual(seg: &[f64]) -> f64 {
    let n = seg.len() as f64;
    let mean_i = (n - 1.0) / 2.0;
    let mean_y = seg.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, &y) in seg.iter().enumerate() {
        let dx = i as f64 - mean_i;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = mean_y - b * mean_i;
    seg.iter()
        .enumerate()
        .map(|(i, &y)| {
            let r = y - (a + b * i as f64);
            r * r
        })
        .sum()
}

fn log_spaced_sizes(min: usize, max: usize, count: usize) -> Vec<usize> {
    if max <= min {
        return vec![min.min(max)];
    }
    let (lo, hi) = ((min as f64).ln(), (max as f64).ln());
    let mut sizes: Vec<usize> = (0..count)
        .map(|i| {
            (lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64)
                .exp()
                .round() as usize
        })
        .collect();
    sizes.dedup();
    sizes
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Minimum voiced frames for PPE.
const PPE_MIN_FRAMES: usize = 32;
/// Histogram bins for the whitened pitch residual.
const PPE_BINS: usize = 30;
/// Reference frequency for the semitone scale; PPE is invariant to it.
const PPE_F0_REF: f64 = 120.0;

/// Pitch period entropy in [0, 1].
///
/// The voiced F0 contour goes to a semitone scale, is mean-centered (which
/// removes speaker transposition exactly), and an order-2 linear predictor
/// fitted by the autocorrelation method whitens the remaining trend. The
/// residuals are histogrammed into 30 bins spanning +-5 standard deviations
/// and the normalized entropy of that histogram is returned; a perfectly
/// held pitch gives 0.
pub fn ppe(track: &F0Track) -> Result<f64> {
    let f0s = track.voiced_f0s();
    if f0s.len() < PPE_MIN_FRAMES {
        return Err(Error::InsufficientSignal(format!(
            "ppe needs {PPE_MIN_FRAMES} voiced frames, got {}",
            f0s.len()
        )));
    }

    let semitones: Vec<f64> = f0s.iter().map(|f| 12.0 * (f / PPE_F0_REF).log2()).collect();
    let mean = semitones.iter().sum::<f64>() / semitones.len() as f64;
    let s: Vec<f64> = semitones.iter().map(|v| v - mean).collect();

    let (a1, a2) = ar2_coefficients(&s);
    let residual: Vec<f64> = (2..s.len())
        .map(|t| s[t] - a1 * s[t - 1] - a2 * s[t - 2])
        .collect();

    let sd = stddev(&residual);
    if sd <= 1e-12 {
        // constant pitch: everything lands in a single bin
        return Ok(0.0);
    }

    let lo = -5.0 * sd;
    let width = 10.0 * sd / PPE_BINS as f64;
    let mut counts = vec![0usize; PPE_BINS];
    let mut total = 0usize;
    for &r in &residual {
        let bin = ((r - lo) / width).floor();
        let bin = (bin.max(0.0) as usize).min(PPE_BINS - 1);
        counts[bin] += 1;
        total += 1;
    }
    let mut entropy = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / total as f64;
            entropy -= p * p.ln();
        }
    }
    Ok((entropy / (PPE_BINS as f64).ln()).clamp(0.0, 1.0))
}

/// Order-2 linear-predictor coefficients via Levinson-Durbin on the biased
/// autocorrelation.
fn ar2_coefficients(s: &[f64]) -> (f64, f64) {
    let n = s.len();
    let r = |lag: usize| -> f64 {
        s[..n - lag].iter().zip(&s[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
    };
    let (r0, r1, r2) = (r(0), r(1), r(2));
    if r0 <= 0.0 {
        return (0.0, 0.0);
    }
    let k1 = r1 / r0;
    let e1 = r0 * (1.0 - k1 * k1);
    if e1 <= 0.0 {
        return (k1, 0.0);
    }
    let k2 = (r2 - k1 * r1) / e1;
    let a1 = k1 - k2 * k1;
    let a2 = k2;
    (a1, a2)
}

fn stddev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

fn centered_excerpt(x: &[f64], rate: u32, max_seconds: f64) -> &[f64] {
    let cap = (max_seconds * rate as f64) as usize;
    if x.len() <= cap {
        x
    } else {
        let start = (x.len() - cap) / 2;
        &x[start..start + cap]
    }
}

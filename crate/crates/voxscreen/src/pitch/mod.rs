//! Fundamental-frequency tracking, per-cycle period marks, and HNR.
//!
//! The tracker follows the classic short-term autocorrelation recipe: each
//! 40 ms frame is mean-removed, Hann-windowed, autocorrelated, and the
//! autocorrelation is divided by the window's own autocorrelation so the
//! taper does not bias long lags. The highest admissible peak (with a small
//! bias towards higher candidates to suppress subharmonics) becomes the
//! frame's F0 candidate; frames whose peak strength falls below the voicing
//! threshold are marked unvoiced.

mod marks;

pub use marks::{extract_period_marks, PeriodMarks};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// F0 tracker settings, exposed on the CLI as `--f0-floor`, `--f0-ceil`,
/// and `--voicing-threshold`.
#[derive(Debug, Clone)]
pub struct PitchConfig {
    /// Lowest admissible F0 in Hz.
    pub f0_floor: f64,
    /// Highest admissible F0 in Hz.
    pub f0_ceil: f64,
    /// Minimum normalized autocorrelation peak for a frame to count as
    /// voiced.
    pub voicing_threshold: f64,
    /// Analysis window in seconds.
    pub window: f64,
    /// Hop between frames in seconds.
    pub hop: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self {
            f0_floor: 60.0,
            f0_ceil: 400.0,
            voicing_threshold: 0.45,
            window: 0.040,
            hop: 0.010,
        }
    }
}

/// One analysis frame of the F0 contour.
#[derive(Debug, Clone, Copy)]
pub struct PitchFrame {
    /// Frame center time in seconds.
    pub time: f64,
    /// Estimated F0 in Hz, `None` when unvoiced.
    pub f0: Option<f64>,
    /// Normalized autocorrelation peak in [0, 1].
    pub strength: f64,
}

impl PitchFrame {
    pub fn voiced(&self) -> bool {
        self.f0.is_some()
    }
}

/// Framewise F0 contour.
#[derive(Debug, Clone)]
pub struct F0Track {
    pub frames: Vec<PitchFrame>,
    /// Hop between frames in seconds.
    pub hop: f64,
}

impl F0Track {
    /// F0 values of the voiced frames, in time order.
    pub fn voiced_f0s(&self) -> Vec<f64> {
        self.frames.iter().filter_map(|f| f.f0).collect()
    }

    pub fn voiced_count(&self) -> usize {
        self.frames.iter().filter(|f| f.voiced()).count()
    }

    /// Maximal runs of consecutive voiced frames as index ranges.
    pub fn voiced_regions(&self) -> Vec<std::ops::Range<usize>> {
        let mut regions = Vec::new();
        let mut start = None;
        for (i, f) in self.frames.iter().enumerate() {
            match (f.voiced(), start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    regions.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            regions.push(s..self.frames.len());
        }
        regions
    }
}

/// Per-octave bonus for higher-frequency candidates. Keeps the tracker on
/// the carrier cycle when strong shimmer makes the two-cycle subharmonic
/// peak slightly taller; applied to candidate selection only, never to the
/// reported strength.
const OCTAVE_BIAS: f64 = 0.05;

/// Estimates the framewise F0 contour.
///
/// Requires at least `2 / f0_floor` seconds of signal; frames are centered
/// every `hop` seconds. Within each frame the peak of the window-corrected
/// normalized autocorrelation inside `[f0_floor, f0_ceil]` is refined by
/// parabolic interpolation in both lag and height.
pub fn estimate_f0(buf: &AudioBuffer, cfg: &PitchConfig) -> Result<F0Track> {
    if cfg.f0_floor <= 0.0 || cfg.f0_ceil <= cfg.f0_floor {
        return Err(Error::InvalidArgument(
            "need 0 < f0_floor < f0_ceil".into(),
        ));
    }
    let rate = buf.sample_rate as f64;
    if buf.duration() < 2.0 / cfg.f0_floor {
        return Err(Error::InsufficientSignal(format!(
            "need at least {:.3} s for f0_floor {} Hz",
            2.0 / cfg.f0_floor,
            cfg.f0_floor
        )));
    }

    let window_len = (((cfg.window * rate).round() as usize).max(8)).min(buf.samples.len());
    let hop_len = ((cfg.hop * rate).round() as usize).max(1);
    let min_lag = ((rate / cfg.f0_ceil).floor() as usize).max(2);
    let max_lag = ((rate / cfg.f0_floor).ceil() as usize).min(window_len - 2);
    if min_lag >= max_lag {
        return Err(Error::InsufficientSignal(
            "window too short for the requested f0 range".into(),
        ));
    }

    let window = hann(window_len);
    let window_acf = autocorrelation(&window, max_lag + 1);

    let mut frames = Vec::new();
    let mut start = 0usize;
    while start + window_len <= buf.samples.len() {
        let time = (start + window_len / 2) as f64 / rate;
        frames.push(analyze_frame(
            &buf.samples[start..start + window_len],
            &window,
            &window_acf,
            min_lag,
            max_lag,
            rate,
            cfg,
            time,
        ));
        start += hop_len;
    }
    if frames.is_empty() {
        // duration passed the precondition but is shorter than one window
        let time = buf.samples.len() as f64 / (2.0 * rate);
        let w = hann(buf.samples.len());
        let wacf = autocorrelation(&w, max_lag.min(buf.samples.len() - 2) + 1);
        frames.push(analyze_frame(
            &buf.samples,
            &w,
            &wacf,
            min_lag,
            max_lag.min(buf.samples.len() - 2),
            rate,
            cfg,
            time,
        ));
    }

    Ok(F0Track {
        frames,
        hop: hop_len as f64 / rate,
    })
}

#[allow(clippy::too_many_arguments)]
fn analyze_frame(
    samples: &[f64],
    window: &[f64],
    window_acf: &[f64],
    min_lag: usize,
    max_lag: usize,
    rate: f64,
    cfg: &PitchConfig,
    time: f64,
) -> PitchFrame {
    let unvoiced = |strength: f64| PitchFrame {
        time,
        f0: None,
        strength,
    };

    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let x: Vec<f64> = samples
        .iter()
        .zip(window)
        .map(|(&s, &w)| (s - mean) * w)
        .collect();

    let acf = autocorrelation(&x, max_lag + 1);
    if acf[0] <= 1e-24 {
        return unvoiced(0.0);
    }

    // window-corrected normalized autocorrelation
    let r: Vec<f64> = (0..=max_lag)
        .map(|lag| {
            let wc = window_acf[lag] / window_acf[0];
            if wc > 1e-9 {
                (acf[lag] / acf[0]) / wc
            } else {
                0.0
            }
        })
        .collect();

    // candidate peaks with a slight preference for higher frequencies
    let mut best: Option<(f64, f64, f64)> = None; // (score, lag, strength)
    for lag in min_lag.max(1)..max_lag {
        if r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] > 0.0 {
            let (dl, dv) = parabolic_refine(r[lag - 1], r[lag], r[lag + 1]);
            let lag_refined = lag as f64 + dl;
            let strength = dv.clamp(0.0, 1.0);
            let freq = rate / lag_refined;
            if freq < cfg.f0_floor || freq > cfg.f0_ceil {
                continue;
            }
            let score = strength + OCTAVE_BIAS * (freq / cfg.f0_floor).log2();
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, lag_refined, strength));
            }
        }
    }

    match best {
        Some((_, lag, strength)) if strength >= cfg.voicing_threshold => PitchFrame {
            time,
            f0: Some(rate / lag),
            strength,
        },
        Some((_, _, strength)) => unvoiced(strength),
        None => unvoiced(0.0),
    }
}

/// Peak refinement by a parabola through three points; returns the vertex
/// offset in [-0.5, 0.5] and the vertex height.
fn parabolic_refine(y_prev: f64, y_mid: f64, y_next: f64) -> (f64, f64) {
    let denom = y_prev - 2.0 * y_mid + y_next;
    if denom.abs() < 1e-30 {
        return (0.0, y_mid);
    }
    let d = 0.5 * (y_prev - y_next) / denom;
    let d = d.clamp(-0.5, 0.5);
    let v = y_mid - 0.25 * (y_prev - y_next) * d;
    (d, v)
}

fn autocorrelation(x: &[f64], n_lags: usize) -> Vec<f64> {
    let n = x.len();
    (0..n_lags.min(n))
        .map(|lag| x[..n - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum())
        .collect()
}

fn hann(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|i| {
            0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()
        })
        .collect()
}

/// Mean harmonics-to-noise ratio in dB over the voiced frames.
///
/// Per voiced frame the normalized autocorrelation peak `r` is read as the
/// periodic fraction of the energy, giving `10 * log10(r / (1 - r))`; `r` is
/// clamped to `[1e-6, 1 - 1e-6]` so perfectly periodic synthetic input stays
/// finite (capping the result at 60 dB).
pub fn hnr(buf: &AudioBuffer, cfg: &PitchConfig) -> Result<f64> {
    let track = estimate_f0(buf, cfg)?;
    hnr_from_track(&track)
}

/// HNR from an existing track (avoids re-running the tracker).
pub fn hnr_from_track(track: &F0Track) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for f in track.frames.iter().filter(|f| f.voiced()) {
        let r = f.strength.clamp(1e-6, 1.0 - 1e-6);
        sum += 10.0 * (r / (1.0 - r)).log10();
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoVoicedSpeech("no voiced frames for HNR".into()));
    }
    Ok(sum / count as f64)
}

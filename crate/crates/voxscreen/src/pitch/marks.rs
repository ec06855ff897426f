//! Per-cycle period and amplitude marks.
//!
//! Within each voiced region of the F0 track, cycle boundaries are placed at
//! successive waveform peaks roughly `1/f0` apart, searching ±25% of the
//! nominal period around the expected position and refining each peak to
//! sub-sample precision with a parabolic fit. The gaps between boundaries
//! are the cycle durations `T_i`; the per-cycle peak amplitudes are `A_i`.

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::pitch::F0Track;

/// Search half-width around the expected next peak, as a fraction of the
/// nominal period.
const SEARCH_FRACTION: f64 = 0.25;

/// Minimum voiced frames for a region to contribute marks.
const MIN_REGION_FRAMES: usize = 3;

/// Cycle-level periods and amplitudes.
///
/// Marks never bridge unvoiced gaps: `region_starts` records the index of
/// the first cycle of each voiced region, and the perturbation statistics
/// only difference cycles within one region.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodMarks {
    /// Cycle durations in seconds.
    pub periods: Vec<f64>,
    /// Per-cycle peak amplitudes (same length as `periods`).
    pub amplitudes: Vec<f64>,
    /// Index into `periods` where each voiced region begins.
    pub region_starts: Vec<usize>,
}

impl PeriodMarks {
    /// Builds marks forming a single voiced region; validates invariants.
    pub fn single_region(periods: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        if periods.len() != amplitudes.len() {
            return Err(Error::InvalidArgument(
                "periods and amplitudes must have equal length".into(),
            ));
        }
        if periods.iter().any(|&t| !t.is_finite() || t <= 0.0) {
            return Err(Error::InvalidArgument("all periods must be > 0".into()));
        }
        if amplitudes.iter().any(|&a| !a.is_finite() || a < 0.0) {
            return Err(Error::InvalidArgument("all amplitudes must be >= 0".into()));
        }
        Ok(Self {
            periods,
            amplitudes,
            region_starts: vec![0],
        })
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// Ranges of cycle indices belonging to each voiced region.
    pub fn regions(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.region_starts.len());
        for (i, &s) in self.region_starts.iter().enumerate() {
            let end = self
                .region_starts
                .get(i + 1)
                .copied()
                .unwrap_or(self.periods.len());
            if s < end {
                out.push(s..end);
            }
        }
        out
    }
}

/// Extracts period marks from a buffer guided by its F0 track.
///
/// Errors with `NoVoicedSpeech` when the track has no voiced region of at
/// least three frames.
pub fn extract_period_marks(buf: &AudioBuffer, track: &F0Track) -> Result<PeriodMarks> {
    let rate = buf.sample_rate as f64;
    let mut periods = Vec::new();
    let mut amplitudes = Vec::new();
    let mut region_starts = Vec::new();

    for region in track.voiced_regions() {
        if region.len() < MIN_REGION_FRAMES {
            continue;
        }
        let frames = &track.frames[region.clone()];
        let t_start = frames.first().unwrap().time - track.hop / 2.0;
        let t_end = frames.last().unwrap().time + track.hop / 2.0;
        let i_start = ((t_start * rate).floor().max(0.0)) as usize;
        let i_end = ((t_end * rate).ceil() as usize).min(buf.samples.len());
        if i_end <= i_start {
            continue;
        }

        // nominal period at a given time: median voiced f0 within +-60 ms,
        // falling back to the region median; the median rides out isolated
        // octave misreads that would otherwise derail the peak walk
        let region_f0s: Vec<f64> = frames.iter().filter_map(|fr| fr.f0).collect();
        let region_median = median_of(&region_f0s);
        let nominal = |t: f64| -> f64 {
            let local: Vec<f64> = frames
                .iter()
                .filter(|fr| (fr.time - t).abs() <= 0.060)
                .filter_map(|fr| fr.f0)
                .collect();
            let f0 = if local.is_empty() {
                region_median
            } else {
                median_of(&local)
            };
            1.0 / f0
        };

        // seed: strongest peak within the first nominal period
        let t0 = nominal(t_start);
        let seed_end = (i_start + (t0 * rate).round() as usize + 1).min(i_end);
        let seed = match argmax_abs(&buf.samples[i_start..seed_end]) {
            Some(k) => i_start + k,
            None => continue,
        };

        let mut boundaries: Vec<(f64, f64)> = Vec::new(); // (position in samples, amplitude)
        let (p, a) = refine_peak(&buf.samples, seed);
        boundaries.push((p, a));

        // walk forward peak to peak
        loop {
            let (prev_pos, _) = *boundaries.last().unwrap();
            let t_nom = nominal(prev_pos / rate) * rate; // samples
            let center = prev_pos + t_nom;
            let lo = (center - SEARCH_FRACTION * t_nom).round() as isize;
            let hi = (center + SEARCH_FRACTION * t_nom).round() as isize;
            let lo = lo.max(prev_pos as isize + 2).max(0) as usize;
            let hi = (hi.max(0) as usize).min(i_end.saturating_sub(1));
            if lo >= hi {
                break;
            }
            let k = match argmax_abs(&buf.samples[lo..=hi]) {
                Some(k) => lo + k,
                None => break,
            };
            let (pos, amp) = refine_peak(&buf.samples, k);
            if pos <= prev_pos {
                break;
            }
            boundaries.push((pos, amp));
        }

        if boundaries.len() >= 2 {
            region_starts.push(periods.len());
            for w in boundaries.windows(2) {
                periods.push((w[1].0 - w[0].0) / rate);
                // cycle amplitude: the larger sample peak inside the cycle,
                // which for pulse-like cycles is the leading boundary peak
                amplitudes.push(w[0].1);
            }
        }
    }

    if periods.is_empty() {
        return Err(Error::NoVoicedSpeech(
            "no voiced region with extractable cycles".into(),
        ));
    }
    Ok(PeriodMarks {
        periods,
        amplitudes,
        region_starts,
    })
}

fn median_of(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn argmax_abs(x: &[f64]) -> Option<usize> {
    if x.is_empty() {
        return None;
    }
    let mut best = 0usize;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    if x[best].abs() > 0.0 {
        Some(best)
    } else {
        None
    }
}

/// Sub-sample peak refinement: least-squares parabola over |x| at the five
/// samples around the maximum, which averages additive noise out of both
/// the vertex position and the vertex height. Returns (position in
/// samples, peak amplitude).
fn refine_peak(x: &[f64], i: usize) -> (f64, f64) {
    if i < 2 || i + 2 >= x.len() {
        return refine_peak_3(x, i);
    }
    let y: [f64; 5] = std::array::from_fn(|k| x[i + k - 2].abs());
    let sum_y: f64 = y.iter().sum();
    let sum_dy: f64 = (-2..=2).zip(&y).map(|(d, v)| d as f64 * v).sum();
    let sum_d2y: f64 = (-2i64..=2).zip(&y).map(|(d, v)| (d * d) as f64 * v).sum();
    // symmetric design: sum d^2 = 10, sum d^4 = 34, n = 5
    let c2 = (sum_d2y - 2.0 * sum_y) / 14.0;
    let c1 = sum_dy / 10.0;
    let c0 = (sum_y - 10.0 * c2) / 5.0;
    if c2 >= -1e-30 {
        return refine_peak_3(x, i);
    }
    let d = (-c1 / (2.0 * c2)).clamp(-2.0, 2.0);
    let v = c0 + c1 * d + c2 * d * d;
    (i as f64 + d, v.max(0.0))
}

fn refine_peak_3(x: &[f64], i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= x.len() {
        return (i as f64, x[i].abs());
    }
    let (ym, y0, yp) = (x[i - 1].abs(), x[i].abs(), x[i + 1].abs());
    let denom = ym - 2.0 * y0 + yp;
    if denom.abs() < 1e-30 || y0 < ym || y0 < yp {
        return (i as f64, y0);
    }
    let d = (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5);
    let v = y0 - 0.25 * (ym - yp) * d;
    (i as f64 + d, v.max(y0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pitch::{estimate_f0, PitchConfig, PitchFrame};
    use std::f64::consts::PI;

    fn sine(freq: f64, rate: u32, seconds: f64, amp: f64) -> AudioBuffer {
        let n = (seconds * rate as f64).round() as usize;
        let s = (0..n)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / rate as f64).sin())
            .collect();
        AudioBuffer::new(s, rate, "sine").unwrap()
    }

    #[test]
    fn sine_periods_are_five_ms() {
        let buf = sine(200.0, 16_000, 1.0, 0.8);
        let track = estimate_f0(&buf, &PitchConfig::default()).unwrap();
        let marks = extract_period_marks(&buf, &track).unwrap();
        assert!(marks.len() > 100);
        let tol = 1.0 / 16_000.0; // one sample
        for &t in &marks.periods {
            assert!((t - 0.005).abs() <= tol, "period {t}");
        }
    }

    #[test]
    fn amplitude_modulation_is_recovered() {
        // alternate cycle amplitudes 1.0 / 0.8 on a 200 Hz carrier
        let rate = 16_000u32;
        let period = 80usize; // samples
        let cycles = 150usize;
        let mut s = Vec::with_capacity(period * cycles);
        for c in 0..cycles {
            let amp = if c % 2 == 0 { 1.0 } else { 0.8 };
            for i in 0..period {
                s.push(amp * (2.0 * PI * i as f64 / period as f64).sin());
            }
        }
        let buf = AudioBuffer::new(s, rate, "am").unwrap();
        let track = estimate_f0(&buf, &PitchConfig::default()).unwrap();
        let marks = extract_period_marks(&buf, &track).unwrap();
        assert!(marks.len() > 50);
        // consecutive amplitudes alternate near 1.0 and 0.8
        let mut highs = 0usize;
        let mut lows = 0usize;
        for &a in &marks.amplitudes {
            if (a - 1.0).abs() <= 0.02 {
                highs += 1;
            } else if (a - 0.8).abs() <= 0.02 {
                lows += 1;
            }
        }
        let spot_on = highs + lows;
        assert!(
            spot_on as f64 >= 0.9 * marks.len() as f64,
            "{spot_on} of {} amplitudes near 1.0/0.8",
            marks.len()
        );
        assert!(highs > 0 && lows > 0);
    }

    #[test]
    fn unvoiced_track_errors() {
        let buf = sine(200.0, 16_000, 0.5, 0.5);
        let track = F0Track {
            frames: (0..40)
                .map(|i| PitchFrame {
                    time: 0.02 + i as f64 * 0.01,
                    f0: None,
                    strength: 0.0,
                })
                .collect(),
            hop: 0.01,
        };
        assert!(matches!(
            extract_period_marks(&buf, &track),
            Err(Error::NoVoicedSpeech(_))
        ));
    }

    #[test]
    fn gain_scales_amplitudes_not_periods() {
        let buf = sine(200.0, 16_000, 0.8, 0.4);
        let scaled = AudioBuffer::new(
            buf.samples.iter().map(|s| s * 2.5).collect(),
            16_000,
            "scaled",
        )
        .unwrap();
        let cfg = PitchConfig::default();
        let ta = estimate_f0(&buf, &cfg).unwrap();
        let tb = estimate_f0(&scaled, &cfg).unwrap();
        let ma = extract_period_marks(&buf, &ta).unwrap();
        let mb = extract_period_marks(&scaled, &tb).unwrap();
        assert_eq!(ma.len(), mb.len());
        for (a, b) in ma.periods.iter().zip(&mb.periods) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in ma.amplitudes.iter().zip(&mb.amplitudes) {
            assert!((b / a - 2.5).abs() < 1e-9);
        }
    }

    #[test]
    fn period_sum_bounded_by_region_duration() {
        let buf = sine(150.0, 16_000, 1.0, 0.6);
        let track = estimate_f0(&buf, &PitchConfig::default()).unwrap();
        let marks = extract_period_marks(&buf, &track).unwrap();
        let total: f64 = marks.periods.iter().sum();
        // single voiced region covering at most the buffer
        assert!(total <= buf.duration() + 1.0 / 150.0);
    }

    #[test]
    fn single_region_validates() {
        assert!(PeriodMarks::single_region(vec![0.01, -0.01], vec![1.0, 1.0]).is_err());
        assert!(PeriodMarks::single_region(vec![0.01], vec![1.0, 1.0]).is_err());
        let m = PeriodMarks::single_region(vec![0.01; 5], vec![1.0; 5]).unwrap();
        assert_eq!(m.regions(), vec![0..5]);
    }
}

//! MFCC summaries and relative band power.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::features::perturbation::median;

/// MFCC recipe, fixed so recordings stay comparable: pre-emphasis 0.97,
/// 25 ms Hann frames every 10 ms, 26 mel filters up to 8 kHz, log
/// filterbank energies, orthonormal type-II DCT, coefficients c0..c12.
#[derive(Debug, Clone)]
pub struct MfccConfig {
    pub frame: f64,
    pub hop: f64,
    pub n_filters: usize,
    pub n_coefficients: usize,
    pub pre_emphasis: f64,
    /// Upper filterbank edge; clamped to Nyquist.
    pub f_max: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            frame: 0.025,
            hop: 0.010,
            n_filters: 26,
            n_coefficients: 13,
            pre_emphasis: 0.97,
            f_max: 8_000.0,
        }
    }
}

/// Per-coefficient mean and mean absolute frame-to-frame variation.
#[derive(Debug, Clone, PartialEq)]
pub struct MfccFeatures {
    pub mean: Vec<f64>,
    pub variation: Vec<f64>,
}

/// Computes framewise MFCCs and summarizes them.
///
/// `mean[k]` averages coefficient `k` over frames; `variation[k]` is the
/// mean absolute first difference across consecutive frames.
pub fn mfcc_features(buf: &AudioBuffer, cfg: &MfccConfig) -> Result<MfccFeatures> {
    let frames = mfcc_frames(buf, cfg)?;
    if frames.len() < 3 {
        return Err(Error::InsufficientSignal(format!(
            "need at least 3 frames, got {}",
            frames.len()
        )));
    }
    let k = cfg.n_coefficients;
    let mut mean = vec![0.0; k];
    for f in &frames {
        for (m, c) in mean.iter_mut().zip(f) {
            *m += c;
        }
    }
    for m in &mut mean {
        *m /= frames.len() as f64;
    }
    let mut variation = vec![0.0; k];
    for pair in frames.windows(2) {
        for j in 0..k {
            variation[j] += (pair[1][j] - pair[0][j]).abs();
        }
    }
    for v in &mut variation {
        *v /= (frames.len() - 1) as f64;
    }
    Ok(MfccFeatures { mean, variation })
}

/// Framewise cepstral coefficients; exposed for the oracle tests.
pub fn mfcc_frames(buf: &AudioBuffer, cfg: &MfccConfig) -> Result<Vec<Vec<f64>>> {
    let rate = buf.sample_rate as f64;
    let frame_len = ((cfg.frame * rate).round() as usize).max(2);
    let hop_len = ((cfg.hop * rate).round() as usize).max(1);
    if buf.samples.len() < frame_len {
        return Err(Error::InsufficientSignal(
            "buffer shorter than one analysis frame".into(),
        ));
    }

    // pre-emphasis over the whole signal
    let mut emphasized = Vec::with_capacity(buf.samples.len());
    emphasized.push(buf.samples[0]);
    for i in 1..buf.samples.len() {
        emphasized.push(buf.samples[i] - cfg.pre_emphasis * buf.samples[i - 1]);
    }

    let nfft = frame_len.next_power_of_two();
    let window = hann(frame_len);
    let filterbank = mel_filterbank(
        cfg.n_filters,
        nfft,
        rate,
        0.0,
        cfg.f_max.min(rate / 2.0),
    );
    let fft = FftPlanner::new().plan_fft_forward(nfft);

    let mut out = Vec::new();
    let mut start = 0usize;
    while start + frame_len <= emphasized.len() {
        let mut spec: Vec<Complex<f64>> = (0..nfft)
            .map(|i| {
                if i < frame_len {
                    Complex::new(emphasized[start + i] * window[i], 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                }
            })
            .collect();
        fft.process(&mut spec);
        let power: Vec<f64> = spec[..nfft / 2 + 1]
            .iter()
            .map(|c| c.norm_sqr() / nfft as f64)
            .collect();

        let log_energies: Vec<f64> = filterbank
            .iter()
            .map(|filt| {
                let e: f64 = filt.iter().map(|&(bin, w)| w * power[bin]).sum();
                e.max(1e-12).ln()
            })
            .collect();

        out.push(dct_ii_orthonormal(&log_energies, cfg.n_coefficients));
        start += hop_len;
    }
    Ok(out)
}

/// Orthonormal type-II DCT of `x`, truncated to `k` coefficients.
pub fn dct_ii_orthonormal(x: &[f64], k: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(k);
    for m in 0..k.min(n) {
        let scale = if m == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        let mut acc = 0.0;
        for (j, &v) in x.iter().enumerate() {
            acc += v * scale * (PI * m as f64 * (j as f64 + 0.5) / n as f64).cos();
        }
        out.push(acc);
    }
    out
}

/// Triangular mel filterbank as sparse (bin, weight) lists.
pub fn mel_filterbank(
    n_filters: usize,
    nfft: usize,
    rate: f64,
    f_min: f64,
    f_max: f64,
) -> Vec<Vec<(usize, f64)>> {
    let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
    let inv_mel = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
    let lo = mel(f_min);
    let hi = mel(f_max);
    let points: Vec<f64> = (0..n_filters + 2)
        .map(|i| inv_mel(lo + (hi - lo) * i as f64 / (n_filters + 1) as f64))
        .collect();

    let bin_hz = rate / nfft as f64;
    let n_bins = nfft / 2 + 1;
    let mut bank = Vec::with_capacity(n_filters);
    for f in 0..n_filters {
        let (left, center, right) = (points[f], points[f + 1], points[f + 2]);
        let mut filt = Vec::new();
        for bin in 0..n_bins {
            let freq = bin as f64 * bin_hz;
            let w = if freq >= left && freq <= center && center > left {
                (freq - left) / (center - left)
            } else if freq > center && freq <= right && right > center {
                (right - freq) / (right - center)
            } else {
                0.0
            };
            if w > 0.0 {
                filt.push((bin, w));
            }
        }
        bank.push(filt);
    }
    bank
}

/// The four relative band-power ratios over [0, 500), [500, 1000),
/// [1000, 2000), [2000, 4000] Hz.
///
/// Per 25 ms Hann frame the FFT bin powers are summed into the four bands;
/// the per-band medians across frames are then normalized to sum to one.
/// All-silent input yields the uniform split.
pub fn rel_band_power(buf: &AudioBuffer) -> Result<[f64; 4]> {
    const EDGES: [f64; 5] = [0.0, 500.0, 1000.0, 2000.0, 4000.0];
    let rate = buf.sample_rate as f64;
    let frame_len = ((0.025 * rate).round() as usize).max(2);
    let hop_len = ((0.010 * rate).round() as usize).max(1);
    if buf.samples.len() < frame_len {
        return Err(Error::InsufficientSignal(
            "buffer shorter than one 25 ms frame".into(),
        ));
    }

    let nfft = frame_len.next_power_of_two();
    let window = hann(frame_len);
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let bin_hz = rate / nfft as f64;

    let mut per_band: [Vec<f64>; 4] = Default::default();
    let mut start = 0usize;
    while start + frame_len <= buf.samples.len() {
        let mut spec: Vec<Complex<f64>> = (0..nfft)
            .map(|i| {
                if i < frame_len {
                    Complex::new(buf.samples[start + i] * window[i], 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                }
            })
            .collect();
        fft.process(&mut spec);
        let mut sums = [0.0f64; 4];
        for bin in 0..=nfft / 2 {
            let freq = bin as f64 * bin_hz;
            let p = spec[bin].norm_sqr();
            for b in 0..4 {
                let last = b == 3;
                if freq >= EDGES[b] && (freq < EDGES[b + 1] || (last && freq == EDGES[4])) {
                    sums[b] += p;
                    break;
                }
            }
        }
        for b in 0..4 {
            per_band[b].push(sums[b]);
        }
        start += hop_len;
    }

    let medians: Vec<f64> = per_band.iter().map(|v| median(v)).collect();
    let total: f64 = medians.iter().sum();
    if total <= 0.0 {
        return Ok([0.25; 4]);
    }
    Ok([
        medians[0] / total,
        medians[1] / total,
        medians[2] / total,
        medians[3] / total,
    ])
}

fn hann(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

//! Band-limited sample-rate conversion with a windowed-sinc kernel.

use std::f64::consts::PI;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// Half-width of the interpolation kernel in *output-side* zero crossings.
const KERNEL_HALF_WIDTH: f64 = 32.0;

/// Resamples to `target_rate` with windowed-sinc interpolation.
///
/// When downsampling, the kernel cutoff is lowered to the target Nyquist so
/// the conversion stays band-limited. Equal rates return the input
/// bit-identically; output length is `round(len * target / source)`, which
/// keeps the duration within one sample of the input.
pub fn resample(buf: &AudioBuffer, target_rate: u32) -> Result<AudioBuffer> {
    if target_rate == 0 {
        return Err(Error::InvalidArgument("target_rate must be > 0".into()));
    }
    if target_rate == buf.sample_rate {
        return Ok(buf.clone());
    }

    let src = buf.sample_rate as f64;
    let dst = target_rate as f64;
    let ratio = dst / src;
    let out_len = ((buf.samples.len() as f64) * ratio).round().max(1.0) as usize;

    // cutoff relative to the source Nyquist; < 1 only when decimating
    let cutoff = ratio.min(1.0);
    let half_width = KERNEL_HALF_WIDTH / cutoff;

    let x = &buf.samples;
    let n = x.len() as isize;
    let mut out = Vec::with_capacity(out_len);
    for m in 0..out_len {
        let center = m as f64 / ratio;
        let lo = (center - half_width).ceil() as isize;
        let hi = (center + half_width).floor() as isize;
        let mut acc = 0.0;
        for i in lo.max(0)..=hi.min(n - 1) {
            let d = i as f64 - center;
            acc += x[i as usize] * kernel(d, cutoff, half_width);
        }
        out.push(acc);
    }

    AudioBuffer::new(out, target_rate, buf.source_id.clone())
}

/// `cutoff * sinc(cutoff * d)` under a Blackman window of half-width `hw`.
fn kernel(d: f64, cutoff: f64, hw: f64) -> f64 {
    let t = d / hw;
    if t.abs() >= 1.0 {
        return 0.0;
    }
    // Blackman window on [-1, 1]
    let w = 0.42 + 0.5 * (PI * t).cos() + 0.08 * (2.0 * PI * t).cos();
    cutoff * sinc(cutoff * d) * w
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

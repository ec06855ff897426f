//! Endpoint trimming with a short-time RMS energy gate.
//!
//! Participants take a moment to start speaking and another to stop the
//! recording; the surrounding dead time is removed by keeping the span from
//! the first to the last frame whose RMS energy clears a threshold relative
//! to the loudest frame.

use crate::audio::AudioBuffer;

/// Energy-gate settings.
#[derive(Debug, Clone)]
pub struct VadConfig {
    /// Analysis frame length in seconds.
    pub frame: f64,
    /// Hop between frames in seconds.
    pub hop: f64,
    /// Threshold as a fraction of the peak frame RMS.
    pub relative_threshold: f64,
    /// Absolute RMS floor; guards against all-noise recordings where the
    /// relative rule would keep everything.
    pub absolute_floor: f64,
}

impl Default for VadConfig {
    fn default() -> Self {
        Self {
            frame: 0.030,
            hop: 0.010,
            relative_threshold: 0.05,
            absolute_floor: 1e-4,
        }
    }
}

/// Sample span retained by the trimmer: `start..end` indices into the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TrimBounds {
    pub start: usize,
    pub end: usize,
}

/// Trimmer output.
#[derive(Debug, Clone)]
pub struct Trimmed {
    pub buffer: AudioBuffer,
    pub bounds: TrimBounds,
    /// False when no frame cleared the gate and the input passed through
    /// unchanged.
    pub speech_detected: bool,
}

/// Trims leading and trailing low-energy audio.
///
/// The retained span runs from the start of the first frame over threshold
/// to the end of the last. Inputs shorter than one frame, or with no frame
/// over threshold, pass through unchanged with full bounds and
/// `speech_detected == false`.
pub fn trim_endpoints(buf: &AudioBuffer, cfg: &VadConfig) -> Trimmed {
    let n = buf.samples.len();
    let frame = ((cfg.frame * buf.sample_rate as f64).round() as usize).max(1);
    let hop = ((cfg.hop * buf.sample_rate as f64).round() as usize).max(1);

    let passthrough = |detected| Trimmed {
        buffer: buf.clone(),
        bounds: TrimBounds { start: 0, end: n },
        speech_detected: detected,
    };

    if n < frame {
        return passthrough(false);
    }

    let mut rms = Vec::new();
    let mut i = 0;
    while i + frame <= n {
        let e: f64 = buf.samples[i..i + frame].iter().map(|s| s * s).sum();
        rms.push((e / frame as f64).sqrt());
        i += hop;
    }

    let peak = rms.iter().cloned().fold(0.0, f64::max);
    let threshold = (cfg.relative_threshold * peak).max(cfg.absolute_floor);

    let first = rms.iter().position(|&r| r > threshold);
    let last = rms.iter().rposition(|&r| r > threshold);
    let (first, last) = match (first, last) {
        (Some(f), Some(l)) => (f, l),
        _ => return passthrough(false),
    };

    let start = first * hop;
    let end = (last * hop + frame).min(n);
    Trimmed {
        buffer: AudioBuffer {
            samples: buf.samples[start..end].to_vec(),
            sample_rate: buf.sample_rate,
            source_id: buf.source_id.clone(),
        },
        bounds: TrimBounds { start, end },
        speech_detected: true,
    }
}

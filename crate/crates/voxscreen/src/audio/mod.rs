//! Audio loading, resampling, and endpoint trimming.
//!
//! Recordings arrive from heterogeneous devices at arbitrary rates; this
//! module normalizes them into mono [`AudioBuffer`]s at a canonical analysis
//! rate (16 kHz by default) and strips the dead time before and after the
//! spoken sentence with a short-time energy gate.

mod resample;
mod trim;
mod wav;

pub use resample::resample;
pub use trim::{trim_endpoints, TrimBounds, Trimmed, VadConfig};
pub use wav::{read_wav, write_wav_f32, write_wav_i16};

use crate::error::{Error, Result};

/// Canonical analysis rate. All features are computed after resampling here
/// so band definitions and filterbanks are device-independent.
pub const CANONICAL_RATE: u32 = 16_000;

/// A mono audio signal with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    /// Amplitudes, nominally in [-1, 1].
    pub samples: Vec<f64>,
    /// Sample rate in Hz.
    pub sample_rate: u32,
    /// Opaque recording identifier (file stem or manifest id).
    pub source_id: String,
}

impl AudioBuffer {
    /// Builds a buffer, checking the type invariants: positive rate,
    /// non-empty, all samples finite.
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample_rate must be > 0".into()));
        }
        if samples.is_empty() {
            return Err(Error::EmptyAudio("buffer has no samples".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(
                "buffer contains non-finite samples".into(),
            ));
        }
        Ok(Self {
            samples,
            sample_rate,
            source_id: source_id.into(),
        })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

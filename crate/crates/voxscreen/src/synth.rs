//! Synthetic voice cohorts with known ground truth.
//!
//! The real cohort cannot ship, so acceptance rides on generated
//! recordings: pulse-train "voices" whose cycle periods and amplitudes are
//! perturbed by programmed amounts. Each pulse is a smooth raised-cosine
//! bump placed at an exact (fractional-sample) boundary, so the realized
//! period and amplitude sequences are known to the generator, which emits
//! them as analytic expectations next to the audio.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::config::derive_seed;
use crate::dataset::{Environment, Gender, Label, RecordMeta};
use crate::error::{Error, Result};

/// `mean |d| of consecutive differences of i.i.d. N(0, s)` equals
/// `s * 2 / sqrt(pi)`; dividing programmed perturbation targets by this
/// factor makes the realized local jitter/shimmer statistics land on
/// target in expectation.
const LOCAL_STAT_FACTOR: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Signal parameters of one class. Per-file values draw from normal
/// distributions centered on the class parameters; the `_sd` spreads
/// default to zero for exactly-programmed cohorts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassSpec {
    pub label: Label,
    /// Recordings to generate.
    pub n: usize,
    /// Base F0 distribution in Hz.
    pub f0_mean: f64,
    pub f0_sd: f64,
    /// Target local jitter (ratio, e.g. 0.01 for 1%).
    pub jitter: f64,
    #[serde(default)]
    pub jitter_sd: f64,
    /// Target local shimmer (ratio).
    pub shimmer: f64,
    #[serde(default)]
    pub shimmer_sd: f64,
    /// Additive white-noise level; the expected HNR in dB.
    pub snr_db: f64,
    #[serde(default)]
    pub snr_sd: f64,
    /// Voiced duration in seconds.
    pub duration: f64,
}

/// A cohort: class specs plus global generation settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortSpec {
    pub classes: Vec<ClassSpec>,
    #[serde(default = "default_rate")]
    pub sample_rate: u32,
    /// Silence padding before and after the voiced span, seconds.
    #[serde(default = "default_pad")]
    pub silence_pad: f64,
}

fn default_rate() -> u32 {
    crate::audio::CANONICAL_RATE
}

fn default_pad() -> f64 {
    0.25
}

impl CohortSpec {
    /// Two classes with separated but overlapping perturbation
    /// distributions, 30 recordings each; the default acceptance cohort.
    /// The overlap keeps any single feature from separating the classes
    /// alone, so models spread attribution across the informative set.
    pub fn default_cohort() -> Self {
        Self {
            classes: vec![
                ClassSpec {
                    label: Label::NonPd,
                    n: 30,
                    f0_mean: 126.0,
                    f0_sd: 11.0,
                    jitter: 0.007,
                    jitter_sd: 0.003,
                    shimmer: 0.02,
                    shimmer_sd: 0.008,
                    snr_db: 27.0,
                    snr_sd: 3.0,
                    duration: 2.5,
                },
                ClassSpec {
                    label: Label::Pd,
                    n: 30,
                    f0_mean: 114.0,
                    f0_sd: 11.0,
                    jitter: 0.020,
                    jitter_sd: 0.006,
                    shimmer: 0.05,
                    shimmer_sd: 0.015,
                    snr_db: 20.0,
                    snr_sd: 3.0,
                    duration: 2.5,
                },
            ],
            sample_rate: default_rate(),
            silence_pad: default_pad(),
        }
    }
}

/// Per-file analytic expectations, computed from the realized period and
/// amplitude sequences rather than the nominal class parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectedProperties {
    pub id: String,
    pub label: Label,
    pub f0: f64,
    pub local_jitter: f64,
    pub local_absolute_jitter: f64,
    pub local_shimmer: f64,
    pub hnr_db: f64,
}

/// One generated recording.
#[derive(Debug, Clone)]
pub struct SynthRecording {
    pub buffer: AudioBuffer,
    pub meta: RecordMeta,
    pub expected: ExpectedProperties,
}

/// Generates the whole cohort deterministically from the seed.
pub fn synth_cohort(spec: &CohortSpec, seed: u64) -> Result<Vec<SynthRecording>> {
    if spec.classes.is_empty() {
        return Err(Error::InvalidArgument("cohort has no classes".into()));
    }
    for c in &spec.classes {
        if c.n == 0 {
            return Err(Error::InvalidArgument(format!(
                "class {} has n = 0",
                c.label.as_str()
            )));
        }
        if c.f0_mean <= 0.0 || c.duration <= 0.0 {
            return Err(Error::InvalidArgument(
                "f0_mean and duration must be positive".into(),
            ));
        }
    }

    let mut out = Vec::new();
    let mut file_index = 0u64;
    for (ci, class) in spec.classes.iter().enumerate() {
        for k in 0..class.n {
            let id = format!("c{ci}-{}-{k:03}", class.label.as_str().to_lowercase());
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, file_index));
            out.push(synth_voice(&id, class, spec, k, &mut rng)?);
            file_index += 1;
        }
    }
    Ok(out)
}

/// Generates one pulse-train voice.
fn synth_voice(
    id: &str,
    class: &ClassSpec,
    spec: &CohortSpec,
    index_in_class: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SynthRecording> {
    let rate = spec.sample_rate as f64;
    let f0 = (class.f0_mean + class.f0_sd * rng.sample::<f64, _>(StandardNormal))
        .clamp(85.0, 320.0);
    let t0 = 1.0 / f0;

    // per-file parameter draws from the class distributions
    let jitter = (class.jitter + class.jitter_sd * rng.sample::<f64, _>(StandardNormal))
        .clamp(0.0, 0.06);
    let shimmer = (class.shimmer + class.shimmer_sd * rng.sample::<f64, _>(StandardNormal))
        .clamp(0.0, 0.15);
    let snr_db = (class.snr_db + class.snr_sd * rng.sample::<f64, _>(StandardNormal))
        .clamp(5.0, 45.0);

    // realized cycle sequences
    let sigma_period = jitter / LOCAL_STAT_FACTOR;
    let sigma_amp = shimmer / LOCAL_STAT_FACTOR;
    let n_cycles = (class.duration / t0).floor() as usize;
    if n_cycles < 16 {
        return Err(Error::InvalidArgument(format!(
            "duration {}s too short for f0 {f0:.1} Hz",
            class.duration
        )));
    }
    let mut boundaries = vec![spec.silence_pad];
    let mut periods = Vec::with_capacity(n_cycles);
    let mut amplitudes = Vec::with_capacity(n_cycles + 1);
    for _ in 0..n_cycles {
        let delta: f64 = rng.sample::<f64, _>(StandardNormal);
        let t = t0 * (1.0 + (sigma_period * delta).clamp(-0.18, 0.18));
        let last = *boundaries.last().unwrap();
        boundaries.push(last + t);
        periods.push(t);
    }
    for _ in 0..=n_cycles {
        let w: f64 = rng.sample::<f64, _>(StandardNormal);
        amplitudes.push(1.0 + (sigma_amp * w).clamp(-0.6, 0.6));
    }

    // waveform: raised-cosine pulses of fixed width at each boundary;
    // a quarter-period width keeps the peak sharp enough to localize to a
    // small fraction of a sample under the programmed noise
    let total = class.duration + 2.0 * spec.silence_pad;
    let n_samples = (total * rate).round() as usize;
    let mut samples = vec![0.0f64; n_samples];
    let width = 0.25 * t0;
    let peak = 0.45; // headroom for noise
    for (b, a) in boundaries.iter().zip(&amplitudes) {
        let lo = ((b - width / 2.0) * rate).floor().max(0.0) as usize;
        let hi = (((b + width / 2.0) * rate).ceil() as usize).min(n_samples);
        for i in lo..hi {
            let u = (i as f64 / rate - b) / (width / 2.0);
            if u.abs() < 1.0 {
                samples[i] += peak * a * 0.5 * (1.0 + (PI * u).cos());
            }
        }
    }

    // white noise across the whole file at the requested SNR relative to
    // the voiced-span signal power
    let voiced_lo = (spec.silence_pad * rate) as usize;
    let voiced_hi = ((spec.silence_pad + class.duration) * rate) as usize;
    let signal_power = samples[voiced_lo..voiced_hi.min(n_samples)]
        .iter()
        .map(|s| s * s)
        .sum::<f64>()
        / (voiced_hi - voiced_lo) as f64;
    let noise_sd = (signal_power / 10f64.powf(snr_db / 10.0)).sqrt();
    for s in &mut samples {
        *s += noise_sd * rng.sample::<f64, _>(StandardNormal);
    }

    // expectations from the realized sequences, using the same statistics
    // the extractor reports (the final boundary's amplitude is unseen by
    // the N cycle windows and is dropped)
    let n = periods.len();
    let mean_t: f64 = periods.iter().sum::<f64>() / n as f64;
    let abs_dt: Vec<f64> = periods.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let local_absolute_jitter = abs_dt.iter().sum::<f64>() / abs_dt.len() as f64;
    let local_jitter = local_absolute_jitter / mean_t;
    let cycle_amps = &amplitudes[..n];
    let mean_a: f64 = cycle_amps.iter().sum::<f64>() / n as f64;
    let abs_da: Vec<f64> = cycle_amps.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let local_shimmer = abs_da.iter().sum::<f64>() / abs_da.len() as f64 / mean_a;

    let expected = ExpectedProperties {
        id: id.to_string(),
        label: class.label,
        f0,
        local_jitter,
        local_absolute_jitter,
        local_shimmer,
        hnr_db: snr_db,
    };

    let gender = if index_in_class.is_multiple_of(2) {
        Gender::Male
    } else {
        Gender::Female
    };
    let age_center = match class.label {
        Label::Pd => 66.0,
        Label::NonPd => 58.0,
    };
    let age = (age_center + 9.0 * rng.sample::<f64, _>(StandardNormal)).clamp(30.0, 88.0);
    let environment = if index_in_class.is_multiple_of(15) {
        Environment::Lab
    } else {
        Environment::Home
    };

    Ok(SynthRecording {
        buffer: AudioBuffer::new(samples, spec.sample_rate, id)?,
        meta: RecordMeta::new(id, class.label, gender, age, environment, "US"),
        expected,
    })
}

/// Expectation sheet (`expected/1`): one entry per generated file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectationSheet {
    pub version: String,
    pub seed: u64,
    pub records: Vec<ExpectedProperties>,
}

impl ExpectationSheet {
    pub fn new(records: Vec<ExpectedProperties>, seed: u64) -> Self {
        Self {
            version: "expected/1".into(),
            seed,
            records,
        }
    }
}

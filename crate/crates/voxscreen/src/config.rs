//! Run configuration, seed derivation, and config fingerprinting.

use serde::{Deserialize, Serialize};

use crate::learn::TrainerConfig;

/// Derives an independent RNG stream from a base seed.
///
/// SplitMix64 over `seed + (stream + 1) * golden`, so consumers (folds,
/// trees, oversampling runs) are order-independent and reproducible.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add((stream.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything that shapes an end-to-end run. Serialized into every output
/// via [`PipelineConfig::fingerprint`] so results are attributable to an
/// exact configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub sample_rate: u32,
    pub f0_floor: f64,
    pub f0_ceil: f64,
    pub voicing_threshold: f64,
    pub all_features: bool,
    pub prune_threshold: f64,
    pub smote_k: usize,
    pub trainer: TrainerConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sample_rate: crate::audio::CANONICAL_RATE,
            f0_floor: 60.0,
            f0_ceil: 400.0,
            voicing_threshold: 0.45,
            all_features: false,
            prune_threshold: 0.9,
            smote_k: 5,
            trainer: TrainerConfig::Boosted(Default::default()),
            seed: 42,
        }
    }
}

impl PipelineConfig {
    /// Stable hex digest of the serialized configuration.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("config serialization cannot fail");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn pitch_config(&self) -> crate::pitch::PitchConfig {
        crate::pitch::PitchConfig {
            f0_floor: self.f0_floor,
            f0_ceil: self.f0_ceil,
            voicing_threshold: self.voicing_threshold,
            ..Default::default()
        }
    }

    pub fn feature_config(&self) -> crate::features::FeatureConfig {
        crate::features::FeatureConfig {
            pitch: self.pitch_config(),
            ..Default::default()
        }
    }
}

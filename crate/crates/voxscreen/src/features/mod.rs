//! The validated dysphonia feature set.
//!
//! `ClassicFeatures` covers the pitch, jitter, shimmer, MFCC, band-power,
//! and HNR groups; `NonlinearFeatures` covers RPDE, DFA, and PPE. The
//! canonical column order of the feature matrix lives in [`feature_names`];
//! the default set keeps the columns the correlation screen retained, and
//! `all = true` adds the pruned variants back.

pub mod nonlinear;
pub mod perturbation;
pub mod spectral;

pub use nonlinear::{dfa, ppe, rpde, rpde_from_periods, DfaAnalysis, DfaConfig, EmbedConfig};
pub use perturbation::{
    jitter_features, pitch_stats, shimmer_features, JitterFeatures, PitchStats, ShimmerFeatures,
};
pub use spectral::{mfcc_features, rel_band_power, MfccConfig, MfccFeatures};

use crate::audio::AudioBuffer;
use crate::error::Result;
use crate::pitch::{estimate_f0, extract_period_marks, hnr_from_track, PitchConfig};

/// Number of MFCC coefficients summarized.
pub const N_MFCC: usize = 13;

/// The perturbation, spectral, and harmonicity features of one recording.
#[derive(Debug, Clone)]
pub struct ClassicFeatures {
    pub pitch: PitchStats,
    pub jitter: JitterFeatures,
    pub shimmer: ShimmerFeatures,
    pub mfcc: MfccFeatures,
    pub rel_band_power: [f64; 4],
    pub hnr: f64,
}

/// The nonlinear dysphonia measures of one recording.
#[derive(Debug, Clone, Copy)]
pub struct NonlinearFeatures {
    pub rpde: f64,
    pub dfa: f64,
    pub ppe: f64,
}

/// Extraction settings for a whole recording.
#[derive(Debug, Clone, Default)]
pub struct FeatureConfig {
    pub pitch: PitchConfig,
    pub mfcc: MfccConfig,
    pub embed: EmbedConfig,
    pub dfa: DfaConfig,
}

/// Runs every feature extractor on an analysis-ready buffer.
pub fn extract_features(
    buf: &AudioBuffer,
    cfg: &FeatureConfig,
) -> Result<(ClassicFeatures, NonlinearFeatures)> {
    let track = estimate_f0(buf, &cfg.pitch)?;
    let marks = extract_period_marks(buf, &track)?;
    let classic = ClassicFeatures {
        pitch: pitch_stats(&track)?,
        jitter: jitter_features(&marks)?,
        shimmer: shimmer_features(&marks)?,
        mfcc: mfcc_features(buf, &cfg.mfcc)?,
        rel_band_power: rel_band_power(buf)?,
        hnr: hnr_from_track(&track)?,
    };
    let nonlinear = NonlinearFeatures {
        rpde: rpde(buf, &cfg.embed)?,
        dfa: dfa(buf, &cfg.dfa)?.normalized,
        ppe: ppe(&track)?,
    };
    Ok((classic, nonlinear))
}

/// Canonical feature-column names in matrix order.
///
/// With `all = false` this is the 44-column set kept after the correlation
/// screen; `all = true` interleaves the pruned variants at their table
/// positions for a 52-column set.
pub fn feature_names(all: bool) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(if all { 52 } else { 44 });
    names.push("MedianPitch".into());
    names.push("MeanPitch".into());
    names.push("StdDevPitch".into());
    names.push("MeanJitter".into());
    names.push("MedianJitter".into());
    if all {
        names.push("LocalJitter".into());
    }
    names.push("LocalAbsoluteJitter".into());
    if all {
        names.push("RapJitter".into());
        names.push("Ppq5Jitter".into());
    }
    names.push("DdpJitter".into());
    if all {
        names.push("MeanShimmer".into());
    }
    names.push("MedianShimmer".into());
    if all {
        names.push("LocalShimmer".into());
        names.push("LocaldbShimmer".into());
        names.push("Apq3Shimmer".into());
        names.push("Apq5Shimmer".into());
    }
    names.push("Apq11Shimmer".into());
    names.push("DdaShimmer".into());
    for i in 0..N_MFCC {
        names.push(format!("MeanMFCC{i}"));
    }
    for i in 0..N_MFCC {
        names.push(format!("VariationMFCC{i}"));
    }
    for i in 0..4 {
        names.push(format!("RelBandPower{i}"));
    }
    names.push("HNR".into());
    names.push("RPDE".into());
    names.push("DFA".into());
    names.push("PPE".into());
    names
}

/// Lays the feature values out in the canonical column order.
///
/// Unavailable values (`apq11` with few cycles) become `None` and are
/// rendered as the missing sentinel in the matrix.
pub fn feature_row(
    classic: &ClassicFeatures,
    nonlinear: &NonlinearFeatures,
    all: bool,
) -> Vec<Option<f64>> {
    let mut row: Vec<Option<f64>> = Vec::with_capacity(if all { 52 } else { 44 });
    row.push(Some(classic.pitch.median));
    row.push(Some(classic.pitch.mean));
    row.push(Some(classic.pitch.stddev));
    row.push(Some(classic.jitter.mean));
    row.push(Some(classic.jitter.median));
    if all {
        row.push(Some(classic.jitter.local));
    }
    row.push(Some(classic.jitter.local_absolute));
    if all {
        row.push(Some(classic.jitter.rap));
        row.push(Some(classic.jitter.ppq5));
    }
    row.push(Some(classic.jitter.ddp));
    if all {
        row.push(Some(classic.shimmer.mean));
    }
    row.push(Some(classic.shimmer.median));
    if all {
        row.push(Some(classic.shimmer.local));
        row.push(Some(classic.shimmer.local_db));
        row.push(Some(classic.shimmer.apq3));
        row.push(Some(classic.shimmer.apq5));
    }
    row.push(classic.shimmer.apq11);
    row.push(Some(classic.shimmer.dda));
    for i in 0..N_MFCC {
        row.push(Some(classic.mfcc.mean[i]));
    }
    for i in 0..N_MFCC {
        row.push(Some(classic.mfcc.variation[i]));
    }
    for p in classic.rel_band_power {
        row.push(Some(p));
    }
    row.push(Some(classic.hnr));
    row.push(Some(nonlinear.rpde));
    row.push(Some(nonlinear.dfa));
    row.push(Some(nonlinear.ppe));
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kept_name_list_has_44_columns() {
        let names = feature_names(false);
        assert_eq!(names.len(), 44);
        assert_eq!(names[0], "MedianPitch");
        assert_eq!(names[9], "DdaShimmer");
        assert_eq!(names[10], "MeanMFCC0");
        assert_eq!(names[43], "PPE");
        // kept set excludes the correlation-pruned variants
        assert!(!names.contains(&"LocalJitter".to_string()));
        assert!(!names.contains(&"Apq3Shimmer".to_string()));
    }

    #[test]
    fn full_name_list_has_52_columns() {
        let names = feature_names(true);
        assert_eq!(names.len(), 52);
        assert!(names.contains(&"LocalJitter".to_string()));
        assert!(names.contains(&"LocaldbShimmer".to_string()));
        // relative column order mirrors the feature table
        let idx = |n: &str| names.iter().position(|x| x == n).unwrap();
        assert!(idx("MeanJitter") < idx("LocalJitter"));
        assert!(idx("LocalJitter") < idx("LocalAbsoluteJitter"));
        assert!(idx("Apq5Shimmer") < idx("Apq11Shimmer"));
    }

    #[test]
    fn names_are_unique() {
        for all in [false, true] {
            let names = feature_names(all);
            let mut sorted = names.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), names.len());
        }
    }

    #[test]
    fn row_layout_matches_names() {
        let classic = ClassicFeatures {
            pitch: PitchStats {
                mean: 1.0,
                median: 2.0,
                stddev: 3.0,
            },
            jitter: JitterFeatures {
                local: 0.1,
                local_absolute: 0.2,
                rap: 0.3,
                ppq5: 0.4,
                ddp: 0.9,
                mean: 0.1,
                median: 0.5,
            },
            shimmer: ShimmerFeatures {
                local: 1.1,
                local_db: 1.2,
                apq3: 1.3,
                apq5: 1.4,
                apq11: None,
                dda: 3.9,
                mean: 1.1,
                median: 1.5,
            },
            mfcc: MfccFeatures {
                mean: (0..13).map(|i| i as f64).collect(),
                variation: (0..13).map(|i| 100.0 + i as f64).collect(),
            },
            rel_band_power: [0.4, 0.3, 0.2, 0.1],
            hnr: 17.0,
        };
        let nl = NonlinearFeatures {
            rpde: 0.5,
            dfa: 0.6,
            ppe: 0.7,
        };
        for all in [false, true] {
            let names = feature_names(all);
            let row = feature_row(&classic, &nl, all);
            assert_eq!(names.len(), row.len());
            let get = |n: &str| row[names.iter().position(|x| x == n).unwrap()];
            assert_eq!(get("MedianPitch"), Some(2.0));
            assert_eq!(get("Apq11Shimmer"), None); // sentinel preserved
            assert_eq!(get("DdaShimmer"), Some(3.9));
            assert_eq!(get("MeanMFCC5"), Some(5.0));
            assert_eq!(get("VariationMFCC12"), Some(112.0));
            assert_eq!(get("RelBandPower3"), Some(0.1));
            assert_eq!(get("PPE"), Some(0.7));
        }
    }

    #[test]
    fn assembly_is_deterministic() {
        let classic = ClassicFeatures {
            pitch: PitchStats {
                mean: 1.0,
                median: 2.0,
                stddev: 3.0,
            },
            jitter: JitterFeatures {
                local: 0.1,
                local_absolute: 0.2,
                rap: 0.3,
                ppq5: 0.4,
                ddp: 0.9,
                mean: 0.1,
                median: 0.5,
            },
            shimmer: ShimmerFeatures {
                local: 1.1,
                local_db: 1.2,
                apq3: 1.3,
                apq5: 1.4,
                apq11: Some(1.6),
                dda: 3.9,
                mean: 1.1,
                median: 1.5,
            },
            mfcc: MfccFeatures {
                mean: vec![0.0; 13],
                variation: vec![0.0; 13],
            },
            rel_band_power: [0.25; 4],
            hnr: 10.0,
        };
        let nl = NonlinearFeatures {
            rpde: 0.5,
            dfa: 0.6,
            ppe: 0.7,
        };
        assert_eq!(
            feature_row(&classic, &nl, false),
            feature_row(&classic, &nl, false)
        );
    }
}

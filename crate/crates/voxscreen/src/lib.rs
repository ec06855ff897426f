//! Dysphonia screening from running speech.
//!
//! `voxscreen` turns WAV recordings of a spoken sentence into a validated
//! set of acoustic dysphonia features (pitch statistics, jitter and shimmer
//! variants, MFCC summaries, relative band power, HNR, RPDE, DFA, PPE),
//! trains tree-ensemble classifiers under leave-one-out cross-validation,
//! and explains their predictions with exact Shapley attributions.
//!
//! The pipeline is a chain of small pure stages:
//!
//! ```text
//! WAV -> resample -> trim -> F0 track -> period marks -> feature vector
//!     -> feature matrix -> prune -> (SMOTE) -> forest / boosted trees
//!     -> LOOCV metrics -> TreeSHAP attributions
//! ```
//!
//! Every stage is deterministic given a seed; randomized consumers derive
//! their streams from `(seed, stream)` so runs reproduce byte for byte.
//!
//! The `book/` guide walks through each stage's definitions; its snippets
//! compile and run as doctests of this crate (`cargo test --doc`).

pub mod audio;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod explain;
pub mod features;
pub mod learn;
pub mod pitch;
pub mod synth;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book;

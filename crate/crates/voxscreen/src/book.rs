//! The guide's code snippets, compiled and run by `cargo test --doc` so
//! the book can never drift from the library.

macro_rules! chapter {
    ($name:ident, $path:literal) => {
        #[doc = include_str!($path)]
        mod $name {}
    };
}

chapter!(introduction, "../../../book/src/introduction.md");
chapter!(audio_pipeline, "../../../book/src/audio-pipeline.md");
chapter!(pitch_and_cycles, "../../../book/src/pitch-and-cycles.md");
chapter!(perturbation_features, "../../../book/src/perturbation-features.md");
chapter!(spectral_features, "../../../book/src/spectral-features.md");
chapter!(nonlinear_measures, "../../../book/src/nonlinear-measures.md");
chapter!(feature_matrix, "../../../book/src/feature-matrix.md");
chapter!(tree_ensembles, "../../../book/src/tree-ensembles.md");
chapter!(evaluation, "../../../book/src/evaluation.md");
chapter!(attribution, "../../../book/src/attribution.md");
chapter!(command_line, "../../../book/src/command-line.md");

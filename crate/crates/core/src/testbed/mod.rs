//! Target functions, synthetic data and seeded experiments.

pub mod best_fit;
pub mod corpus;
pub mod data;
pub mod experiment;
pub mod presets;

pub use best_fit::{best_fit_coefficients, best_fit_coefficients_order_q, TermTransform};
pub use corpus::{corpus, Corpus, CorpusOptions, SincConvention, Structure, TargetFunction, Term};
pub use data::{
    evaluate_target, grid_1d, sample_dataset, sample_points, sample_test_set, NoiseKind, NoiseSpec,
};
pub use experiment::{
    run_experiment, Baseline, Curve, ExperimentConfig, ExperimentReport, SeedRecord, Spread,
    Summary, TestSet,
};
pub use presets::{preset, SamplerKind, PRESETS};

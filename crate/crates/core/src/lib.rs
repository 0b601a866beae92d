//! Sparse random feature expansions.
//!
//! Random features `φ(⟨x, ω_j⟩ + b_j)` with (optionally sparse) Gaussian
//! weights, fitted by basis pursuit denoising. The core is generic over the
//! field: `f32`/`f64` for real activations and `Complex<f32>`/`Complex<f64>`
//! for the complex exponential.

pub mod diagnostics;
pub mod error;
pub mod feature_map;
pub mod linalg;
pub mod pipeline;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod solver;
pub mod testbed;

pub use error::{Result, SrfeError};
pub use feature_map::{
    build_feature_matrix, evaluate_expansion, ActivationKind, FeatureMatrix, PointSet, Provenance,
};
pub use linalg::Matrix;
pub use pipeline::{fit_srfe, fit_srfe_s, fit_with_weights, relative_error, FitConfig, SrfeModel};
pub use sampling::{draw_weights, SamplingConfig, Scheme, WeightSet};
pub use scalar::{Real, Scalar};
pub use solver::{
    prune_top_s, solve_bpdn, verify_kkt, CoefficientVector, SolveReport, SolverConfig, SolverMethod,
};

pub use num_complex::Complex;

pub type C32 = Complex<f32>;
pub type C64 = Complex<f64>;
pub type RealModel = SrfeModel<f64>;
pub type ComplexModel = SrfeModel<C64>;
pub type RealPoints = PointSet<f64>;
pub type RealWeights = WeightSet<f64>;

//! End-to-end fitting: sample weights, build features, solve, prune.

use serde::{Deserialize, Serialize};

use crate::diagnostics::binomial_f64;
use crate::error::{config_err, shape_err, Result, SrfeError};
use crate::feature_map::{build_feature_matrix, evaluate_expansion, ActivationKind, PointSet};
use crate::sampling::{draw_weights, SamplingConfig, WeightSet};
use crate::scalar::{Real, Scalar};
use crate::solver::{prune_top_s, solve_bpdn, CoefficientVector, SolveReport, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub sampling: SamplingConfig,
    pub activation: ActivationKind,
    /// Noise level; overrides `solver.eta`.
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prune_s: Option<usize>,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl FitConfig {
    pub fn new(sampling: SamplingConfig, activation: ActivationKind, eta: f64) -> Self {
        Self {
            sampling,
            activation,
            eta,
            prune_s: None,
            solver: SolverConfig::default(),
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            eta: self.eta,
            ..self.solver.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sampling.validate()?;
        self.solver_config().validate()
    }
}

/// A fitted random feature expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct SrfeModel<S: Scalar> {
    pub weights: WeightSet<S::Real>,
    pub activation: ActivationKind,
    pub coefficients: CoefficientVector<S>,
    pub pruned_to: Option<usize>,
    pub fit_report: SolveReport,
}

impl<S: Scalar> SrfeModel<S> {
    /// `f♯` at each point.
    pub fn predict(&self, points: &PointSet<S::Real>) -> Result<Vec<S>> {
        evaluate_expansion(
            &self.weights,
            self.activation,
            self.coefficients.values(),
            points,
        )
    }

    pub fn sparsity(&self) -> usize {
        self.coefficients.sparsity()
    }
}

/// Dense-weight fit.
pub fn fit_srfe<S: Scalar>(
    points: &PointSet<S::Real>,
    y: &[S],
    config: &FitConfig,
) -> Result<SrfeModel<S>> {
    if config.sampling.scheme.is_sparse() {
        return Err(config_err(
            "fit_srfe needs the dense scheme; use fit_srfe_s for sparse weights",
        ));
    }
    fit(points, y, config)
}

/// Sparse-weight fit (complete, random-subset or Bernoulli supports).
pub fn fit_srfe_s<S: Scalar>(
    points: &PointSet<S::Real>,
    y: &[S],
    config: &FitConfig,
) -> Result<SrfeModel<S>> {
    if !config.sampling.scheme.is_sparse() {
        return Err(config_err(
            "fit_srfe_s needs a sparse scheme; use fit_srfe for dense weights",
        ));
    }
    fit(points, y, config)
}

fn fit<S: Scalar>(points: &PointSet<S::Real>, y: &[S], config: &FitConfig) -> Result<SrfeModel<S>> {
    config.validate()?;
    if config.sampling.dim != points.dim() {
        return Err(shape_err(format!(
            "sampling dimension {} does not match data dimension {}",
            config.sampling.dim,
            points.dim()
        )));
    }
    let weights = draw_weights::<S::Real>(&config.sampling)?;
    fit_with_weights(
        points,
        y,
        weights,
        config.activation,
        &config.solver_config(),
        config.prune_s,
    )
}

/// Fits coefficients for a given weight set.
pub fn fit_with_weights<S: Scalar>(
    points: &PointSet<S::Real>,
    y: &[S],
    weights: WeightSet<S::Real>,
    activation: ActivationKind,
    solver: &SolverConfig,
    prune_s: Option<usize>,
) -> Result<SrfeModel<S>> {
    if y.len() != points.len() {
        return Err(shape_err(format!(
            "{} targets for {} points",
            y.len(),
            points.len()
        )));
    }
    let a = build_feature_matrix::<S>(points, &weights, activation)?;
    let (c, report) = solve_bpdn(a.matrix(), y, solver)?;
    let coefficients = match prune_s {
        Some(s) => prune_top_s(&c, s),
        None => c,
    };
    Ok(SrfeModel {
        weights,
        activation,
        coefficients,
        pruned_to: prune_s,
        fit_report: report,
    })
}

/// `√(Σ|f − f♯|² / Σ|f|²)`.
pub fn relative_error<S: Scalar>(predicted: &[S], truth: &[S]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(shape_err(format!(
            "{} predictions for {} targets",
            predicted.len(),
            truth.len()
        )));
    }
    let den: f64 = truth.iter().map(|v| v.norm_sqr().as_f64()).sum();
    if !(den > 0.0) {
        return Err(SrfeError::ZeroReference);
    }
    let num: f64 = predicted
        .iter()
        .zip(truth)
        .map(|(&p, &t)| (p - t).norm_sqr().as_f64())
        .sum();
    Ok((num / den).sqrt())
}

/// Relative error of `model` on a held-out set.
pub fn relative_test_error<S: Scalar>(
    model: &SrfeModel<S>,
    points: &PointSet<S::Real>,
    truth: &[S],
) -> Result<f64> {
    relative_error(&model.predict(points)?, truth)
}

fn check_nonneg(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(v.is_finite() && *v >= 0.0) {
            return Err(config_err(format!("{name} must be non-negative, got {v}")));
        }
    }
    Ok(())
}

/// `η = √(2(ε²‖f‖²_ρ + E²))`.
pub fn eta_from_theory(epsilon: f64, rho_norm: f64, noise_bound: f64) -> Result<f64> {
    check_nonneg(&[
        ("epsilon", epsilon),
        ("rho_norm", rho_norm),
        ("noise_bound", noise_bound),
    ])?;
    Ok((2.0 * (epsilon * epsilon * rho_norm * rho_norm + noise_bound * noise_bound)).sqrt())
}

/// `η = √(2ε² C(d,q) |||f|||² + 2E²)` for order-`q` targets.
pub fn eta_from_theory_order_q(
    epsilon: f64,
    d: usize,
    q: usize,
    triple_norm: f64,
    noise_bound: f64,
) -> Result<f64> {
    check_nonneg(&[
        ("epsilon", epsilon),
        ("triple_norm", triple_norm),
        ("noise_bound", noise_bound),
    ])?;
    if q == 0 || q > d {
        return Err(config_err(format!(
            "need 1 <= q <= d, got q = {q}, d = {d}"
        )));
    }
    let b = binomial_f64(d, q)?;
    Ok(
        (2.0 * epsilon * epsilon * b * triple_norm * triple_norm + 2.0 * noise_bound * noise_bound)
            .sqrt(),
    )
}

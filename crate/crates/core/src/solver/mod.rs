//! Basis pursuit denoising
//!
//! ```text
//! minimize ‖c‖₁  subject to  ‖A c − y‖₂ ≤ η √m
//! ```
//!
//! over real or complex coefficients, together with a least-squares baseline
//! and top-`s` pruning.
//!
//! Two algorithms are available. For real fields the default is an exact
//! homotopy (LASSO path) that follows the solution of the penalized problem as
//! the penalty decreases and stops where the residual norm reaches the radius.
//! For complex fields the default is ADMM in graph form, which factors
//! `I + AAᴴ` once. Both finish with a polishing step on the detected support
//! and report a KKT certificate from [`verify_kkt`].

mod admm;
mod homotopy;
mod kkt;
mod lstsq;
mod polish;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, shape_err, Result, SrfeError};
use crate::linalg::Matrix;
use crate::scalar::{norm1, norm2, Real, Scalar};

pub use kkt::{verify_kkt, KktCertificate};

/// Coefficients of a random feature expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector<S> {
    values: Vec<S>,
    zero_tol: f64,
}

impl<S: Scalar> CoefficientVector<S> {
    pub fn new(values: Vec<S>, zero_tol: f64) -> Result<Self> {
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(SrfeError::Numerical(format!(
                "coefficient {j} is not finite"
            )));
        }
        Ok(Self { values, zero_tol })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![S::zero(); n],
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    /// Number of entries with magnitude above `zero_tol`.
    pub fn sparsity(&self) -> usize {
        self.values
            .iter()
            .filter(|v| v.modulus().as_f64() > self.zero_tol)
            .count()
    }

    pub fn l1_norm(&self) -> f64 {
        norm1(&self.values).as_f64()
    }

    pub fn l2_norm(&self) -> f64 {
        norm2(&self.values).as_f64()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    /// Homotopy for real fields, ADMM for complex ones.
    #[default]
    Auto,
    Admm,
    Homotopy,
}

pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Noise level `η`; the constraint radius is `η√m`.
    pub eta: f64,
    pub max_iters: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Initial ADMM penalty.
    pub penalty: f64,
    pub zero_tol: f64,
    pub method: SolverMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eta: 0.0,
            max_iters: 20_000,
            abs_tol: 1e-7,
            rel_tol: 1e-5,
            penalty: 1.0,
            zero_tol: DEFAULT_ZERO_TOL,
            method: SolverMethod::Auto,
        }
    }
}

impl SolverConfig {
    pub fn with_eta(eta: f64) -> Self {
        Self {
            eta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(config_err(format!(
                "eta must be non-negative, got {}",
                self.eta
            )));
        }
        for (name, v) in [
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("penalty", self.penalty),
            ("zero_tol", self.zero_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(config_err(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(config_err("max_iters must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: SolverMethod,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `‖Ac♯ − y‖₂ − η√m`; non-positive for feasible output.
    pub feasibility_gap: f64,
    /// `‖c♯‖₁`.
    pub objective: f64,
    /// Multiplier of the residual constraint.
    pub lambda: f64,
    pub kkt_violation: f64,
    pub converged: bool,
}

/// Raw solver output before polishing and certification.
pub(crate) struct RawSolution<S> {
    pub c: Vec<S>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
}

/// Solves the BPDN problem with radius `config.eta · √m`.
pub fn solve_bpdn<S: Scalar>(
    a: &Matrix<S>,
    y: &[S],
    config: &SolverConfig,
) -> Result<(CoefficientVector<S>, SolveReport)> {
    config.validate()?;
    if y.len() != a.rows() {
        return Err(shape_err(format!(
            "{} observations for {} rows",
            y.len(),
            a.rows()
        )));
    }
    if let Some(k) = y.iter().position(|v| !v.is_finite()) {
        return Err(SrfeError::Numerical(format!(
            "observation {k} is not finite"
        )));
    }
    let m = a.rows();
    let radius = config.eta * (m as f64).sqrt();
    let method = match config.method {
        SolverMethod::Auto if S::IS_REAL => SolverMethod::Homotopy,
        SolverMethod::Auto => SolverMethod::Admm,
        other => other,
    };
    if method == SolverMethod::Homotopy && !S::IS_REAL {
        return Err(config_err("the homotopy solver needs a real scalar type"));
    }
    let r = S::Real::of(radius);

    let raw = if norm2(y) <= r {
        RawSolution {
            c: vec![S::zero(); a.cols()],
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            converged: true,
        }
    } else if method == SolverMethod::Homotopy {
        homotopy::solve(a, y, r, config)?
    } else {
        admm::solve(a, y, r, config)?
    };

    let c = if raw.c.iter().all(|v| *v == S::zero()) {
        raw.c
    } else {
        polish::polish(a, y, r, raw.c)
    };

    let residual: Vec<S> = {
        let ac = a.mul_vec(&c)?;
        y.iter().zip(ac).map(|(&u, v)| u - v).collect()
    };
    let rnorm = norm2(&residual).as_f64();
    let cert = verify_kkt(a, y, &c, radius)?;
    let report = SolveReport {
        method,
        iterations: raw.iterations,
        primal_residual: raw.primal_residual,
        dual_residual: raw.dual_residual,
        feasibility_gap: rnorm - radius,
        objective: norm1(&c).as_f64(),
        lambda: cert.lambda,
        kkt_violation: cert.max_violation,
        converged: raw.converged,
    };
    log::debug!(
        "bpdn {:?}: {} iterations, |c|_1 = {:.6e}, gap = {:.3e}, kkt = {:.3e}",
        method,
        report.iterations,
        report.objective,
        report.feasibility_gap,
        report.kkt_violation
    );
    Ok((CoefficientVector::new(c, config.zero_tol)?, report))
}

/// Minimum-norm least-squares solution of `A c ≈ y`.
pub fn least_squares<S: Scalar>(a: &Matrix<S>, y: &[S]) -> Result<CoefficientVector<S>> {
    if y.len() != a.rows() {
        return Err(shape_err(format!(
            "{} observations for {} rows",
            y.len(),
            a.rows()
        )));
    }
    let (c, _) = lstsq::min_norm_lstsq(a, y);
    CoefficientVector::new(c, DEFAULT_ZERO_TOL)
}

/// Indices of the `s` largest-magnitude entries, ties broken by lower index.
pub(crate) fn top_s_indices<S: Scalar>(values: &[S], s: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    let mags: Vec<S::Real> = values.iter().map(|v| v.modulus()).collect();
    // Stable sort keeps lower indices first among equal magnitudes.
    idx.sort_by(|&i, &j| {
        mags[j]
            .partial_cmp(&mags[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    idx.truncate(s);
    idx
}

/// Keeps the `s` largest-magnitude coefficients and zeroes the rest. `s`
/// larger than the length is clamped.
pub fn prune_top_s<S: Scalar>(c: &CoefficientVector<S>, s: usize) -> CoefficientVector<S> {
    let n = c.len();
    let s = if s > n {
        log::warn!("pruning level {s} exceeds coefficient count {n}; keeping all");
        n
    } else {
        s
    };
    let mut out = vec![S::zero(); n];
    for j in top_s_indices(c.values(), s) {
        out[j] = c.values()[j];
    }
    CoefficientVector {
        values: out,
        zero_tol: c.zero_tol,
    }
}

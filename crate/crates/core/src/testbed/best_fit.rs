//! Monte Carlo coefficients `c*_j = α(ω_j) / (N ρ(ω_j))` for targets with a
//! known transform.

use crate::error::{config_err, Result, SrfeError};
use crate::sampling::WeightSet;
use crate::scalar::Scalar;
use crate::solver::{CoefficientVector, DEFAULT_ZERO_TOL};

fn density_at(rho: &impl Fn(&[f64]) -> f64, omega: &[f64], j: usize) -> Result<f64> {
    let p = rho(omega);
    if p.is_finite() && p > 0.0 {
        Ok(p)
    } else {
        Err(SrfeError::Numerical(format!(
            "sampling density is {p} at weight {j}"
        )))
    }
}

/// `c*_j = α(ω_j) / (N ρ(ω_j))`.
pub fn best_fit_coefficients<S, A, P>(
    alpha: A,
    rho: P,
    weights: &WeightSet<f64>,
) -> Result<CoefficientVector<S>>
where
    S: Scalar<Real = f64>,
    A: Fn(&[f64]) -> S,
    P: Fn(&[f64]) -> f64,
{
    let n = weights.len() as f64;
    let c = weights
        .weights()
        .enumerate()
        .map(|(j, w)| Ok(alpha(w).scale(1.0 / (n * density_at(&rho, w, j)?))))
        .collect::<Result<Vec<S>>>()?;
    CoefficientVector::new(c, DEFAULT_ZERO_TOL)
}

/// Transform of one term `g_ℓ`, supported on `support`.
pub struct TermTransform<'a, S> {
    pub support: Vec<usize>,
    /// `α_ℓ` evaluated at the weight restricted to `support`.
    pub alpha: Box<dyn Fn(&[f64]) -> S + Sync + 'a>,
}

/// Per-term variant for order-`q` targets and complete sparse weights:
/// `c̃_j = (1/K) Σ_ℓ α_ℓ(ω_j) / (n ρ(ω_j))` over terms whose support equals
/// `supp(ω_j)`. `rho` is the density of the nonzero block of `ω_j`.
pub fn best_fit_coefficients_order_q<S, P>(
    terms: &[TermTransform<'_, S>],
    rho: P,
    weights: &WeightSet<f64>,
) -> Result<CoefficientVector<S>>
where
    S: Scalar<Real = f64>,
    P: Fn(&[f64]) -> f64,
{
    let n = weights
        .n_per_subset()
        .ok_or_else(|| config_err("per-term coefficients need the complete sparse scheme"))?
        as f64;
    if terms.is_empty() {
        return Err(config_err("at least one term is required"));
    }
    let k = terms.len() as f64;
    let mut c = Vec::with_capacity(weights.len());
    let mut restricted = Vec::new();
    for (j, w) in weights.weights().enumerate() {
        let supp = weights.support(j);
        let mut acc = S::zero();
        for t in terms.iter().filter(|t| t.support.as_slice() == supp) {
            restricted.clear();
            restricted.extend(supp.iter().map(|&i| w[i]));
            acc += (t.alpha)(&restricted).scale(1.0 / (n * density_at(&rho, &restricted, j)?));
        }
        c.push(acc.scale(1.0 / k));
    }
    CoefficientVector::new(c, DEFAULT_ZERO_TOL)
}

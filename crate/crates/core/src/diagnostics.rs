//! Closed-form theoretical quantities: coherence, recovery thresholds,
//! complexity bounds and best `s`-term errors.

use num_traits::{Float, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result, SrfeError};
use crate::linalg::Matrix;
use crate::sampling::binomial;
use crate::scalar::{dot_c, norm2, Real, Scalar};
use crate::solver::top_s_indices;

/// Parameters shared by the recovery and complexity bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryParams {
    /// Standard deviation of the data distribution.
    pub gamma: f64,
    /// Standard deviation of the feature weights.
    pub sigma: f64,
    pub d: usize,
    /// Feature sparsity; `q = d` gives the dense bounds.
    pub q: usize,
    /// Target sparsity.
    pub s: usize,
    pub n_features: usize,
    pub m: usize,
    pub delta: f64,
    pub epsilon: f64,
}

impl TheoryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite())
            || !(self.sigma > 0.0 && self.sigma.is_finite())
        {
            return Err(config_err("gamma and sigma must be positive"));
        }
        if self.d == 0 || self.q == 0 || self.q > self.d {
            return Err(config_err(format!(
                "need 1 <= q <= d, got q = {}, d = {}",
                self.q, self.d
            )));
        }
        if self.s == 0 {
            return Err(config_err("s must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(config_err(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(config_err("epsilon must be positive"));
        }
        if self.m == 0 || self.n_features == 0 {
            return Err(config_err("m and N must be positive"));
        }
        Ok(())
    }

    fn gs2(&self) -> f64 {
        (self.gamma * self.sigma).powi(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub mu: f64,
    /// Column pair attaining `mu`.
    pub worst_pair: Option<(usize, usize)>,
    /// Zero columns left out of the maximum.
    pub excluded_columns: Vec<usize>,
    pub threshold: f64,
    pub passes: bool,
}

/// Mutual coherence `max_{j≠ℓ} |⟨a_j, a_ℓ⟩| / (‖a_j‖‖a_ℓ‖)`, compared against
/// the recovery threshold for sparsity `s`.
pub fn mutual_coherence<S: Scalar>(a: &Matrix<S>, s: usize) -> Result<CoherenceReport> {
    let threshold = coherence_threshold(s)?;
    if a.cols() < 2 {
        return Err(config_err("coherence needs at least two columns"));
    }
    let cols = a.columns();
    let mut excluded = Vec::new();
    let mut normalized: Vec<(usize, Vec<S>)> = Vec::with_capacity(cols.len());
    for (j, col) in cols.into_iter().enumerate() {
        let nrm = norm2(&col);
        if nrm == S::Real::zero() {
            excluded.push(j);
        } else {
            normalized.push((j, col.into_iter().map(|v| v.scale(nrm.recip())).collect()));
        }
    }
    let per_column: Vec<(f64, Option<(usize, usize)>)> = (0..normalized.len())
        .into_par_iter()
        .map(|p| {
            let (j, ref u) = normalized[p];
            let mut best = (0.0, None);
            for (l, v) in &normalized[p + 1..] {
                let c = dot_c(u, v).modulus().as_f64().min(1.0);
                if c > best.0 || best.1.is_none() {
                    best = (c, Some((j, *l)));
                }
            }
            best
        })
        .collect();
    let mut mu = 0.0;
    let mut worst = None;
    for (c, pair) in per_column {
        if pair.is_some() && (worst.is_none() || c > mu) {
            mu = c;
            worst = pair;
        }
    }
    Ok(CoherenceReport {
        mu,
        worst_pair: worst,
        excluded_columns: excluded,
        threshold,
        passes: mu <= threshold,
    })
}

/// `4 / (√41 (2s − 1))`.
pub fn coherence_threshold(s: usize) -> Result<f64> {
    if s == 0 {
        return Err(config_err("sparsity must be at least 1"));
    }
    Ok(4.0 / (41f64.sqrt() * (2 * s - 1) as f64))
}

/// Smallest admissible `γ²σ²`: `½((√41(2s − 1)/2)^{2/q} − 1)`.
pub fn uncertainty_lower_bound(s: usize, q: usize) -> Result<f64> {
    if s == 0 || q == 0 {
        return Err(config_err("s and q must be at least 1"));
    }
    let base = 41f64.sqrt() * (2 * s - 1) as f64 / 2.0;
    Ok(0.5 * (base.powf(2.0 / q as f64) - 1.0))
}

fn feature_bound_with_tail(p: &TheoryParams, tail: f64) -> Result<f64> {
    p.validate()?;
    let d = p.d as f64;
    let log_term = (p.m as f64 / p.delta).ln();
    if log_term < 0.0 {
        return Err(config_err("m must be at least delta"));
    }
    let inner = 1.0 + (12.0 / d * log_term).sqrt();
    let core = 1.0 + 4.0 * p.gamma * p.sigma * d * inner.sqrt() + tail;
    Ok(4.0 / (p.epsilon * p.epsilon) * core * core)
}

/// Dense feature count bound
/// `(4/ε²)(1 + 4γσd√(1 + √((12/d)log(m/δ))) + √(½log(1/δ)))²`.
pub fn feature_count_bound(p: &TheoryParams) -> Result<f64> {
    feature_bound_with_tail(p, (0.5 * (1.0 / p.delta).ln()).sqrt())
}

/// Feature count bound for `q`-sparse weights; the last term becomes
/// `√((q/2)log(d/δ))`.
pub fn feature_count_bound_order_q(p: &TheoryParams) -> Result<f64> {
    feature_bound_with_tail(p, (p.q as f64 / 2.0 * (p.d as f64 / p.delta).ln()).sqrt())
}

/// `4(2γ²σ²+1)^{max(2q−d,0)} (γ²σ²+1)^{min(2q,2d−2q)} log(N²/δ)`.
pub fn measurement_count_bound(p: &TheoryParams) -> Result<f64> {
    p.validate()?;
    let a = p.gs2();
    let e1 = (2 * p.q).saturating_sub(p.d) as i32;
    let e2 = (2 * p.q).min(2 * p.d - 2 * p.q) as i32;
    let n = p.n_features as f64;
    Ok(4.0 * (2.0 * a + 1.0).powi(e1) * (a + 1.0).powi(e2) * (n * n / p.delta).ln())
}

/// Dense measurement bound `4(2γ²σ²+1)^d log(N²/δ)`.
pub fn measurement_count_bound_dense(p: &TheoryParams) -> Result<f64> {
    p.validate()?;
    let n = p.n_features as f64;
    Ok(4.0 * (2.0 * p.gs2() + 1.0).powi(p.d as i32) * (n * n / p.delta).ln())
}

/// Per-sample expectation `Γ` of `exp(i⟨ω_j − ω_ℓ, x⟩)` for `x ~ N(0, γ²I)`
/// and `q`-sparse Gaussian weights whose supports share `overlap`
/// coordinates: `(2γ²σ²+1)^{−|G|/2} (γ²σ²+1)^{−(q−|G|)}`.
pub fn expected_gram(gamma: f64, sigma: f64, d: usize, q: usize, overlap: usize) -> Result<f64> {
    if q == 0 || q > d {
        return Err(config_err(format!(
            "need 1 <= q <= d, got q = {q}, d = {d}"
        )));
    }
    let lo = (2 * q).saturating_sub(d);
    if overlap < lo || overlap > q {
        return Err(config_err(format!(
            "overlap must lie in {lo}..={q}, got {overlap}"
        )));
    }
    if !(gamma >= 0.0 && sigma >= 0.0) {
        return Err(config_err("gamma and sigma must be non-negative"));
    }
    let a = (gamma * sigma).powi(2);
    Ok((2.0 * a + 1.0).powf(-(overlap as f64) / 2.0) * (a + 1.0).powi(-((q - overlap) as i32)))
}

/// `(Γ_min, Γ_max)` over all admissible overlaps.
pub fn gram_extremes(gamma: f64, sigma: f64, d: usize, q: usize) -> Result<(f64, f64)> {
    let lo = (2 * q).saturating_sub(d);
    let vals: Vec<f64> = (lo..=q)
        .map(|g| expected_gram(gamma, sigma, d, q, g))
        .collect::<Result<_>>()?;
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(0.0, f64::max);
    Ok((min, max))
}

/// `κ_{s,p}(c)`: the `ℓp` norm of `c` outside its `s` largest entries.
pub fn best_s_term_error<S: Scalar>(c: &[S], s: usize, p: u32) -> Result<f64> {
    if p != 1 && p != 2 {
        return Err(config_err(format!("p must be 1 or 2, got {p}")));
    }
    let mut keep = vec![false; c.len()];
    for j in top_s_indices(c, s.min(c.len())) {
        keep[j] = true;
    }
    let tail = c
        .iter()
        .zip(&keep)
        .filter(|(_, k)| !**k)
        .map(|(v, _)| v.modulus().as_f64());
    Ok(if p == 1 {
        tail.sum()
    } else {
        tail.map(|v| v * v).sum::<f64>().sqrt()
    })
}

/// Radius containing `m` draws from `N(0, γ²I_d)` with probability `1 − δ`:
/// `γ√(d + √(12d log(m/δ)))`.
pub fn sample_radius_bound(gamma: f64, d: usize, m: usize, delta: f64) -> Result<f64> {
    if !(gamma > 0.0) || d == 0 || m == 0 || !(delta > 0.0 && delta < 1.0) {
        return Err(config_err("need gamma > 0, d >= 1, m >= 1, 0 < delta < 1"));
    }
    sample_radius_bound_real(gamma, d as f64, m as f64, delta)
}

pub(crate) fn sample_radius_bound_real(gamma: f64, d: f64, m: f64, delta: f64) -> Result<f64> {
    let l = (m / delta).ln();
    if l < 0.0 {
        return Err(config_err("m must be at least delta"));
    }
    Ok(gamma * (d + (12.0 * d * l).sqrt()).sqrt())
}

/// `ρ`-norm of `f(x) = exp(−x²/(2σ_f²))` for `ρ = N(0, σ_ρ²)` in one
/// dimension. The ratio `α/ρ = σ_fσ_ρ exp(−ω²(σ_f² − σ_ρ⁻²)/2)` is bounded
/// iff `σ_ρ ≥ 1/σ_f`, with supremum `σ_fσ_ρ` at `ω = 0`.
pub fn rho_norm_gaussian_target(sigma_f: f64, sigma_rho: f64) -> Result<f64> {
    if !(sigma_f > 0.0 && sigma_rho > 0.0) {
        return Err(config_err("standard deviations must be positive"));
    }
    if sigma_rho * sigma_f < 1.0 {
        return Err(SrfeError::UnboundedRhoNorm(format!(
            "sigma_rho = {sigma_rho} is below 1/sigma_f = {}",
            1.0 / sigma_f
        )));
    }
    Ok(sigma_f * sigma_rho)
}

/// Transform `α(ω) = σ_f/√(2π) · exp(−σ_f²ω²/2)` of the 1-D Gaussian target,
/// normalized so that `f(x) = ∫ α(ω) e^{iωx} dω`.
pub fn gaussian_target_transform(sigma_f: f64, omega: f64) -> f64 {
    sigma_f / (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * (sigma_f * omega).powi(2)).exp()
}

/// Density of `N(0, σ²I_k)` at `omega` (`k = omega.len()`).
pub fn gaussian_density(sigma: f64, omega: &[f64]) -> f64 {
    let k = omega.len() as f64;
    let sq: f64 = omega.iter().map(|w| w * w).sum();
    (2.0 * std::f64::consts::PI * sigma * sigma).powf(-k / 2.0)
        * (-sq / (2.0 * sigma * sigma)).exp()
}

/// Feature count from the Monte Carlo approximation lemma:
/// `N ≥ (1/ε²)(1 + √(2 log(1/δ)))²`, rounded up.
pub fn lemma1_feature_bound(epsilon: f64, delta: f64) -> Result<usize> {
    if !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(config_err("need epsilon > 0 and 0 < delta < 1"));
    }
    let v = (1.0 + (2.0 * (1.0 / delta).ln()).sqrt()).powi(2) / (epsilon * epsilon);
    Ok(v.ceil() as usize)
}

/// `C(d, q)` as a float, for the order-`q` η formula.
pub(crate) fn binomial_f64(d: usize, q: usize) -> Result<f64> {
    binomial(d, q)
        .map(|b| b as f64)
        .ok_or_else(|| config_err(format!("C({d}, {q}) overflows")))
}

/// Every bound for one parameter set, for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub params: TheoryParams,
    pub coherence_threshold: f64,
    pub uncertainty_lower_bound: f64,
    pub uncertainty_satisfied: bool,
    pub feature_count_bound: f64,
    pub measurement_count_bound: f64,
    pub gram_min: f64,
    pub gram_max: f64,
    pub sample_radius: f64,
}

pub fn summarize(p: &TheoryParams) -> Result<BoundSummary> {
    p.validate()?;
    let ulb = uncertainty_lower_bound(p.s, p.q)?;
    let (gram_min, gram_max) = gram_extremes(p.gamma, p.sigma, p.d, p.q)?;
    Ok(BoundSummary {
        params: p.clone(),
        coherence_threshold: coherence_threshold(p.s)?,
        uncertainty_lower_bound: ulb,
        uncertainty_satisfied: p.gs2() >= ulb,
        feature_count_bound: if p.q == p.d {
            feature_count_bound(p)?
        } else {
            feature_count_bound_order_q(p)?
        },
        measurement_count_bound: measurement_count_bound(p)?,
        gram_min,
        gram_max,
        sample_radius: sample_radius_bound(p.gamma, p.d, p.m, p.delta)?,
    })
}

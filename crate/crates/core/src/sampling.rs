//! Random feature weights and biases.
//!
//! Four schemes are supported. `Dense` draws every coordinate from
//! `N(0, σ²)`. The three sparse schemes restrict each weight to `q` of the `d`
//! input coordinates:
//!
//! * `Complete` enumerates every size-`q` subset of the coordinates and draws
//!   `n` weights on each, giving `N = n·C(d, q)` features;
//! * `RandomSubset` draws each support uniformly among the size-`q` subsets;
//! * `Bernoulli` keeps each coordinate independently with probability `q/d`.
//!
//! Off-support entries are exactly zero in all schemes.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, shape_err, Result, SrfeError};
use crate::rng;
use crate::scalar::Real;

/// Default cap on `n·C(d, q)` for the complete scheme.
pub const DEFAULT_MAX_FEATURES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Dense,
    Complete,
    RandomSubset,
    Bernoulli,
}

impl Scheme {
    pub fn is_sparse(self) -> bool {
        !matches!(self, Scheme::Dense)
    }
}

fn default_max_features() -> usize {
    DEFAULT_MAX_FEATURES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    /// Input dimension `d`.
    pub dim: usize,
    /// Total feature count `N`. For the complete scheme it must be a
    /// multiple of `C(d, q)` unless `n_per_subset` is given instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_features: Option<usize>,
    /// Weights per support subset (complete scheme only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_per_subset: Option<usize>,
    /// Standard deviation of the nonzero weight entries.
    pub sigma: f64,
    /// Feature sparsity; defaults to `dim`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    /// Uniform bias range `[lo, hi]` in radians. `None` means no bias.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_range: Option<[f64; 2]>,
    pub seed: u64,
    pub scheme: Scheme,
    #[serde(default = "default_max_features")]
    pub max_features: usize,
}

impl SamplingConfig {
    pub fn dense(dim: usize, n_features: usize, sigma: f64, seed: u64) -> Self {
        Self {
            dim,
            n_features: Some(n_features),
            n_per_subset: None,
            sigma,
            q: None,
            bias_range: None,
            seed,
            scheme: Scheme::Dense,
            max_features: DEFAULT_MAX_FEATURES,
        }
    }

    pub fn sparse(
        scheme: Scheme,
        dim: usize,
        q: usize,
        n_features: usize,
        sigma: f64,
        seed: u64,
    ) -> Self {
        Self {
            q: Some(q),
            scheme,
            ..Self::dense(dim, n_features, sigma, seed)
        }
    }

    pub fn with_bias(mut self, lo: f64, hi: f64) -> Self {
        self.bias_range = Some([lo, hi]);
        self
    }

    pub fn sparsity(&self) -> usize {
        self.q.unwrap_or(self.dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(config_err("dimension must be at least 1"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(config_err(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        let q = self.sparsity();
        if q == 0 || q > self.dim {
            return Err(config_err(format!(
                "q must lie in 1..={}, got {q}",
                self.dim
            )));
        }
        if self.scheme == Scheme::Dense && q != self.dim {
            return Err(config_err("the dense scheme requires q = dim"));
        }
        if let Some([lo, hi]) = self.bias_range {
            check_bias_range(lo, hi)?;
        }
        self.resolve_counts().map(|_| ())
    }

    /// `(n per subset, N)`; `n` is only meaningful for the complete scheme.
    fn resolve_counts(&self) -> Result<(usize, usize)> {
        match self.scheme {
            Scheme::Complete => {
                let subsets = binomial(self.dim, self.sparsity()).ok_or_else(|| {
                    SrfeError::CombinatorialBudget {
                        requested: u128::MAX,
                        cap: self.max_features,
                    }
                })?;
                let n = match (self.n_per_subset, self.n_features) {
                    (Some(n), Some(total)) => {
                        if (n as u128) * subsets != total as u128 {
                            return Err(config_err(format!(
                                "n_features = {total} disagrees with n_per_subset·C(d,q) = {n}·{subsets}"
                            )));
                        }
                        n
                    }
                    (Some(n), None) => n,
                    (None, Some(total)) => {
                        if total as u128 % subsets != 0 {
                            return Err(config_err(format!(
                                "n_features = {total} is not a multiple of C(d,q) = {subsets}"
                            )));
                        }
                        (total as u128 / subsets) as usize
                    }
                    (None, None) => {
                        return Err(config_err("either n_features or n_per_subset is required"))
                    }
                };
                if n == 0 {
                    return Err(config_err("at least one weight per subset is required"));
                }
                let requested = n as u128 * subsets;
                if requested > self.max_features as u128 {
                    return Err(SrfeError::CombinatorialBudget {
                        requested,
                        cap: self.max_features,
                    });
                }
                Ok((n, requested as usize))
            }
            _ => {
                if self.n_per_subset.is_some() {
                    return Err(config_err(
                        "n_per_subset only applies to the complete scheme",
                    ));
                }
                match self.n_features {
                    Some(0) | None => Err(config_err("n_features must be at least 1")),
                    Some(n) => Ok((n, n)),
                }
            }
        }
    }
}

fn check_bias_range(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(config_err(format!("invalid bias range [{lo}, {hi}]")));
    }
    Ok(())
}

/// Binomial coefficient, `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(n-i) is divisible by (i+1) after the multiplication.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// All size-`k` subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `N` weight vectors in `R^d` with optional biases and recorded supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSet<R> {
    dim: usize,
    /// `N × d`, row-major.
    weights: Vec<R>,
    biases: Option<Vec<R>>,
    supports: Vec<Vec<usize>>,
    sigma: R,
    q: usize,
    scheme: Scheme,
    n_per_subset: Option<usize>,
}

impl<R: Real> WeightSet<R> {
    /// Assembles a weight set from explicit weight vectors. Supports are
    /// taken as the nonzero pattern of each vector.
    pub fn from_vectors(
        dim: usize,
        vectors: Vec<Vec<R>>,
        biases: Option<Vec<R>>,
        sigma: R,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(config_err("dimension must be at least 1"));
        }
        let n = vectors.len();
        let mut weights = Vec::with_capacity(n * dim);
        let mut supports = Vec::with_capacity(n);
        for (j, v) in vectors.into_iter().enumerate() {
            if v.len() != dim {
                return Err(shape_err(format!(
                    "weight {j} has length {}, expected {dim}",
                    v.len()
                )));
            }
            supports.push((0..dim).filter(|&k| v[k] != R::zero()).collect());
            weights.extend(v);
        }
        if let Some(b) = &biases {
            if b.len() != n {
                return Err(shape_err(format!("{} biases for {n} weights", b.len())));
            }
        }
        let q = supports.iter().map(Vec::len).max().unwrap_or(0).max(1);
        Ok(Self {
            dim,
            weights,
            biases,
            supports,
            sigma,
            q,
            scheme: Scheme::Dense,
            n_per_subset: None,
        })
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self, j: usize) -> &[R] {
        &self.weights[j * self.dim..(j + 1) * self.dim]
    }

    pub fn weights(&self) -> impl Iterator<Item = &[R]> {
        self.weights.chunks_exact(self.dim)
    }

    pub fn biases(&self) -> Option<&[R]> {
        self.biases.as_deref()
    }

    pub fn bias(&self, j: usize) -> R {
        self.biases.as_ref().map_or(R::zero(), |b| b[j])
    }

    pub fn support(&self, j: usize) -> &[usize] {
        &self.supports[j]
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub fn sigma(&self) -> R {
        self.sigma
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n_per_subset(&self) -> Option<usize> {
        self.n_per_subset
    }

    /// Replaces the bias vector.
    pub fn with_biases(mut self, biases: Option<Vec<R>>) -> Result<Self> {
        if let Some(b) = &biases {
            if b.len() != self.len() {
                return Err(shape_err(format!(
                    "{} biases for {} weights",
                    b.len(),
                    self.len()
                )));
            }
        }
        self.biases = biases;
        Ok(self)
    }

    /// `⟨x, ω_j⟩ + b_j`, summing over the support of `ω_j` only.
    #[inline]
    pub fn phase(&self, j: usize, x: &[R]) -> R {
        let w = self.weight(j);
        let support = &self.supports[j];
        let mut t = R::zero();
        if support.len() == self.dim {
            for (&xi, &wi) in x.iter().zip(w) {
                t += xi * wi;
            }
        } else {
            for &k in support {
                t += x[k] * w[k];
            }
        }
        t + self.bias(j)
    }
}

fn gaussian<R: Real>(rng: &mut rng::Rng, sigma: f64) -> R {
    let z: f64 = StandardNormal.sample(rng);
    R::of(sigma * z)
}

fn attach_biases<R: Real>(config: &SamplingConfig, mut set: WeightSet<R>) -> Result<WeightSet<R>> {
    if let Some([lo, hi]) = config.bias_range {
        set.biases = Some(draw_biases(set.len(), lo, hi, config.seed)?);
    }
    Ok(set)
}

fn expect_scheme(config: &SamplingConfig, scheme: Scheme) -> Result<()> {
    if config.scheme != scheme {
        return Err(config_err(format!(
            "expected scheme {scheme:?}, configuration says {:?}",
            config.scheme
        )));
    }
    config.validate()
}

/// Draws weights according to `config.scheme`.
pub fn draw_weights<R: Real>(config: &SamplingConfig) -> Result<WeightSet<R>> {
    match config.scheme {
        Scheme::Dense => draw_dense_weights(config),
        Scheme::Complete => draw_complete_sparse_weights(config),
        Scheme::RandomSubset => draw_subset_sparse_weights(config),
        Scheme::Bernoulli => draw_bernoulli_sparse_weights(config),
    }
}

/// `N` i.i.d. draws from `N(0, σ² I_d)`.
pub fn draw_dense_weights<R: Real>(config: &SamplingConfig) -> Result<WeightSet<R>> {
    expect_scheme(config, Scheme::Dense)?;
    let (_, n) = config.resolve_counts()?;
    let d = config.dim;
    let mut rng = rng::stream(config.seed, rng::WEIGHTS);
    let weights = (0..n * d)
        .map(|_| gaussian(&mut rng, config.sigma))
        .collect();
    let set = WeightSet {
        dim: d,
        weights,
        biases: None,
        supports: vec![(0..d).collect(); n],
        sigma: R::of(config.sigma),
        q: d,
        scheme: Scheme::Dense,
        n_per_subset: None,
    };
    attach_biases(config, set)
}

/// A complete set of `q`-sparse weights: `n` weights on every size-`q`
/// subset, subsets in lexicographic order. Subset `i` draws from its own
/// stream, so with `q = d` the output coincides with [`draw_dense_weights`].
pub fn draw_complete_sparse_weights<R: Real>(config: &SamplingConfig) -> Result<WeightSet<R>> {
    expect_scheme(config, Scheme::Complete)?;
    let (n, total) = config.resolve_counts()?;
    let d = config.dim;
    let q = config.sparsity();
    let mut weights = vec![R::zero(); total * d];
    let mut supports = Vec::with_capacity(total);
    for (i, subset) in subsets(d, q).into_iter().enumerate() {
        let mut rng = rng::stream(config.seed, rng::WEIGHTS + i as u64);
        for k in 0..n {
            let row = (i * n + k) * d;
            for &c in &subset {
                weights[row + c] = gaussian(&mut rng, config.sigma);
            }
            supports.push(subset.clone());
        }
    }
    let set = WeightSet {
        dim: d,
        weights,
        biases: None,
        supports,
        sigma: R::of(config.sigma),
        q,
        scheme: Scheme::Complete,
        n_per_subset: Some(n),
    };
    attach_biases(config, set)
}

/// Each support drawn uniformly among the size-`q` subsets.
pub fn draw_subset_sparse_weights<R: Real>(config: &SamplingConfig) -> Result<WeightSet<R>> {
    expect_scheme(config, Scheme::RandomSubset)?;
    let (_, n) = config.resolve_counts()?;
    let d = config.dim;
    let q = config.sparsity();
    let mut support_rng = rng::stream(config.seed, rng::SUPPORTS);
    let mut value_rng = rng::stream(config.seed, rng::WEIGHTS);
    let mut weights = vec![R::zero(); n * d];
    let mut supports = Vec::with_capacity(n);
    for j in 0..n {
        let mut support = rand::seq::index::sample(&mut support_rng, d, q).into_vec();
        support.sort_unstable();
        for &c in &support {
            weights[j * d + c] = gaussian(&mut value_rng, config.sigma);
        }
        supports.push(support);
    }
    let set = WeightSet {
        dim: d,
        weights,
        biases: None,
        supports,
        sigma: R::of(config.sigma),
        q,
        scheme: Scheme::RandomSubset,
        n_per_subset: None,
    };
    attach_biases(config, set)
}

/// Each entry kept with probability `q/d` (and then drawn from `N(0, σ²)`),
/// zero otherwise. Supports record the realized nonzero pattern.
pub fn draw_bernoulli_sparse_weights<R: Real>(config: &SamplingConfig) -> Result<WeightSet<R>> {
    expect_scheme(config, Scheme::Bernoulli)?;
    let (_, n) = config.resolve_counts()?;
    let d = config.dim;
    let q = config.sparsity();
    let keep = q as f64 / d as f64;
    let mut support_rng = rng::stream(config.seed, rng::SUPPORTS);
    let mut value_rng = rng::stream(config.seed, rng::WEIGHTS);
    let mut weights = vec![R::zero(); n * d];
    let mut supports = Vec::with_capacity(n);
    for j in 0..n {
        let mut support = Vec::new();
        for c in 0..d {
            let u: f64 = support_rng.random();
            if u < keep {
                let w: R = gaussian(&mut value_rng, config.sigma);
                weights[j * d + c] = w;
                // A Gaussian draw of exactly zero is not part of the support.
                if w != R::zero() {
                    support.push(c);
                }
            }
        }
        supports.push(support);
    }
    let set = WeightSet {
        dim: d,
        weights,
        biases: None,
        supports,
        sigma: R::of(config.sigma),
        q,
        scheme: Scheme::Bernoulli,
        n_per_subset: None,
    };
    attach_biases(config, set)
}

/// `n` i.i.d. uniform draws on `[lo, hi]`.
pub fn draw_biases<R: Real>(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Vec<R>> {
    check_bias_range(lo, hi)?;
    let mut rng = rng::stream(seed, rng::BIASES);
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            R::of(lo + (hi - lo) * u)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 2), Some(3));
        assert_eq!(binomial(10, 2), Some(45));
        assert_eq!(binomial(5, 0), Some(1));
        assert_eq!(binomial(5, 6), Some(0));
        assert_eq!(binomial(100, 50), Some(100891344545564193334812497256));
        assert_eq!(binomial(200, 100), None);
    }

    #[test]
    fn subset_enumeration_is_lexicographic() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(4, 4), vec![vec![0, 1, 2, 3]]);
        assert_eq!(subsets(6, 3).len(), 20);
        assert_eq!(subsets(2, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn complete_counts() {
        let cfg = SamplingConfig {
            n_features: None,
            n_per_subset: Some(2),
            ..SamplingConfig::sparse(Scheme::Complete, 3, 2, 0, 1.0, 9)
        };
        let w: WeightSet<f64> = draw_complete_sparse_weights(&cfg).unwrap();
        assert_eq!(w.len(), 6);
        let expected = [[0, 1], [0, 1], [0, 2], [0, 2], [1, 2], [1, 2]];
        for (j, s) in expected.iter().enumerate() {
            assert_eq!(w.support(j), s);
        }

        let cfg = SamplingConfig {
            n_features: None,
            n_per_subset: Some(50),
            ..SamplingConfig::sparse(Scheme::Complete, 10, 2, 0, 1.0, 9)
        };
        assert_eq!(
            draw_complete_sparse_weights::<f64>(&cfg).unwrap().len(),
            2250
        );
    }

    #[test]
    fn complete_budget_guard() {
        let cfg = SamplingConfig {
            n_features: None,
            n_per_subset: Some(1000),
            ..SamplingConfig::sparse(Scheme::Complete, 40, 20, 0, 1.0, 0)
        };
        assert!(matches!(
            draw_complete_sparse_weights::<f64>(&cfg),
            Err(SrfeError::CombinatorialBudget { .. })
        ));
        let cfg = SamplingConfig {
            max_features: 100,
            ..SamplingConfig::sparse(Scheme::Complete, 5, 2, 200, 1.0, 0)
        };
        assert!(matches!(
            draw_complete_sparse_weights::<f64>(&cfg),
            Err(SrfeError::CombinatorialBudget {
                requested: 200,
                cap: 100
            })
        ));
    }

    #[test]
    fn complete_requires_divisible_total() {
        let cfg = SamplingConfig::sparse(Scheme::Complete, 10, 2, 5000, 1.0, 0);
        assert!(matches!(
            draw_weights::<f64>(&cfg),
            Err(SrfeError::Config(_))
        ));
    }

    #[test]
    fn rejects_degenerate_configs() {
        assert!(draw_dense_weights::<f64>(&SamplingConfig::dense(3, 2, 0.0, 1)).is_err());
        assert!(draw_dense_weights::<f64>(&SamplingConfig::dense(3, 0, 1.0, 1)).is_err());
        assert!(draw_dense_weights::<f64>(&SamplingConfig::dense(0, 2, 1.0, 1)).is_err());
        let bad_q = SamplingConfig::sparse(Scheme::RandomSubset, 3, 4, 10, 1.0, 1);
        assert!(draw_subset_sparse_weights::<f64>(&bad_q).is_err());
        let bad_bias = SamplingConfig::dense(3, 2, 1.0, 1).with_bias(1.0, 0.0);
        assert!(draw_dense_weights::<f64>(&bad_bias).is_err());
        // scheme mismatch
        assert!(draw_complete_sparse_weights::<f64>(&SamplingConfig::dense(3, 2, 1.0, 1)).is_err());
    }

    #[test]
    fn dense_is_deterministic() {
        let cfg = SamplingConfig::dense(3, 2, 1.0, 42);
        let a: WeightSet<f64> = draw_dense_weights(&cfg).unwrap();
        let b: WeightSet<f64> = draw_dense_weights(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert_eq!(a.weight(1).len(), 3);
        let c: WeightSet<f64> = draw_dense_weights(&SamplingConfig::dense(3, 2, 1.0, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn complete_with_full_support_matches_dense() {
        let dense: WeightSet<f64> =
            draw_dense_weights(&SamplingConfig::dense(4, 7, 1.5, 3)).unwrap();
        let complete: WeightSet<f64> = draw_complete_sparse_weights(&SamplingConfig::sparse(
            Scheme::Complete,
            4,
            4,
            7,
            1.5,
            3,
        ))
        .unwrap();
        assert_eq!(dense.weights, complete.weights);
        assert_eq!(dense.supports, complete.supports);
    }

    #[test]
    fn sparse_schemes_with_q_equal_d_have_full_support() {
        for scheme in [Scheme::RandomSubset, Scheme::Bernoulli, Scheme::Complete] {
            let w: WeightSet<f64> =
                draw_weights(&SamplingConfig::sparse(scheme, 4, 4, 50, 1.0, 8)).unwrap();
            assert!(
                w.supports().iter().all(|s| s == &[0, 1, 2, 3]),
                "{scheme:?}"
            );
        }
        let w: WeightSet<f64> = draw_weights(&SamplingConfig::sparse(
            Scheme::Bernoulli,
            1,
            1,
            100,
            1.0,
            8,
        ))
        .unwrap();
        assert!(w.supports().iter().all(|s| s == &[0]));
    }

    #[test]
    fn biases() {
        assert_eq!(draw_biases::<f64>(5, 0.0, 0.0, 1).unwrap(), vec![0.0; 5]);
        assert!(draw_biases::<f64>(0, 0.0, 1.0, 1).unwrap().is_empty());
        assert!(draw_biases::<f64>(3, 2.0, 1.0, 1).is_err());
        let b = draw_biases::<f64>(1000, -1.0, 3.0, 5).unwrap();
        assert!(b.iter().all(|&x| (-1.0..=3.0).contains(&x)));
        assert_eq!(b, draw_biases::<f64>(1000, -1.0, 3.0, 5).unwrap());
    }

    #[test]
    fn config_json_rejects_unknown_keys() {
        let ok = r#"{"dim": 3, "n_features": 10, "sigma": 1.0, "seed": 1, "scheme": "random-subset", "q": 2}"#;
        let cfg: SamplingConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.scheme, Scheme::RandomSubset);
        assert_eq!(cfg.max_features, DEFAULT_MAX_FEATURES);
        let bad = r#"{"dim": 3, "n_features": 10, "sigma": 1.0, "seed": 1, "scheme": "dense", "sigmaa": 2}"#;
        assert!(serde_json::from_str::<SamplingConfig>(bad).is_err());
    }
}

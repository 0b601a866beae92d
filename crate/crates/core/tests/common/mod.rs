//! Shared oracles and measurement routines for the solver, theory and
//! generalization checks. Each routine returns what it measured so the
//! callers can assert or report.
#![allow(dead_code)]

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use srfe::diagnostics::{
    best_s_term_error, coherence_threshold, expected_gram, gaussian_density,
    gaussian_target_transform, lemma1_feature_bound, measurement_count_bound,
    measurement_count_bound_dense, mutual_coherence, rho_norm_gaussian_target, sample_radius_bound,
    TheoryParams,
};
use srfe::feature_map::{evaluate_expansion, ActivationKind, Provenance};
use srfe::linalg::Matrix;
use srfe::rng::{POINTS, TEST_POINTS};
use srfe::testbed::{best_fit_coefficients, sample_points};
use srfe::{draw_weights, solve_bpdn, SamplingConfig, SolverConfig, SolverMethod, C64};

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix<f64> {
    let s = 1.0 / (m as f64).sqrt();
    Matrix::from_fn(m, n, |_, _| s * rng.sample::<f64, _>(StandardNormal))
}

fn complex_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix<C64> {
    let s = 1.0 / (2.0 * m as f64).sqrt();
    Matrix::from_fn(m, n, |_, _| {
        Complex::new(
            s * rng.sample::<f64, _>(StandardNormal),
            s * rng.sample::<f64, _>(StandardNormal),
        )
    })
}

pub fn residual_norm(a: &Matrix<f64>, y: &[f64], c: &[f64]) -> f64 {
    let ac = a.mul_vec(c).unwrap();
    y.iter()
        .zip(ac)
        .map(|(u, v)| (u - v).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `argmin ½‖Ac − y‖² + λ‖c‖₁` by coordinate descent, warm-started.
pub fn lasso_cd(a: &Matrix<f64>, y: &[f64], lambda: f64, c: &mut [f64]) {
    let cols = a.columns();
    let sq: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum())
        .collect();
    let mut r: Vec<f64> = {
        let ac = a.mul_vec(c).unwrap();
        y.iter().zip(ac).map(|(u, v)| u - v).collect()
    };
    for _ in 0..200_000 {
        let mut biggest = 0.0f64;
        for j in 0..c.len() {
            if sq[j] == 0.0 {
                continue;
            }
            let rho: f64 = cols[j].iter().zip(&r).map(|(u, v)| u * v).sum::<f64>() + sq[j] * c[j];
            let new = rho.signum() * (rho.abs() - lambda).max(0.0) / sq[j];
            let delta = new - c[j];
            if delta != 0.0 {
                for (ri, aij) in r.iter_mut().zip(&cols[j]) {
                    *ri -= delta * aij;
                }
                c[j] = new;
                biggest = biggest.max(delta.abs());
            }
        }
        if biggest < 1e-15 {
            break;
        }
    }
}

/// ℓ1 norm of the BPDN solution through the penalized path.
pub fn oracle_objective(a: &Matrix<f64>, y: &[f64], radius: f64) -> f64 {
    let aty = a.adjoint_mul_vec(y).unwrap();
    let mut hi = aty.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut lo = hi * 1e-12;
    let mut c = vec![0.0; a.cols()];
    // Residual grows with λ; keep lo feasible and hi infeasible.
    for _ in 0..100 {
        let mid = (lo * hi).sqrt();
        lasso_cd(a, y, mid, &mut c);
        if residual_norm(a, y, &c) > radius {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo - 1.0 < 1e-12 {
            break;
        }
    }
    let mut c = vec![0.0; a.cols()];
    lasso_cd(a, y, lo, &mut c);
    c.iter().map(|v| v.abs()).sum()
}

fn tight(method: SolverMethod, eta: f64) -> SolverConfig {
    SolverConfig {
        method,
        max_iters: 200_000,
        abs_tol: 1e-10,
        rel_tol: 1e-9,
        ..SolverConfig::with_eta(eta)
    }
}

/// Tally over a batch of solves.
#[derive(Debug, Default)]
pub struct Tally {
    pub instances: usize,
    pub passed: usize,
    /// Worst value of the checked quantity.
    pub worst: f64,
    /// Worst KKT violation among converged solves.
    pub worst_kkt: f64,
    pub converged: usize,
}

impl Tally {
    fn record(&mut self, ok: bool, value: f64) {
        self.instances += 1;
        self.passed += usize::from(ok);
        self.worst = self.worst.max(value);
    }

    fn kkt(&mut self, converged: bool, violation: f64) {
        if converged {
            self.converged += 1;
            self.worst_kkt = self.worst_kkt.max(violation);
        }
    }

    pub fn all(&self) -> bool {
        self.instances > 0 && self.passed == self.instances
    }
}

/// Residual minus radius on `count` random instances; a fifth are complex.
pub fn feasibility_suite(count: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    for case in 0..count {
        let m = rng.random_range(5..=60);
        let n = rng.random_range(m..=3 * m);
        let eta = 10f64.powf(rng.random_range(-3.0..-0.5));
        let radius = eta * (m as f64).sqrt();
        let report = if case % 5 == 4 {
            let a = complex_matrix(&mut rng, m, n);
            let y: Vec<C64> = (0..m)
                .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            solve_bpdn(&a, &y, &SolverConfig::with_eta(eta)).unwrap().1
        } else {
            let a = gaussian_matrix(&mut rng, m, n);
            let y: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            solve_bpdn(&a, &y, &SolverConfig::with_eta(eta)).unwrap().1
        };
        let excess = report.feasibility_gap;
        t.record(excess <= 1e-6, excess.max(0.0) / radius.max(1.0));
        t.kkt(report.converged, report.kkt_violation);
    }
    t
}

/// Relative ℓ1 gap to coordinate descent for both solvers.
pub fn objective_suite(count: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    for _ in 0..count {
        let m = rng.random_range(5..=20);
        let n = rng.random_range(m..=40);
        let a = gaussian_matrix(&mut rng, m, n);
        let y: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let eta = 0.05 * rng.random::<f64>() + 0.01;
        let expect = oracle_objective(&a, &y, eta * (m as f64).sqrt());
        let (c, report) = solve_bpdn(&a, &y, &tight(SolverMethod::Auto, eta)).unwrap();
        let rel = (c.l1_norm() - expect).abs() / expect;
        t.record(rel < 1e-4, rel);
        t.kkt(report.converged, report.kkt_violation);
    }
    t
}

/// Noiseless recovery of planted `s`-sparse vectors on matrices whose
/// coherence meets the threshold. Matrices above it are drawn again.
pub fn planted_suite(per_s: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    for (s, m, n) in [(1, 40, 60), (2, 700, 100), (3, 2000, 60)] {
        let mu_max = coherence_threshold(s).unwrap();
        let mut done = 0;
        while done < per_s {
            let a = gaussian_matrix(&mut rng, m, n);
            if mutual_coherence(&a, s).unwrap().mu > mu_max {
                continue;
            }
            done += 1;
            let mut c0 = vec![0.0; n];
            let mut placed = 0;
            while placed < s {
                let j = rng.random_range(0..n);
                if c0[j] == 0.0 {
                    let mag: f64 = rng.random_range(0.5..2.0);
                    c0[j] = if rng.random::<bool>() { mag } else { -mag };
                    placed += 1;
                }
            }
            let y = a.mul_vec(&c0).unwrap();
            let (c, report) = solve_bpdn(&a, &y, &tight(SolverMethod::Auto, 0.0)).unwrap();
            let err = c
                .values()
                .iter()
                .zip(&c0)
                .fold(0.0f64, |e, (u, v)| e.max((u - v).abs()));
            t.record(err <= 1e-6, err);
            t.kkt(report.converged, report.kkt_violation);
        }
    }
    t
}

/// Monte Carlo estimate of `E cos⟨ω − ω', x⟩` for `q`-sparse Gaussian weight
/// pairs sharing `overlap` coordinates and `x ~ N(0, γ²I)`, with its
/// standard error.
pub fn gram_monte_carlo(
    gamma: f64,
    sigma: f64,
    d: usize,
    q: usize,
    overlap: usize,
    draws: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    // First support is 0..q; the second keeps `overlap` of those and takes
    // the rest from q.. so the supports meet in exactly `overlap` places.
    let second: Vec<usize> = (0..overlap).chain(q..q + (q - overlap)).collect();
    let (mut sum, mut sq) = (0.0, 0.0);
    let mut w = vec![0.0; d];
    for _ in 0..draws {
        w.iter_mut().for_each(|v| *v = 0.0);
        for v in &mut w[..q] {
            *v += sigma * rng.sample::<f64, _>(StandardNormal);
        }
        for &i in &second {
            w[i] -= sigma * rng.sample::<f64, _>(StandardNormal);
        }
        let phase: f64 = w
            .iter()
            .map(|wi| wi * gamma * rng.sample::<f64, _>(StandardNormal))
            .sum();
        let v = phase.cos();
        sum += v;
        sq += v * v;
    }
    let k = draws as f64;
    let mean = sum / k;
    let var = (sq / k - mean * mean).max(0.0);
    (mean, (var / (k - 1.0)).sqrt())
}

/// Largest deviation from the closed form in standard errors, over `configs`
/// random admissible `(γ, σ, d, q, overlap)`.
pub fn gram_suite(configs: usize, draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..configs {
        let d = rng.random_range(2usize..=8);
        let q = rng.random_range(1..=d);
        let overlap = rng.random_range((2 * q).saturating_sub(d)..=q);
        let gamma = rng.random_range(0.2..1.5);
        let sigma = rng.random_range(0.2..1.5);
        let exact = expected_gram(gamma, sigma, d, q, overlap).unwrap();
        let (mean, se) = gram_monte_carlo(gamma, sigma, d, q, overlap, draws, &mut rng);
        worst = worst.max((mean - exact).abs() / se);
    }
    worst
}

/// Count of random vectors violating `κ_{s,2}(c) ≤ ‖c‖₁/(2√s)` or
/// `κ_{s,2} ≤ κ_{s,1}`.
pub fn kappa_suite(count: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..count {
        let n = rng.random_range(1..=60);
        let s = rng.random_range(1..=n);
        let heavy = rng.random::<bool>();
        let c: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                if heavy {
                    z.powi(3)
                } else {
                    z
                }
            })
            .collect();
        let l1: f64 = c.iter().map(|v| v.abs()).sum();
        let k2 = best_s_term_error(&c, s, 2).unwrap();
        let k1 = best_s_term_error(&c, s, 1).unwrap();
        let slack = 1e-12 * l1.max(1.0);
        if k2 > l1 / (2.0 * (s as f64).sqrt()) + slack || k2 > k1 + slack {
            bad += 1;
        }
    }
    bad
}

/// Fraction of trials in which some of `m` draws from `N(0, γ²I_d)` falls
/// outside the radius bound.
pub fn radius_exceedance(gamma: f64, d: usize, m: usize, delta: f64, trials: u64) -> f64 {
    let r = sample_radius_bound(gamma, d, m, delta).unwrap();
    let law = Provenance::Gaussian { gamma };
    let hits = (0..trials)
        .filter(|&t| {
            let pts = sample_points(&law, d, m, t, POINTS).unwrap();
            let outside = pts
                .iter()
                .any(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt() > r);
            outside
        })
        .count();
    hits as f64 / trials as f64
}

/// Relative difference between the order-`q` measurement bound at `q = d`
/// and the dense one, over a few parameter sets.
pub fn collapse_gap() -> f64 {
    let mut worst = 0.0f64;
    for (gamma, sigma, d) in [(1.0, 1.0, 1), (0.5, 2.0, 3), (0.3, 0.7, 5), (1.2, 0.4, 10)] {
        let p = TheoryParams {
            gamma,
            sigma,
            d,
            q: d,
            s: 2,
            n_features: 1000,
            m: 200,
            delta: 0.1,
            epsilon: 0.1,
        };
        let a = measurement_count_bound(&p).unwrap();
        let b = measurement_count_bound_dense(&p).unwrap();
        worst = worst.max((a - b).abs() / b);
    }
    worst
}

/// `L²(μ)` errors of the Monte Carlo expansion `c*_j = α(ω_j)/(Nρ(ω_j))` for
/// `f(x) = exp(−x²/2)`, `ρ = μ = N(0, 1)`, one value per trial, together with
/// the feature count used.
pub fn lemma1_errors(
    epsilon: f64,
    delta: f64,
    trials: u64,
    test_points: usize,
) -> (usize, Vec<f64>) {
    let (sigma_f, sigma_rho) = (1.0, 1.0);
    assert_eq!(rho_norm_gaussian_target(sigma_f, sigma_rho).unwrap(), 1.0);
    let n = lemma1_feature_bound(epsilon, delta).unwrap();
    let law = Provenance::Gaussian { gamma: 1.0 };
    let errors = (0..trials)
        .map(|t| {
            let w = draw_weights::<f64>(&SamplingConfig::dense(1, n, sigma_rho, t)).unwrap();
            let c = best_fit_coefficients::<C64, _, _>(
                |o| Complex::new(gaussian_target_transform(sigma_f, o[0]), 0.0),
                |o| gaussian_density(sigma_rho, o),
                &w,
            )
            .unwrap();
            let x = sample_points(&law, 1, test_points, t, TEST_POINTS).unwrap();
            let approx =
                evaluate_expansion(&w, ActivationKind::ComplexExponential, c.values(), &x).unwrap();
            let mse = x
                .iter()
                .zip(&approx)
                .map(|(p, v)| {
                    let f = (-0.5 * p[0] * p[0] / (sigma_f * sigma_f)).exp();
                    (*v - Complex::new(f, 0.0)).norm_sqr()
                })
                .sum::<f64>()
                / test_points as f64;
            mse.sqrt()
        })
        .collect();
    (n, errors)
}

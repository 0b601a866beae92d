//! Seeded experiment runs with summary statistics.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{corpus, CorpusOptions, TargetFunction};
use super::data::{evaluate_target, grid_1d, sample_dataset, sample_test_set, NoiseSpec};
use crate::error::{config_err, Result};
use crate::feature_map::{build_feature_matrix, evaluate_expansion, PointSet, Provenance};
use crate::pipeline::{fit_with_weights, relative_error, FitConfig};
use crate::sampling::draw_weights;
use crate::scalar::Scalar;
use crate::solver::{least_squares, SolveReport};
use num_complex::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Minimum-norm least squares on the same features.
    Ols,
}

/// Where the held-out error is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestSet {
    /// `n` fresh draws from the training law.
    Sampled { n: usize },
    /// `n` evenly spaced points on `[lo, hi]` (1-D targets).
    Grid { lo: f64, hi: f64, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub target: String,
    #[serde(default)]
    pub corpus: CorpusOptions,
    /// Input law; defaults to the target's domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<Provenance>,
    /// Training points `m`.
    pub m: usize,
    /// Defaults to `10·m` fresh draws.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<TestSet>,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// `fit.sampling.seed` is replaced by each run seed.
    pub fit: FitConfig,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub baselines: Vec<Baseline>,
    /// Record `(x, f, f♯)` on the test set of the first seed (1-D only).
    #[serde(default)]
    pub curve: bool,
    /// Deviations from the reference protocol worth flagging in the report.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(config_err("m must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(config_err("seed list is empty"));
        }
        self.noise.validate()?;
        self.fit.validate()?;
        if let Some(TestSet::Sampled { n: 0 } | TestSet::Grid { n: 0..=1, .. }) = self.test {
            return Err(config_err("test set is too small"));
        }
        Ok(())
    }

    fn law(&self, target: &TargetFunction) -> Provenance {
        self.sampler
            .clone()
            .unwrap_or_else(|| target.domain().clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<usize>,
    pub n_features: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ols_test_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Median and quartiles, linearly interpolated between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub count: usize,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let at = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        let (q1, q3) = (at(0.25), at(0.75));
        Some(Self {
            median: at(0.5),
            q1,
            q3,
            iqr: q3 - q1,
            count: v.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_error: Option<Spread>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_error: Option<Spread>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<Spread>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ols_test_error: Option<Spread>,
    pub failures: usize,
}

impl Summary {
    pub fn from_records(records: &[SeedRecord]) -> Self {
        let collect = |f: &dyn Fn(&SeedRecord) -> Option<f64>| {
            Spread::of(&records.iter().filter_map(f).collect::<Vec<_>>())
        };
        Self {
            test_error: collect(&|r| r.test_error),
            train_error: collect(&|r| r.train_error),
            sparsity: collect(&|r| r.sparsity.map(|s| s as f64)),
            ols_test_error: collect(&|r| r.ols_test_error),
            failures: records.iter().filter(|r| r.failure.is_some()).count(),
        }
    }
}

/// Values along a 1-D test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub seed: u64,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub srfe: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ols: Option<Vec<f64>>,
}

/// Static facts about the run, for reading results in context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub dim: usize,
    pub declared_order: usize,
    pub q: usize,
    pub n_test: usize,
    /// `η√m`, the residual radius.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<SeedRecord>,
    pub summary: Summary,
    pub diagnostics: RunDiagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<Curve>,
    /// Excluded from determinism comparisons; see [`Self::without_timing`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl ExperimentReport {
    pub fn without_timing(mut self) -> Self {
        self.wall_clock_seconds = None;
        self
    }
}

struct SeedOutcome {
    record: SeedRecord,
    curve: Option<Curve>,
}

fn test_points(
    cfg: &ExperimentConfig,
    target: &TargetFunction,
    law: &Provenance,
    seed: u64,
) -> Result<(PointSet<f64>, Vec<f64>)> {
    match cfg
        .test
        .clone()
        .unwrap_or(TestSet::Sampled { n: 10 * cfg.m })
    {
        TestSet::Sampled { n } => sample_test_set(target, law, n, seed),
        TestSet::Grid { lo, hi, n } => {
            if target.dim() != 1 {
                return Err(config_err("grid test sets need a 1-D target"));
            }
            let p = grid_1d(lo, hi, n)?;
            let v = evaluate_target(target, &p)?;
            Ok((p, v))
        }
    }
}

fn run_seed<S: Scalar<Real = f64>>(
    cfg: &ExperimentConfig,
    target: &TargetFunction,
    seed: u64,
    want_curve: bool,
) -> Result<SeedOutcome> {
    let law = cfg.law(target);
    let (x, y) = sample_dataset(target, &law, cfg.m, &cfg.noise, seed)?;
    let (xt, ft) = test_points(cfg, target, &law, seed)?;
    let mut sampling = cfg.fit.sampling.clone();
    sampling.seed = seed;
    let weights = draw_weights::<f64>(&sampling)?;
    let n_features = weights.len();
    let lift = |v: &[f64]| v.iter().map(|&r| S::from_real(r)).collect::<Vec<S>>();
    let (ys, fts) = (lift(&y), lift(&ft));

    let ols = if cfg.baselines.contains(&Baseline::Ols) {
        let a = build_feature_matrix::<S>(&x, &weights, cfg.fit.activation)?;
        let c = least_squares(a.matrix(), &ys)?;
        Some(evaluate_expansion(
            &weights,
            cfg.fit.activation,
            c.values(),
            &xt,
        )?)
    } else {
        None
    };

    let model = fit_with_weights(
        &x,
        &ys,
        weights,
        cfg.fit.activation,
        &cfg.fit.solver_config(),
        cfg.fit.prune_s,
    )?;
    let train = relative_error(&model.predict(&x)?, &ys)?;
    let pred = model.predict(&xt)?;
    let test = relative_error(&pred, &fts)?;
    let ols_test_error = ols.as_ref().map(|p| relative_error(p, &fts)).transpose()?;

    let curve = (want_curve && target.dim() == 1).then(|| Curve {
        seed,
        x: xt.coords().to_vec(),
        f: ft.clone(),
        srfe: pred.iter().map(|v| v.re()).collect(),
        ols: ols.as_ref().map(|p| p.iter().map(|v| v.re()).collect()),
    });
    Ok(SeedOutcome {
        record: SeedRecord {
            seed,
            train_error: Some(train),
            test_error: Some(test),
            sparsity: Some(model.sparsity()),
            n_features,
            solve: Some(model.fit_report.clone()),
            ols_test_error,
            failure: None,
        },
        curve,
    })
}

/// Runs every seed (in parallel) and assembles the report in seed order.
/// A failing seed is recorded and does not stop the others.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let registry = corpus(cfg.corpus)?;
    let target = registry.get(&cfg.target)?;
    if cfg.fit.sampling.dim != target.dim() {
        return Err(config_err(format!(
            "sampling dimension {} does not match target `{}` of dimension {}",
            cfg.fit.sampling.dim,
            target.name(),
            target.dim()
        )));
    }
    cfg.law(target).validate(target.dim())?;
    let start = Instant::now();
    let complex = cfg.fit.activation.is_complex();
    let outcomes: Vec<(u64, Result<SeedOutcome>)> = cfg
        .seeds
        .par_iter()
        .enumerate()
        .map(|(k, &seed)| {
            let want_curve = cfg.curve && k == 0;
            let out = if complex {
                run_seed::<Complex<f64>>(cfg, target, seed, want_curve)
            } else {
                run_seed::<f64>(cfg, target, seed, want_curve)
            };
            (seed, out)
        })
        .collect();

    let mut records = Vec::with_capacity(outcomes.len());
    let mut curve = None;
    for (seed, out) in outcomes {
        match out {
            Ok(o) => {
                if o.curve.is_some() {
                    curve = o.curve;
                }
                records.push(o.record);
            }
            Err(e) => {
                log::warn!("{}: seed {seed} failed: {e}", cfg.name);
                records.push(SeedRecord {
                    seed,
                    train_error: None,
                    test_error: None,
                    sparsity: None,
                    n_features: 0,
                    solve: None,
                    ols_test_error: None,
                    failure: Some(e.to_string()),
                });
            }
        }
    }
    let n_test = match &cfg.test {
        Some(TestSet::Sampled { n } | TestSet::Grid { n, .. }) => *n,
        None => 10 * cfg.m,
    };
    Ok(ExperimentReport {
        summary: Summary::from_records(&records),
        records,
        diagnostics: RunDiagnostics {
            dim: target.dim(),
            declared_order: target.order(),
            q: cfg.fit.sampling.sparsity(),
            n_test,
            radius: cfg.fit.eta * (cfg.m as f64).sqrt(),
        },
        curve,
        config: cfg.clone(),
        wall_clock_seconds: Some(start.elapsed().as_secs_f64()),
    })
}

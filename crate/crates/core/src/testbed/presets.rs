//! Named experiment configurations.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::corpus::{corpus, CorpusOptions, SincConvention, SUM_SQUARED_DIM};
use super::data::NoiseSpec;
use super::experiment::{Baseline, ExperimentConfig, TestSet};
use crate::error::{Result, SrfeError};
use crate::feature_map::{ActivationKind, Provenance};
use crate::pipeline::FitConfig;
use crate::sampling::{binomial, SamplingConfig, Scheme};

pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

/// Input law selectable for presets that support several.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    /// The target's own box.
    Uniform,
    /// `N(0, ¼ I)`.
    Gaussian,
    /// Box draw plus independent `N(0, 10⁻² I)`.
    Mixture,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 3] = [
        SamplerKind::Uniform,
        SamplerKind::Gaussian,
        SamplerKind::Mixture,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SamplerKind::Uniform => "uniform",
            SamplerKind::Gaussian => "gaussian",
            SamplerKind::Mixture => "mixture",
        }
    }

    /// The law for a target whose domain is `domain`.
    pub fn law(self, domain: &Provenance) -> Provenance {
        match (self, domain) {
            (SamplerKind::Gaussian, _) => Provenance::Gaussian { gamma: 0.5 },
            (SamplerKind::Mixture, Provenance::Uniform { lo, hi }) => Provenance::Mixture {
                gamma: 0.1,
                lo: lo.clone(),
                hi: hi.clone(),
            },
            _ => domain.clone(),
        }
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = SrfeError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| SrfeError::Unknown {
                kind: "sampler",
                name: s.to_string(),
            })
    }
}

/// Preset names; each Table 1 row also runs alone as `table1-<target>`.
pub const PRESETS: [&str; 5] = [
    "table1",
    "ishigami",
    "overfit-1d",
    "noise-1d",
    "order2-chain",
];

/// One row of the low-order table: target, `σ`, and the reference errors
/// (percent) at `q = 1, 2, 3, 5`.
pub struct Table1Row {
    pub target: &'static str,
    pub sigma: f64,
    pub reference: [f64; 4],
}

pub const TABLE1_QS: [usize; 4] = [1, 2, 3, 5];

pub const TABLE1_ROWS: [Table1Row; 6] = [
    Table1Row {
        target: "sum-squared",
        sigma: 0.1,
        reference: [0.82, 5.71e-6, 6.92e-5, 8.3e-4],
    },
    Table1Row {
        target: "inverse-sqrt-norm",
        sigma: 1.0,
        reference: [3.27, 1.60, 1.95, 1.72],
    },
    Table1Row {
        target: "sqrt-norm",
        sigma: 1.0,
        reference: [1.02, 0.73, 0.80, 1.10],
    },
    Table1Row {
        target: "sinc-product",
        sigma: PI,
        reference: [12.90, 1.19, 1.13, 3.51],
    },
    Table1Row {
        target: "ratio",
        sigma: 1.0,
        reference: [100.30, 21.53, 4.95, 5.06],
    },
    Table1Row {
        target: "exp-abs",
        sigma: 1.0,
        reference: [0.91, 1.43, 1.57, 1.96],
    },
];

pub const TABLE1_M: usize = 1000;
pub const TABLE1_N: usize = 10_000;
/// Residual level for the noiseless table runs; the value used for the
/// other synthetic examples.
pub const TABLE1_ETA: f64 = 1e-2;

/// Complete sparse weights when `C(d, q)` fits in the budget, with `n` rounded
/// down; otherwise uniformly random supports with exactly `budget` weights.
pub fn sparse_sampling(dim: usize, q: usize, budget: usize, sigma: f64) -> SamplingConfig {
    if q == dim {
        return SamplingConfig::dense(dim, budget, sigma, 0);
    }
    match binomial(dim, q) {
        Some(b) if b as usize <= budget => SamplingConfig {
            n_features: None,
            n_per_subset: Some(budget / b as usize),
            ..SamplingConfig::sparse(Scheme::Complete, dim, q, 0, sigma, 0)
        },
        _ => SamplingConfig::sparse(Scheme::RandomSubset, dim, q, budget, sigma, 0),
    }
}

/// Table 1 configuration for one row, `q` and bias choice.
pub fn table1_config(
    row: &Table1Row,
    q: usize,
    bias: bool,
    sinc: SincConvention,
) -> Result<ExperimentConfig> {
    let registry = corpus(CorpusOptions { sinc })?;
    let dim = registry.get(row.target)?.dim();
    let mut sampling = sparse_sampling(dim, q, TABLE1_N, row.sigma);
    if bias {
        sampling = sampling.with_bias(0.0, TAU);
    }
    let mut notes = Vec::new();
    if row.target == "sum-squared" {
        notes.push(format!(
            "reference table lists d = 1 for this row; run with d = {SUM_SQUARED_DIM}"
        ));
    }
    if row.target == "sinc-product" {
        notes.push(format!("sinc convention: {sinc:?}"));
    }
    let suffix = if bias { "bias" } else { "no-bias" };
    Ok(ExperimentConfig {
        name: format!("table1/{}/q{q}/{suffix}", row.target),
        target: row.target.to_string(),
        corpus: CorpusOptions { sinc },
        sampler: None,
        m: TABLE1_M,
        test: None,
        noise: NoiseSpec::none(),
        fit: FitConfig::new(sampling, ActivationKind::Sine, TABLE1_ETA),
        seeds: DEFAULT_SEEDS.to_vec(),
        baselines: vec![],
        curve: false,
        notes,
    })
}

pub fn table1_row(target: &str) -> Result<&'static Table1Row> {
    TABLE1_ROWS
        .iter()
        .find(|r| r.target == target)
        .ok_or_else(|| SrfeError::Unknown {
            kind: "table row",
            name: target.to_string(),
        })
}

pub const ISHIGAMI_SIGMA: f64 = 1.5 * PI;
pub const ISHIGAMI_N_PER_SUBSET: usize = 1092;
pub const ISHIGAMI_M: usize = 200;
pub const ISHIGAMI_ETA: f64 = 1e-3;

pub fn ishigami_config(sampler: SamplerKind) -> Result<ExperimentConfig> {
    let registry = corpus(CorpusOptions::default())?;
    let domain = registry.get("ishigami")?.domain().clone();
    let sampling = SamplingConfig {
        n_features: None,
        n_per_subset: Some(ISHIGAMI_N_PER_SUBSET),
        ..SamplingConfig::sparse(Scheme::Complete, 3, 2, 0, ISHIGAMI_SIGMA, 0)
    }
    .with_bias(0.0, TAU);
    Ok(ExperimentConfig {
        name: format!("ishigami/{}", sampler.label()),
        target: "ishigami".into(),
        corpus: CorpusOptions::default(),
        sampler: Some(sampler.law(&domain)),
        m: ISHIGAMI_M,
        test: None,
        noise: NoiseSpec::none(),
        fit: FitConfig::new(sampling, ActivationKind::Sine, ISHIGAMI_ETA),
        seeds: DEFAULT_SEEDS.to_vec(),
        baselines: vec![],
        curve: false,
        notes: vec![],
    })
}

pub const OVERFIT_M: usize = 200;
pub const OVERFIT_N: usize = 2000;
pub const OVERFIT_GRID: usize = 2000;
pub const OVERFIT_ETA: f64 = 0.03;

fn one_d_config(
    name: String,
    target: &str,
    sigma: f64,
    noise: NoiseSpec,
    eta: f64,
) -> Result<ExperimentConfig> {
    let registry = corpus(CorpusOptions::default())?;
    let (lo, hi) = match registry.get(target)?.domain() {
        Provenance::Uniform { lo, hi } => (lo[0], hi[0]),
        _ => (-1.0, 1.0),
    };
    let sampling = SamplingConfig::dense(1, OVERFIT_N, sigma, 0).with_bias(0.0, TAU);
    Ok(ExperimentConfig {
        name,
        target: target.into(),
        corpus: CorpusOptions::default(),
        sampler: None,
        m: OVERFIT_M,
        test: Some(TestSet::Grid {
            lo,
            hi,
            n: OVERFIT_GRID,
        }),
        noise,
        fit: FitConfig::new(sampling, ActivationKind::Sine, eta),
        seeds: DEFAULT_SEEDS.to_vec(),
        baselines: vec![Baseline::Ols],
        curve: true,
        notes: vec![],
    })
}

pub fn overfit_config() -> Result<ExperimentConfig> {
    one_d_config(
        "overfit-1d".into(),
        "sine-packet",
        2.0 * PI,
        NoiseSpec::none(),
        OVERFIT_ETA,
    )
}

/// Relative noise level for the noisy 1-D runs.
pub const NOISE_LEVEL: f64 = 0.05;

/// Runge (σ = π) and triangle (σ = 2π) with Gaussian noise whose standard
/// deviation is 5% of the target's RMS over its domain.
pub fn noise_configs() -> Result<Vec<ExperimentConfig>> {
    let registry = corpus(CorpusOptions::default())?;
    [("runge", PI), ("triangle", 2.0 * PI)]
        .into_iter()
        .map(|(name, sigma)| {
            let t = registry.get(name)?;
            let (lo, hi) = match t.domain() {
                Provenance::Uniform { lo, hi } => (lo[0], hi[0]),
                _ => (-1.0, 1.0),
            };
            let k = 4001;
            let rms = ((0..k)
                .map(|i| {
                    t.eval(&[lo + (hi - lo) * i as f64 / (k - 1) as f64])
                        .powi(2)
                })
                .sum::<f64>()
                / k as f64)
                .sqrt();
            let level = NOISE_LEVEL * rms;
            let mut cfg = one_d_config(
                format!("noise-1d/{name}"),
                name,
                sigma,
                NoiseSpec::gaussian(level),
                level,
            )?;
            cfg.notes.push(format!(
                "noise standard deviation {level:.6} ({}% of RMS)",
                NOISE_LEVEL * 100.0
            ));
            Ok(cfg)
        })
        .collect()
}

/// The ten-dimensional chain target with `q = 2` and `q = 10` over a range of
/// training sizes.
pub fn order2_chain_configs() -> Result<Vec<ExperimentConfig>> {
    let mut out = Vec::new();
    for q in [2, 10] {
        for m in [100, 200, 400, 800] {
            let sampling = sparse_sampling(10, q, 5000, 1.0).with_bias(0.0, TAU);
            out.push(ExperimentConfig {
                name: format!("order2-chain/q{q}/m{m}"),
                target: "order2-chain".into(),
                corpus: CorpusOptions::default(),
                sampler: None,
                m,
                test: None,
                noise: NoiseSpec::none(),
                fit: FitConfig::new(sampling, ActivationKind::Sine, 0.01),
                seeds: DEFAULT_SEEDS.to_vec(),
                baselines: vec![],
                curve: false,
                notes: vec![],
            });
        }
    }
    Ok(out)
}

/// Every configuration behind a preset name. `sampler` restricts presets
/// that support several input laws.
pub fn preset(name: &str, sampler: Option<SamplerKind>) -> Result<Vec<ExperimentConfig>> {
    if let Some(target) = name.strip_prefix("table1-") {
        let row = table1_row(target).map_err(|_| SrfeError::Unknown {
            kind: "preset",
            name: name.to_string(),
        })?;
        let mut out = Vec::new();
        for bias in [true, false] {
            for q in TABLE1_QS {
                out.push(table1_config(row, q, bias, SincConvention::default())?);
            }
        }
        return Ok(out);
    }
    match name {
        "table1" => {
            let mut out = Vec::new();
            for row in &TABLE1_ROWS {
                for bias in [true, false] {
                    for q in TABLE1_QS {
                        out.push(table1_config(row, q, bias, SincConvention::default())?);
                    }
                }
            }
            Ok(out)
        }
        "ishigami" => match sampler {
            Some(s) => Ok(vec![ishigami_config(s)?]),
            None => SamplerKind::ALL.into_iter().map(ishigami_config).collect(),
        },
        "overfit-1d" => Ok(vec![overfit_config()?]),
        "noise-1d" => noise_configs(),
        "order2-chain" => order2_chain_configs(),
        _ => Err(SrfeError::Unknown {
            kind: "preset",
            name: name.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in PRESETS {
            let cfgs = preset(name, None).unwrap();
            assert!(!cfgs.is_empty());
            for c in &cfgs {
                c.validate().unwrap();
            }
        }
        assert_eq!(preset("table1", None).unwrap().len(), 48);
        assert_eq!(
            preset("ishigami", Some(SamplerKind::Gaussian))
                .unwrap()
                .len(),
            1
        );
        assert!(preset("table2", None).is_err());
        assert_eq!(preset("table1-ratio", None).unwrap().len(), 8);
        assert!(preset("table1-runge", None).is_err());
    }

    #[test]
    fn feature_budgets() {
        let c = sparse_sampling(5, 2, 10_000, 1.0);
        assert_eq!((c.scheme, c.n_per_subset), (Scheme::Complete, Some(1000)));
        let c = sparse_sampling(100, 3, 10_000, 1.0);
        assert_eq!(
            (c.scheme, c.n_features),
            (Scheme::RandomSubset, Some(10_000))
        );
        let c = sparse_sampling(10, 2, 10_000, 1.0);
        assert_eq!(c.n_per_subset, Some(222));
        assert_eq!(sparse_sampling(5, 5, 10_000, 1.0).scheme, Scheme::Dense);
    }

    #[test]
    fn sampler_laws() {
        let dom = Provenance::uniform_cube(3, -PI, PI);
        assert_eq!(SamplerKind::Uniform.law(&dom), dom);
        assert_eq!(
            SamplerKind::Gaussian.law(&dom),
            Provenance::Gaussian { gamma: 0.5 }
        );
        assert!(
            matches!(SamplerKind::Mixture.law(&dom), Provenance::Mixture { gamma, .. } if gamma == 0.1)
        );
        assert_eq!(
            "mixture".parse::<SamplerKind>().unwrap(),
            SamplerKind::Mixture
        );
        assert!("beta".parse::<SamplerKind>().is_err());
    }

    #[test]
    fn table1_flags_the_dimension_change() {
        let c = table1_config(&TABLE1_ROWS[0], 2, true, SincConvention::Normalized).unwrap();
        assert_eq!(c.fit.sampling.dim, SUM_SQUARED_DIM);
        assert!(c.notes[0].contains("d = 10"));
    }
}

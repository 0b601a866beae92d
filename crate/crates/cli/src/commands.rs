use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use srfe::diagnostics::{mutual_coherence, summarize, BoundSummary, CoherenceReport, TheoryParams};
use srfe::testbed::{
    preset, run_experiment, sample_points, ExperimentConfig, ExperimentReport, SamplerKind,
};
use srfe::{
    build_feature_matrix, draw_weights, fit_srfe, fit_srfe_s, relative_error, ActivationKind,
    FitConfig, PointSet, Provenance, SamplingConfig, Scalar, SrfeModel, C64,
};

use crate::error::{CliError, CliResult};
use crate::io;

/// A saved model; the field decides the coefficient type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", content = "model", rename_all = "kebab-case")]
pub enum ModelFile {
    Real(SrfeModel<f64>),
    Complex(SrfeModel<C64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct FitOutput<S: Scalar> {
    pub config: FitConfig,
    pub n_points: usize,
    pub n_features: usize,
    pub sparsity: usize,
    pub train_error: Option<f64>,
    pub report: srfe::SolveReport,
    /// `f♯` at the training inputs.
    pub fitted: Vec<S>,
}

fn fit_any<S: Scalar<Real = f64>>(
    points: &PointSet<f64>,
    y: &[f64],
    config: &FitConfig,
) -> CliResult<(SrfeModel<S>, FitOutput<S>)> {
    let ys: Vec<S> = y.iter().map(|&v| S::from_real(v)).collect();
    let model = if config.sampling.scheme.is_sparse() {
        fit_srfe_s(points, &ys, config)?
    } else {
        fit_srfe(points, &ys, config)?
    };
    let fitted = model.predict(points)?;
    let out = FitOutput {
        config: config.clone(),
        n_points: points.len(),
        n_features: model.weights.len(),
        sparsity: model.sparsity(),
        train_error: relative_error(&fitted, &ys).ok(),
        report: model.fit_report.clone(),
        fitted,
    };
    Ok((model, out))
}

pub fn fit(
    config: &Path,
    data: &Path,
    target_col: Option<&str>,
    seed: Option<u64>,
    out: &Path,
) -> CliResult<()> {
    let mut cfg: FitConfig = io::read_json(config)?;
    if let Some(s) = seed {
        cfg.sampling.seed = s;
    }
    cfg.validate()?;
    let table = io::read_table(data)?;
    let target = io::target_index(&table, target_col)?;
    let (points, y) = io::split_target(&table, target)?;
    if points.dim() != cfg.sampling.dim {
        return Err(CliError::Config(format!(
            "config has dimension {} but {} has {} input columns",
            cfg.sampling.dim,
            data.display(),
            points.dim()
        )));
    }
    if points.is_empty() {
        return Err(CliError::Data(format!(
            "{} has no data rows",
            data.display()
        )));
    }
    log::info!(
        "fitting {} points, {} inputs, target column `{}`",
        points.len(),
        points.dim(),
        table.header[target]
    );
    if cfg.activation.is_complex() {
        let (model, report) = fit_any::<C64>(&points, &y, &cfg)?;
        io::write_json(&out.join("model.json"), &ModelFile::Complex(model))?;
        io::write_json(&out.join("report.json"), &report)?;
    } else {
        let (model, report) = fit_any::<f64>(&points, &y, &cfg)?;
        io::write_json(&out.join("model.json"), &ModelFile::Real(model))?;
        io::write_json(&out.join("report.json"), &report)?;
    }
    Ok(())
}

pub fn predict(
    model: &Path,
    data: &Path,
    target_col: Option<&str>,
    out: Option<&Path>,
) -> CliResult<()> {
    let model: ModelFile = io::read_json(model)?;
    let dim = match &model {
        ModelFile::Real(m) => m.weights.dim(),
        ModelFile::Complex(m) => m.weights.dim(),
    };
    let table = io::read_table(data)?;
    // A training file (inputs plus target) is accepted too.
    let points = if table.header.len() == dim + 1 {
        io::split_target(&table, io::target_index(&table, target_col)?)?.0
    } else if table.header.len() == dim {
        io::points(&table)?
    } else {
        return Err(CliError::Data(format!(
            "model expects {dim} input columns, {} has {}",
            data.display(),
            table.header.len()
        )));
    };
    let bytes = match &model {
        ModelFile::Real(m) => io::csv_columns(&["prediction"], &[&m.predict(&points)?])?,
        ModelFile::Complex(m) => {
            let p = m.predict(&points)?;
            let (re, im): (Vec<f64>, Vec<f64>) = p.iter().map(|v| (v.re, v.im)).unzip();
            io::csv_columns(&["prediction_re", "prediction_im"], &[&re, &im])?
        }
    };
    match out {
        Some(path) => io::write_atomic(path, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

/// Experiment configuration file: one run or a list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ExperimentFile {
    One(Box<ExperimentConfig>),
    Many(Vec<ExperimentConfig>),
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub struct ExperimentArgs<'a> {
    pub preset: Option<&'a str>,
    pub config: Option<&'a Path>,
    pub sampler: Option<SamplerKind>,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub out: &'a Path,
}

pub fn experiment(args: &ExperimentArgs<'_>) -> CliResult<Vec<ExperimentReport>> {
    let mut configs = match (args.preset, args.config) {
        (Some(name), None) => preset(name, args.sampler)?,
        (None, Some(path)) => match io::read_json::<ExperimentFile>(path)? {
            ExperimentFile::One(c) => vec![*c],
            ExperimentFile::Many(v) => v,
        },
        _ => {
            return Err(CliError::Config(
                "give either a preset name or --config".into(),
            ))
        }
    };
    if args.config.is_some() {
        if let Some(s) = args.sampler {
            for c in &mut configs {
                let domain = srfe::testbed::corpus(c.corpus)?
                    .get(&c.target)?
                    .domain()
                    .clone();
                c.sampler = Some(s.law(&domain));
            }
        }
    }
    if let Some(seed) = args.seed {
        for c in &mut configs {
            c.seeds = vec![seed];
        }
    }
    for c in &configs {
        c.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let reports: Vec<CliResult<ExperimentReport>> = pool.install(|| {
        configs
            .par_iter()
            .map(|c| {
                log::info!("running {}", c.name);
                run_experiment(c).map_err(CliError::from)
            })
            .collect()
    });
    let reports = reports.into_iter().collect::<CliResult<Vec<_>>>()?;

    let mut summary = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::Internal(e.to_string());
    summary
        .write_record([
            "name",
            "median_test_error",
            "q1",
            "q3",
            "median_ols_test_error",
            "failures",
        ])
        .map_err(internal)?;
    for r in &reports {
        let name = slug(&r.config.name);
        io::write_json(&args.out.join(format!("{name}.json")), r)?;
        if let Some(curve) = &r.curve {
            let mut header = vec!["x", "f", "srfe"];
            let mut cols: Vec<&[f64]> = vec![&curve.x, &curve.f, &curve.srfe];
            if let Some(ols) = &curve.ols {
                header.push("ols");
                cols.push(ols);
            }
            io::write_atomic(
                &args.out.join(format!("{name}.csv")),
                &io::csv_columns(&header, &cols)?,
            )?;
        }
        let t = r.summary.test_error;
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        summary
            .write_record([
                r.config.name.clone(),
                fmt(t.map(|s| s.median)),
                fmt(t.map(|s| s.q1)),
                fmt(t.map(|s| s.q3)),
                fmt(r.summary.ols_test_error.map(|s| s.median)),
                r.summary.failures.to_string(),
            ])
            .map_err(internal)?;
        println!(
            "{:<40} median test error {:>12}  failures {}",
            r.config.name,
            t.map_or("n/a".to_string(), |s| format!("{:.4e}", s.median)),
            r.summary.failures
        );
    }
    let bytes = summary
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    io::write_atomic(&args.out.join("summary.csv"), &bytes)?;
    Ok(reports)
}

/// Empirical coherence of a sampled feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceSpec {
    pub sampling: SamplingConfig,
    #[serde(default = "default_activation")]
    pub activation: ActivationKind,
    pub points: Provenance,
    pub m: usize,
}

fn default_activation() -> ActivationKind {
    ActivationKind::ComplexExponential
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub params: TheoryParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseOutput {
    pub bounds: BoundSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceReport>,
}

/// Largest `N²m` for which coherence is computed.
const COHERENCE_BUDGET: f64 = 1e9;

pub fn diagnose(config: &Path, seed: Option<u64>, out: Option<&Path>) -> CliResult<DiagnoseOutput> {
    let cfg: DiagnoseConfig = io::read_json(config)?;
    let bounds = summarize(&cfg.params)?;
    let coherence = match cfg.coherence {
        None => None,
        Some(mut spec) => {
            if let Some(s) = seed {
                spec.sampling.seed = s;
            }
            let weights = draw_weights::<f64>(&spec.sampling)?;
            let n = weights.len() as f64;
            if n * n * spec.m as f64 > COHERENCE_BUDGET {
                return Err(CliError::Config(format!(
                    "coherence of {n} features on {} points is too costly",
                    spec.m
                )));
            }
            let points = sample_points(
                &spec.points,
                spec.sampling.dim,
                spec.m,
                spec.sampling.seed,
                srfe::rng::POINTS,
            )?;
            let report = if spec.activation.is_complex() {
                mutual_coherence(
                    build_feature_matrix::<C64>(&points, &weights, spec.activation)?.matrix(),
                    cfg.params.s,
                )?
            } else {
                mutual_coherence(
                    build_feature_matrix::<f64>(&points, &weights, spec.activation)?.matrix(),
                    cfg.params.s,
                )?
            };
            Some(report)
        }
    };
    let output = DiagnoseOutput { bounds, coherence };
    match out {
        Some(p) => io::write_json(p, &output)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&output).map_err(|e| CliError::Internal(e.to_string()))?
        ),
    }
    Ok(output)
}

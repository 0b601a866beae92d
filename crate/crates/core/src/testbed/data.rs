//! Synthetic datasets: inputs from a stated law, outputs `f(x) + e`.

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::corpus::TargetFunction;
use crate::error::{config_err, shape_err, Result};
use crate::feature_map::{PointSet, Provenance};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    #[default]
    None,
    /// `e_k ~ U[−E, E]` with `E = level`.
    BoundedUniform,
    /// `e_k ~ N(0, ν²)` with `ν = level`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(default)]
    pub level: f64,
    /// Overrides the dataset seed for the noise stream.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn bounded_uniform(bound: f64) -> Self {
        Self {
            kind: NoiseKind::BoundedUniform,
            level: bound,
            seed: None,
        }
    }

    pub fn gaussian(std: f64) -> Self {
        Self {
            kind: NoiseKind::Gaussian,
            level: std,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.level.is_finite() && self.level >= 0.0 {
            Ok(())
        } else {
            Err(config_err(format!(
                "noise level must be non-negative, got {}",
                self.level
            )))
        }
    }

    /// Almost-sure bound `E` on `|e_k|`, if there is one.
    pub fn bound(&self) -> Option<f64> {
        match self.kind {
            NoiseKind::None => Some(0.0),
            _ if self.level == 0.0 => Some(0.0),
            NoiseKind::BoundedUniform => Some(self.level),
            NoiseKind::Gaussian => None,
        }
    }

    fn draw(&self, m: usize, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = rng::stream(self.seed.unwrap_or(seed), rng::NOISE);
        let level = self.level;
        Ok(match self.kind {
            NoiseKind::None => vec![0.0; m],
            _ if level == 0.0 => vec![0.0; m],
            NoiseKind::BoundedUniform => (0..m).map(|_| rng.random_range(-level..=level)).collect(),
            NoiseKind::Gaussian => {
                let n = Normal::new(0.0, level).map_err(|e| config_err(e.to_string()))?;
                (0..m).map(|_| n.sample(&mut rng)).collect()
            }
        })
    }
}

fn draw_box(rng: &mut Rng, lo: &[f64], hi: &[f64], out: &mut Vec<f64>) {
    for (&a, &b) in lo.iter().zip(hi) {
        out.push(if a == b {
            a
        } else {
            Uniform::new(a, b).expect("validated box").sample(rng)
        });
    }
}

/// `m` points in `R^dim` drawn from `law` on the given stream.
pub fn sample_points(
    law: &Provenance,
    dim: usize,
    m: usize,
    seed: u64,
    stream: u64,
) -> Result<PointSet<f64>> {
    law.validate(dim)?;
    let mut rng = rng::stream(seed, stream);
    let mut coords = Vec::with_capacity(m * dim);
    for _ in 0..m {
        match law {
            Provenance::Gaussian { gamma } => {
                for _ in 0..dim {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    coords.push(gamma * z);
                }
            }
            Provenance::Uniform { lo, hi } => draw_box(&mut rng, lo, hi, &mut coords),
            Provenance::Mixture { gamma, lo, hi } => {
                let start = coords.len();
                draw_box(&mut rng, lo, hi, &mut coords);
                for v in &mut coords[start..] {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v += gamma * z;
                }
            }
            Provenance::External => {
                return Err(config_err("cannot sample from an external point set"))
            }
        }
    }
    PointSet::new(dim, coords, law.clone())
}

/// `f` at every point.
pub fn evaluate_target(target: &TargetFunction, points: &PointSet<f64>) -> Result<Vec<f64>> {
    if points.dim() != target.dim() {
        return Err(shape_err(format!(
            "target `{}` has dimension {}, points have {}",
            target.name(),
            target.dim(),
            points.dim()
        )));
    }
    Ok(points.iter().map(|x| target.eval(x)).collect())
}

/// Training data: `m` inputs from `law` and `y_k = f(x_k) + e_k`.
pub fn sample_dataset(
    target: &TargetFunction,
    law: &Provenance,
    m: usize,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<(PointSet<f64>, Vec<f64>)> {
    let points = sample_points(law, target.dim(), m, seed, rng::POINTS)?;
    let clean = evaluate_target(target, &points)?;
    let e = noise.draw(m, seed)?;
    let y = clean.iter().zip(&e).map(|(f, e)| f + e).collect();
    Ok((points, y))
}

/// Held-out inputs and noiseless values.
pub fn sample_test_set(
    target: &TargetFunction,
    law: &Provenance,
    n: usize,
    seed: u64,
) -> Result<(PointSet<f64>, Vec<f64>)> {
    let points = sample_points(law, target.dim(), n, seed, rng::TEST_POINTS)?;
    let values = evaluate_target(target, &points)?;
    Ok((points, values))
}

/// `n` evenly spaced points covering `[lo, hi]`.
pub fn grid_1d(lo: f64, hi: f64, n: usize) -> Result<PointSet<f64>> {
    if n < 2 || !(lo < hi) {
        return Err(config_err("a grid needs n >= 2 and lo < hi"));
    }
    let step = (hi - lo) / (n - 1) as f64;
    let coords = (0..n).map(|k| lo + step * k as f64).collect();
    PointSet::new(1, coords, Provenance::uniform_cube(1, lo, hi))
}

//! Random feature matrices and expansion evaluation.

use num_traits::{Float, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, shape_err, Result, SrfeError};
use crate::linalg::Matrix;
use crate::sampling::WeightSet;
use crate::scalar::{Real, Scalar};

/// Nonlinearity `φ` applied to `⟨x, ω⟩ + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationKind {
    /// `exp(i t)`.
    ComplexExponential,
    Sine,
    Cosine,
    Relu,
}

impl ActivationKind {
    pub fn is_complex(self) -> bool {
        matches!(self, ActivationKind::ComplexExponential)
    }

    /// `φ(t)` in the field `S`; `None` when `S` cannot hold the value.
    #[inline]
    pub fn apply<S: Scalar>(self, t: S::Real) -> Option<S> {
        match self {
            ActivationKind::ComplexExponential => {
                let (s, c) = t.sin_cos();
                S::from_parts(c, s)
            }
            ActivationKind::Sine => Some(S::from_real(t.sin())),
            ActivationKind::Cosine => Some(S::from_real(t.cos())),
            ActivationKind::Relu => Some(S::from_real(t.max(S::Real::zero()))),
        }
    }

    pub(crate) fn check_field<S: Scalar>(self) -> Result<()> {
        if self.is_complex() && S::IS_REAL {
            return Err(config_err(
                "complex-exponential features need a complex scalar type",
            ));
        }
        Ok(())
    }
}

impl std::str::FromStr for ActivationKind {
    type Err = SrfeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex-exponential" | "fourier" => Ok(Self::ComplexExponential),
            "sine" | "sin" => Ok(Self::Sine),
            "cosine" | "cos" => Ok(Self::Cosine),
            "relu" => Ok(Self::Relu),
            _ => Err(SrfeError::Unknown {
                kind: "activation",
                name: s.to_string(),
            }),
        }
    }
}

/// How a point set was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// `N(0, γ² I)`.
    Gaussian {
        gamma: f64,
    },
    /// Uniform on the box `[lo_i, hi_i]`.
    Uniform {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Sum of a `N(0, γ² I)` draw and an independent uniform draw on the box.
    Mixture {
        gamma: f64,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    External,
}

impl Provenance {
    pub fn uniform_cube(dim: usize, lo: f64, hi: f64) -> Self {
        Provenance::Uniform {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let check_box = |lo: &[f64], hi: &[f64]| {
            if lo.len() != dim || hi.len() != dim {
                return Err(shape_err(format!("box bounds must have length {dim}")));
            }
            if lo
                .iter()
                .zip(hi)
                .any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite())
            {
                return Err(config_err("box bounds need lo <= hi"));
            }
            Ok(())
        };
        let check_gamma = |g: f64| {
            if g.is_finite() && g > 0.0 {
                Ok(())
            } else {
                Err(config_err(format!("gamma must be positive, got {g}")))
            }
        };
        match self {
            Provenance::Gaussian { gamma } => check_gamma(*gamma),
            Provenance::Uniform { lo, hi } => check_box(lo, hi),
            Provenance::Mixture { gamma, lo, hi } => {
                check_gamma(*gamma)?;
                check_box(lo, hi)
            }
            Provenance::External => Ok(()),
        }
    }
}

/// `m` points in `R^d`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet<R> {
    dim: usize,
    coords: Vec<R>,
    provenance: Provenance,
}

impl<R: Real> PointSet<R> {
    pub fn new(dim: usize, coords: Vec<R>, provenance: Provenance) -> Result<Self> {
        if dim == 0 {
            return Err(config_err("dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(shape_err(format!(
                "{} coordinates do not split into rows of {dim}",
                coords.len()
            )));
        }
        provenance.validate(dim)?;
        Ok(Self {
            dim,
            coords,
            provenance,
        })
    }

    pub fn from_rows(dim: usize, rows: &[Vec<R>]) -> Result<Self> {
        if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(shape_err(format!(
                "point {k} has length {}, expected {dim}",
                r.len()
            )));
        }
        Self::new(dim, rows.concat(), Provenance::External)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, k: usize) -> &[R] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[R]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[R] {
        &self.coords
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

/// `m × N` matrix with entries `φ(⟨x_k, ω_j⟩ + b_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<S> {
    matrix: Matrix<S>,
    activation: ActivationKind,
}

impl<S: Scalar> FeatureMatrix<S> {
    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<S> {
        self.matrix
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}

fn check_dims<R: Real>(points: &PointSet<R>, weights: &WeightSet<R>) -> Result<()> {
    if points.dim() != weights.dim() {
        return Err(shape_err(format!(
            "points have dimension {}, weights {}",
            points.dim(),
            weights.dim()
        )));
    }
    Ok(())
}

/// Builds the feature matrix. Rows are computed in parallel; each entry
/// depends only on its own point and weight, so the output does not depend on
/// scheduling.
pub fn build_feature_matrix<S: Scalar>(
    points: &PointSet<S::Real>,
    weights: &WeightSet<S::Real>,
    activation: ActivationKind,
) -> Result<FeatureMatrix<S>> {
    check_dims(points, weights)?;
    activation.check_field::<S>()?;
    let n = weights.len();
    let m = points.len();
    let mut data = vec![S::zero(); m * n];
    if n > 0 {
        data.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
            let x = points.point(k);
            for (j, a) in row.iter_mut().enumerate() {
                *a = activation
                    .apply(weights.phase(j, x))
                    .expect("field checked");
            }
        });
    }
    Ok(FeatureMatrix {
        matrix: Matrix::new(m, n, data)?,
        activation,
    })
}

/// `f♯(x) = Σ_j c_j φ(⟨x, ω_j⟩ + b_j)` at every point. Zero coefficients are
/// skipped.
pub fn evaluate_expansion<S: Scalar>(
    weights: &WeightSet<S::Real>,
    activation: ActivationKind,
    coefficients: &[S],
    points: &PointSet<S::Real>,
) -> Result<Vec<S>> {
    check_dims(points, weights)?;
    activation.check_field::<S>()?;
    if coefficients.len() != weights.len() {
        return Err(shape_err(format!(
            "{} coefficients for {} features",
            coefficients.len(),
            weights.len()
        )));
    }
    let active: Vec<(usize, S)> = coefficients
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, c)| *c != S::zero())
        .collect();
    let coords = points.coords();
    let dim = points.dim();
    Ok(coords
        .par_chunks(dim)
        .map(|x| {
            active
                .iter()
                .map(|&(j, c)| {
                    c * activation
                        .apply::<S>(weights.phase(j, x))
                        .expect("field checked")
                })
                .sum()
        })
        .collect())
}

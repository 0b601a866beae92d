//! Named target functions.
//!
//! Each target is stored twice: as a sum `scale · Σ_j g_j(x|S_j)` of
//! low-dimensional terms, and as an independently written closed form. The
//! two are compared in the tests.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result, SrfeError};
use crate::feature_map::Provenance;

pub type Eval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Which `sinc` the corpus uses; the two differ by a rescaling of the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SincConvention {
    /// `sin(πx)/(πx)`.
    #[default]
    Normalized,
    /// `sin(x)/x`.
    Unnormalized,
}

impl SincConvention {
    pub fn eval(self, x: f64) -> f64 {
        let t = match self {
            SincConvention::Normalized => PI * x,
            SincConvention::Unnormalized => x,
        };
        if t.abs() < 1e-8 {
            1.0 - t * t / 6.0
        } else {
            t.sin() / t
        }
    }
}

/// How the term supports relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    /// Pairwise disjoint supports: an order-`q` function in the strict sense.
    Disjoint,
    /// Low-dimensional terms whose supports overlap. Every term still
    /// depends on at most `q` inputs, but the sum is not a disjoint
    /// decomposition.
    Overlapping,
}

#[derive(Clone)]
pub struct Term {
    support: Vec<usize>,
    eval: Eval,
}

impl Term {
    pub fn new(support: Vec<usize>, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            support,
            eval: Arc::new(eval),
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// `g(x|S)`, where `restricted` lists the coordinates in support order.
    pub fn eval_restricted(&self, restricted: &[f64]) -> f64 {
        (self.eval)(restricted)
    }
}

#[derive(Clone)]
pub struct TargetFunction {
    name: String,
    dim: usize,
    order: usize,
    structure: Structure,
    scale: f64,
    terms: Vec<Term>,
    closed_form: Eval,
    domain: Provenance,
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("order", &self.order)
            .field("structure", &self.structure)
            .field("terms", &self.terms.len())
            .finish()
    }
}

impl TargetFunction {
    /// Validates supports against `dim` and `order`; `Disjoint` targets must
    /// have pairwise disjoint supports.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        order: usize,
        structure: Structure,
        scale: f64,
        terms: Vec<Term>,
        closed_form: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        domain: Provenance,
    ) -> Result<Self> {
        let name = name.into();
        if dim == 0 || order == 0 || order > dim {
            return Err(config_err(format!(
                "{name}: need 1 <= order <= dim, got order {order}, dim {dim}"
            )));
        }
        if terms.is_empty() {
            return Err(config_err(format!("{name}: at least one term is required")));
        }
        let mut used = vec![false; dim];
        for t in &terms {
            let s = &t.support;
            if s.is_empty() || s.len() > order {
                return Err(config_err(format!(
                    "{name}: support {s:?} must have 1..={order} entries"
                )));
            }
            if s.windows(2).any(|w| w[0] >= w[1]) || s[s.len() - 1] >= dim {
                return Err(config_err(format!(
                    "{name}: support {s:?} must be increasing and below {dim}"
                )));
            }
            if structure == Structure::Disjoint {
                for &i in s {
                    if used[i] {
                        return Err(config_err(format!(
                            "{name}: coordinate {i} appears in two supports"
                        )));
                    }
                    used[i] = true;
                }
            }
        }
        domain.validate(dim)?;
        Ok(Self {
            name,
            dim,
            order,
            structure,
            scale,
            terms,
            closed_form: Arc::new(closed_form),
            domain,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared order `q₀`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Default input law.
    pub fn domain(&self) -> &Provenance {
        &self.domain
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.closed_form)(x)
    }

    /// `scale · Σ_j g_j(x|S_j)`.
    pub fn eval_terms(&self, x: &[f64]) -> f64 {
        let mut buf = Vec::with_capacity(self.order);
        let mut acc = 0.0;
        for t in &self.terms {
            buf.clear();
            buf.extend(t.support.iter().map(|&i| x[i]));
            acc += t.eval_restricted(&buf);
        }
        self.scale * acc
    }
}

/// Options that change corpus entries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusOptions {
    #[serde(default)]
    pub sinc: SincConvention,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    targets: BTreeMap<String, TargetFunction>,
}

impl Corpus {
    pub fn get(&self, name: &str) -> Result<&TargetFunction> {
        self.targets.get(name).ok_or_else(|| SrfeError::Unknown {
            kind: "target",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.targets.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TargetFunction> {
        self.targets.values()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Dimension used for `sum-squared`.
pub const SUM_SQUARED_DIM: usize = 10;

/// The built-in targets.
pub fn corpus(opts: CorpusOptions) -> Result<Corpus> {
    let cube = |d: usize| Provenance::uniform_cube(d, -1.0, 1.0);
    let sinc = opts.sinc;
    let mut list = Vec::new();

    // Chain of neighbouring pairs; supports overlap in one coordinate.
    let chain_terms = (0..9)
        .map(|l| {
            Term::new(vec![l, l + 1], |v| {
                (-v[0] * v[0]).exp() / (1.0 + v[1] * v[1])
            })
        })
        .collect();
    list.push(TargetFunction::new(
        "order2-chain",
        10,
        2,
        Structure::Overlapping,
        0.1,
        chain_terms,
        |x| {
            (1..10)
                .map(|l| (-x[l - 1].powi(2)).exp() / (1.0 + x[l].powi(2)))
                .sum::<f64>()
                / 10.0
        },
        cube(10),
    )?);

    let d = SUM_SQUARED_DIM;
    let mut sq_terms: Vec<Term> = (0..d)
        .map(|i| Term::new(vec![i], |v| v[0] * v[0]))
        .collect();
    for i in 0..d {
        for j in i + 1..d {
            sq_terms.push(Term::new(vec![i, j], |v| 2.0 * v[0] * v[1]));
        }
    }
    list.push(TargetFunction::new(
        "sum-squared",
        d,
        2,
        Structure::Overlapping,
        1.0,
        sq_terms,
        |x| x.iter().sum::<f64>().powi(2),
        cube(d),
    )?);

    let all5 = vec![0, 1, 2, 3, 4];
    list.push(TargetFunction::new(
        "inverse-sqrt-norm",
        5,
        5,
        Structure::Disjoint,
        1.0,
        vec![Term::new(all5.clone(), |v| {
            1.0 / (1.0 + v.iter().map(|t| t * t).sum::<f64>()).sqrt()
        })],
        |x| (1.0 + x.iter().map(|t| t * t).sum::<f64>()).powf(-0.5),
        cube(5),
    )?);
    list.push(TargetFunction::new(
        "sqrt-norm",
        5,
        5,
        Structure::Disjoint,
        1.0,
        vec![Term::new(all5, |v| {
            (1.0 + v.iter().map(|t| t * t).sum::<f64>()).sqrt()
        })],
        |x| (1.0 + x.iter().map(|t| t * t).sum::<f64>()).powf(0.5),
        cube(5),
    )?);

    list.push(TargetFunction::new(
        "sinc-product",
        5,
        2,
        Structure::Disjoint,
        1.0,
        vec![
            Term::new(vec![0, 2], move |v| {
                sinc.eval(v[0]) * sinc.eval(v[1]).powi(3)
            }),
            Term::new(vec![1], move |v| sinc.eval(v[0])),
        ],
        move |x| {
            sinc.eval(x[0]) * sinc.eval(x[2]) * sinc.eval(x[2]) * sinc.eval(x[2]) + sinc.eval(x[1])
        },
        cube(5),
    )?);

    list.push(TargetFunction::new(
        "ratio",
        5,
        3,
        Structure::Disjoint,
        1.0,
        vec![Term::new(vec![0, 1, 2], |v| {
            v[0] * v[1] / (1.0 + v[2].powi(6))
        })],
        |x| x[0] * x[1] / (1.0 + x[2] * x[2] * x[2] * x[2] * x[2] * x[2]),
        cube(5),
    )?);

    list.push(TargetFunction::new(
        "exp-abs",
        100,
        1,
        Structure::Disjoint,
        1.0,
        (0..100)
            .map(|i| Term::new(vec![i], |v| (-v[0].abs()).exp()))
            .collect(),
        |x| x.iter().map(|t| (-t.abs()).exp()).sum(),
        cube(100),
    )?);

    list.push(TargetFunction::new(
        "ishigami",
        3,
        2,
        Structure::Disjoint,
        1.0,
        vec![
            Term::new(vec![0, 2], |v| v[0].sin() * (1.0 + 0.1 * v[1].powi(4))),
            Term::new(vec![1], |v| 7.0 * v[0].sin().powi(2)),
        ],
        |x| x[0].sin() + 7.0 * x[1].sin() * x[1].sin() + 0.1 * x[2].powi(4) * x[0].sin(),
        Provenance::uniform_cube(3, -PI, PI),
    )?);

    let one_d = |name: &str, f: fn(f64) -> f64, lo: f64, hi: f64| {
        TargetFunction::new(
            name,
            1,
            1,
            Structure::Disjoint,
            1.0,
            vec![Term::new(vec![0], move |v| f(v[0]))],
            move |x| f(x[0]),
            Provenance::uniform_cube(1, lo, hi),
        )
    };
    list.push(one_d("runge", |x| 1.0 / (1.0 + 25.0 * x * x), -1.0, 1.0)?);
    list.push(one_d(
        "sine-packet",
        |x| (-x * x / 0.5).exp() * (8.0 * PI * x).sin(),
        -1.0,
        1.0,
    )?);
    list.push(one_d("triangle", |x| (1.0 - x.abs()).max(0.0), -2.0, 2.0)?);

    // Standard normal bump; its transform is a multiple of the standard
    // normal density, which makes it the fixture for best-fit coefficients.
    list.push(TargetFunction::new(
        "gaussian-bump",
        1,
        1,
        Structure::Disjoint,
        1.0,
        vec![Term::new(vec![0], |v| (-v[0] * v[0] / 2.0).exp())],
        |x| (-0.5 * x[0] * x[0]).exp(),
        Provenance::Gaussian { gamma: 1.0 },
    )?);

    Ok(Corpus {
        targets: list.into_iter().map(|t| (t.name.clone(), t)).collect(),
    })
}

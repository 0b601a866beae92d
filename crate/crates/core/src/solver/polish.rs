//! Support refinement.
//!
//! Given an approximate solution, fixes its support `S` and solves the
//! optimality system restricted to `S` to machine precision:
//!
//! ```text
//! A_Sᴴ (y − A_S c_S) = λ · c_S/|c_S|,    ‖y − A_S c_S‖₂ = R
//! ```
//!
//! by Newton's method in `(c_S, λ)`. For `R = 0` the restricted problem is
//! plain least squares on `S`. Entries that change sign leave the support and
//! off-support correlations that exceed `λ` enter it, for a few rounds. The
//! refined point replaces the input only if its KKT certificate is better.

use super::kkt::verify_kkt;
use super::lstsq::min_norm_lstsq;
use crate::linalg::{lu_solve, Matrix};
use crate::scalar::{dot_c, norm1, Real, Scalar};
use num_traits::{Float, One, Zero};

const MAX_ROUNDS: usize = 8;
const MAX_NEWTON: usize = 60;

pub(super) fn polish<S: Scalar>(a: &Matrix<S>, y: &[S], radius: S::Real, c: Vec<S>) -> Vec<S> {
    let rad = radius.as_f64();
    let score = |c: &[S]| verify_kkt(a, y, c, rad).map_or(f64::INFINITY, |k| k.max_violation);
    let mut best_score = score(&c);
    let mut best = c.clone();
    let mut current = c;

    for _ in 0..MAX_ROUNDS {
        let support: Vec<usize> = (0..current.len())
            .filter(|&j| current[j] != S::zero())
            .collect();
        if support.is_empty() {
            break;
        }
        let a_s = a.select_columns(&support);
        let refined = if radius == S::Real::zero() {
            Some(min_norm_lstsq(&a_s, y).0)
        } else {
            let c_s: Vec<S> = support.iter().map(|&j| current[j]).collect();
            newton(&a_s, y, radius, &c_s)
        };
        let Some(c_s) = refined else { break };

        let mut next = vec![S::zero(); current.len()];
        let mut dropped = false;
        for (&j, &v) in support.iter().zip(&c_s) {
            // A real coefficient that changed sign was on the wrong face.
            if S::IS_REAL && v.re() * current[j].re() < S::Real::zero() {
                dropped = true;
            } else {
                next[j] = v;
            }
        }
        if !dropped {
            let s = score(&next);
            if s < best_score {
                best_score = s;
                best = next.clone();
            }
            if radius == S::Real::zero() || s < 1e-12 {
                break;
            }
            // Bring in the most violating off-support column, if any.
            let ac = a.mul_vec(&next).expect("shape");
            let r: Vec<S> = y.iter().zip(&ac).map(|(&u, &v)| u - v).collect();
            let lambda = dot_c(&r, &ac).re() / norm1(&next);
            let g = a.adjoint_mul_vec(&r).expect("shape");
            let worst = (0..g.len())
                .filter(|&j| next[j] == S::zero())
                .max_by(|&i, &j| g[i].modulus().partial_cmp(&g[j].modulus()).unwrap());
            match worst {
                Some(j) if g[j].modulus() > lambda * S::Real::of(1.0 + 1e-10) => {
                    let scale = next.iter().fold(S::Real::zero(), |m, v| m.max(v.modulus()));
                    next[j] = g[j].unit().scale(scale * S::Real::of(1e-6));
                }
                _ => break,
            }
        }
        current = next;
    }
    best
}

/// Number of real unknowns per coefficient.
fn width<S: Scalar>() -> usize {
    if S::IS_REAL {
        1
    } else {
        2
    }
}

fn parts<S: Scalar>(v: S) -> [S::Real; 2] {
    [v.re(), v.im()]
}

/// Newton iteration for the restricted optimality system. Returns `None` if
/// the iteration fails or the multiplier is not positive.
fn newton<S: Scalar>(a_s: &Matrix<S>, y: &[S], radius: S::Real, c0: &[S]) -> Option<Vec<S>> {
    let k = c0.len();
    let p = width::<S>();
    let nv = p * k + 1;
    let ash = a_s.adjoint();
    let gram = ash.gram_rows();
    let two = S::Real::of(2.0);

    let mut c = c0.to_vec();
    // Real signs stay fixed; sign changes are handled by the caller.
    let signs: Vec<S> = c0.iter().map(|v| v.unit()).collect();
    let unit = |c: &[S], i: usize| if S::IS_REAL { signs[i] } else { c[i].unit() };
    let residual = |c: &[S]| -> (Vec<S>, Vec<S>) {
        let ac = a_s.mul_vec(c).expect("shape");
        let r: Vec<S> = y.iter().zip(&ac).map(|(&u, &v)| u - v).collect();
        let g = ash.mul_vec(&r).expect("shape");
        (r, g)
    };
    let (r0, _) = residual(&c);
    let ac0: Vec<S> = y.iter().zip(&r0).map(|(&u, &v)| u - v).collect();
    let mut lambda = dot_c(&r0, &ac0).re() / norm1(&c);
    if !(lambda > S::Real::zero()) {
        let (_, g) = residual(&c);
        lambda = g.iter().fold(S::Real::zero(), |m, v| m.max(v.modulus()));
    }

    // F = (λu − g, (‖r‖² − R²)/(2R)), flattened to reals.
    let eval = |c: &[S], lambda: S::Real| -> (Vec<S::Real>, Vec<S>) {
        let (r, g) = residual(c);
        let mut f = Vec::with_capacity(nv);
        for (i, &gj) in g.iter().enumerate() {
            let e = parts(unit(c, i).scale(lambda) - gj);
            f.extend_from_slice(&e[..p]);
        }
        let rr: S::Real = r.iter().map(|v| v.norm_sqr()).sum();
        f.push((rr - radius * radius) / (two * radius));
        (f, g)
    };
    let merit = |f: &[S::Real]| f.iter().map(|v| *v * *v).sum::<S::Real>();

    let (mut f, mut g) = eval(&c, lambda);
    for _ in 0..MAX_NEWTON {
        let scale = lambda.max(S::Real::min_positive_value());
        let grad_err = f[..p * k]
            .iter()
            .fold(S::Real::zero(), |m, v| m.max(v.abs()))
            / scale;
        let res_err = f[p * k].abs() / radius;
        let tol = S::Real::epsilon() * S::Real::of(64.0);
        if grad_err <= tol * S::Real::of(k.max(1) as f64).sqrt() && res_err <= tol {
            break;
        }

        let mut jac = vec![S::Real::zero(); nv * nv];
        for i in 0..k {
            for j in 0..k {
                let [re, im] = parts(gram.get(i, j));
                if p == 1 {
                    jac[i * nv + j] = re;
                } else {
                    jac[(2 * i) * nv + 2 * j] = re;
                    jac[(2 * i) * nv + 2 * j + 1] = -im;
                    jac[(2 * i + 1) * nv + 2 * j] = im;
                    jac[(2 * i + 1) * nv + 2 * j + 1] = re;
                }
            }
            let u = parts(unit(&c, i));
            if p == 2 {
                let rho = c[i].modulus();
                if rho == S::Real::zero() {
                    return None;
                }
                let w = lambda / rho;
                for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let delta = if a == b {
                        S::Real::one()
                    } else {
                        S::Real::zero()
                    };
                    jac[(2 * i + a) * nv + 2 * i + b] += w * (delta - u[a] * u[b]);
                }
            }
            for a in 0..p {
                jac[(p * i + a) * nv + nv - 1] = u[a];
                jac[(nv - 1) * nv + p * i + a] = -parts(g[i])[a] / radius;
            }
        }
        let rhs: Vec<S::Real> = f.iter().map(|v| -*v).collect();
        let step = lu_solve(jac, rhs)?;

        let m0 = merit(&f);
        let mut t = S::Real::one();
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<S> = (0..k)
                .map(|i| {
                    let d = if p == 1 {
                        S::from_real(step[i])
                    } else {
                        S::from_parts(step[2 * i], step[2 * i + 1]).expect("complex field")
                    };
                    c[i] + d.scale(t)
                })
                .collect();
            let tl = lambda + t * step[nv - 1];
            if (S::IS_REAL || trial.iter().all(|v| *v != S::zero())) && tl > S::Real::zero() {
                let (tf, tg) = eval(&trial, tl);
                if merit(&tf) < m0 {
                    c = trial;
                    lambda = tl;
                    f = tf;
                    g = tg;
                    accepted = true;
                    break;
                }
            }
            t = t / two;
        }
        if !accepted {
            break;
        }
    }
    if !(lambda > S::Real::zero()) || c.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(c)
}

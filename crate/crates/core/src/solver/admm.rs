//! ADMM in graph form.
//!
//! The problem is written as `minimize ‖c‖₁ + I_B(z)` subject to `z = Ac`,
//! where `B` is the ball of radius `R` around `y`. Each iteration applies the
//! proximal maps separately (soft thresholding and projection onto `B`) and
//! then projects `(c, z)` back onto the graph `{z = Ac}`. The graph projection
//! does not depend on the penalty, so `I + AAᴴ` is factored once and the
//! penalty can be rebalanced freely.

use super::lstsq::min_norm_lstsq;
use super::{RawSolution, SolverConfig};
use crate::error::{Result, SrfeError};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::{norm2, Real, Scalar};
use num_traits::{Float, One};

const RELAXATION: f64 = 1.6;
const BALANCE_EVERY: usize = 10;
const BALANCE_RATIO: f64 = 10.0;

fn soft_threshold<S: Scalar>(v: S, t: S::Real) -> S {
    let r = v.modulus();
    if r <= t {
        S::zero()
    } else {
        v.scale((r - t) / r)
    }
}

fn project_ball<S: Scalar>(z: &mut [S], center: &[S], radius: S::Real) {
    let d: S::Real = z
        .iter()
        .zip(center)
        .map(|(&a, &b)| (a - b).norm_sqr())
        .sum::<S::Real>()
        .sqrt();
    if d > radius {
        let f = radius / d;
        for (zi, &ci) in z.iter_mut().zip(center) {
            *zi = ci + (*zi - ci).scale(f);
        }
    }
}

fn dist_sq<S: Scalar>(a: &[S], b: &[S]) -> S::Real {
    a.iter().zip(b).map(|(&u, &v)| (u - v).norm_sqr()).sum()
}

fn sq<S: Scalar>(a: &[S]) -> S::Real {
    a.iter().map(|v| v.norm_sqr()).sum()
}

pub(super) fn solve<S: Scalar>(
    a: &Matrix<S>,
    y: &[S],
    radius: S::Real,
    config: &SolverConfig,
) -> Result<RawSolution<S>> {
    let (m, n) = (a.rows(), a.cols());

    let (ls, _) = min_norm_lstsq(a, y);
    let ls_res = {
        let al = a.mul_vec(&ls)?;
        norm2(&y.iter().zip(&al).map(|(&u, &v)| u - v).collect::<Vec<S>>())
    };
    let slack = S::Real::of(1e-9) * norm2(y) + S::Real::of(config.abs_tol);
    if ls_res > radius + slack {
        return Err(SrfeError::Infeasible {
            radius: radius.as_f64(),
            min_residual: ls_res.as_f64(),
        });
    }

    let mut ipg = a.gram_rows();
    for i in 0..m {
        ipg.set(i, i, ipg.get(i, i) + S::one());
    }
    let chol = Cholesky::factor(&ipg)?;

    let alpha = S::Real::of(RELAXATION);
    let one = S::Real::one();
    let abs_tol = S::Real::of(config.abs_tol);
    let rel_tol = S::Real::of(config.rel_tol);
    let sqrt_dim = S::Real::of(((m + n) as f64).sqrt());
    let mut rho = S::Real::of(config.penalty);

    let mut x = vec![S::zero(); n];
    let mut z = vec![S::zero(); m];
    let mut xt = vec![S::zero(); n];
    let mut zt = vec![S::zero(); m];
    let mut xh = vec![S::zero(); n];
    let mut zh = vec![S::zero(); m];
    let mut prim = S::Real::infinity();
    let mut dual = S::Real::infinity();
    let mut converged = false;
    let mut iters = 0;

    while iters < config.max_iters {
        iters += 1;
        let thresh = rho.recip();
        for j in 0..n {
            xh[j] = soft_threshold(x[j] - xt[j], thresh);
        }
        for i in 0..m {
            zh[i] = z[i] - zt[i];
        }
        project_ball(&mut zh, y, radius);

        // Over-relaxed inputs to the graph projection.
        let cc: Vec<S> = (0..n)
            .map(|j| xh[j].scale(alpha) + x[j].scale(one - alpha) + xt[j])
            .collect();
        let dd: Vec<S> = (0..m)
            .map(|i| zh[i].scale(alpha) + z[i].scale(one - alpha) + zt[i])
            .collect();
        let ahd = a.adjoint_mul_vec(&dd)?;
        let t: Vec<S> = cc.iter().zip(&ahd).map(|(&u, &v)| u + v).collect();
        let z_new = chol.solve(&a.mul_vec(&t)?);
        let diff: Vec<S> = dd.iter().zip(&z_new).map(|(&u, &v)| u - v).collect();
        let ahdiff = a.adjoint_mul_vec(&diff)?;
        let x_new: Vec<S> = cc.iter().zip(&ahdiff).map(|(&u, &v)| u + v).collect();

        for j in 0..n {
            xt[j] = cc[j] - x_new[j];
        }
        for i in 0..m {
            zt[i] = dd[i] - z_new[i];
        }

        prim = (dist_sq(&xh, &x_new) + dist_sq(&zh, &z_new)).sqrt();
        dual = rho * (dist_sq(&x, &x_new) + dist_sq(&z, &z_new)).sqrt();
        x = x_new;
        z = z_new;

        let scale_p = (sq(&xh) + sq(&zh)).sqrt().max((sq(&x) + sq(&z)).sqrt());
        let scale_d = rho * (sq(&xt) + sq(&zt)).sqrt();
        if prim <= abs_tol * sqrt_dim + rel_tol * scale_p
            && dual <= abs_tol * sqrt_dim + rel_tol * scale_d
        {
            converged = true;
            break;
        }

        if iters % BALANCE_EVERY == 0 {
            let ratio = S::Real::of(BALANCE_RATIO);
            let two = S::Real::of(2.0);
            let factor = if prim > ratio * dual {
                Some(two)
            } else if dual > ratio * prim {
                Some(two.recip())
            } else {
                None
            };
            if let Some(f) = factor {
                rho = rho * f;
                for v in xt.iter_mut().chain(zt.iter_mut()) {
                    *v = v.scale(f.recip());
                }
            }
        }
    }
    if !converged {
        log::warn!(
            "ADMM reached {iters} iterations (primal {:.3e}, dual {:.3e})",
            prim.as_f64(),
            dual.as_f64()
        );
    }
    Ok(RawSolution {
        c: xh,
        iterations: iters,
        primal_residual: prim.as_f64(),
        dual_residual: dual.as_f64(),
        converged,
    })
}

//! Homotopy (LASSO path) solver for real fields.
//!
//! For `λ` decreasing from `‖Aᵀy‖_∞` the minimizer of
//! `½‖Ac − y‖² + λ‖c‖₁` is piecewise linear in `λ`. Along each segment the
//! active coefficients move in the direction `d = (A_SᵀA_S)⁻¹ sign(c_S)`. The
//! segment ends when an inactive correlation reaches `±λ` (add), an active
//! coefficient crosses zero (remove), or the residual norm reaches the target
//! radius (stop). At the stopping point the penalized minimizer is feasible
//! with an active constraint, which makes it the BPDN solution.

use num_traits::{Float, One, Zero};
use rayon::prelude::*;

use super::lstsq::min_norm_lstsq;
use super::{RawSolution, SolverConfig};
use crate::error::{Result, SrfeError};
use crate::linalg::{ColumnQr, Matrix};
use crate::scalar::{dot_c, norm2, Real, Scalar};

/// Steps between exact recomputations of the residual and correlations.
const REFRESH_EVERY: usize = 50;

/// A column joins the active set only if its component orthogonal to the
/// active columns is at least this fraction of its norm.
const DEPENDENCE_TOL: f64 = 1e-8;

/// The path is treated as having reached `λ = 0` once `λ` falls below this
/// fraction of its starting value, or after this many consecutive steps of
/// zero length. Both only happen when the remaining columns are numerically
/// dependent on the active set.
const LAMBDA_FLOOR: f64 = 1e-12;
const MAX_NULL_STEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Add(usize),
    Remove(usize),
    Stop,
    LambdaZero,
}

struct Columns<'a, S> {
    /// `Aᵀ`, so columns of `A` are contiguous rows here.
    at: &'a Matrix<S>,
}

impl<S: Scalar> Columns<'_, S> {
    fn col(&self, j: usize) -> &[S] {
        self.at.row(j)
    }

    /// `Aᵀ v` with each entry reduced sequentially, so results do not depend
    /// on the thread count.
    fn correlate(&self, v: &[S]) -> Vec<S::Real> {
        let m = self.at.cols();
        self.at
            .data()
            .par_chunks(m.max(1))
            .map(|col| dot_c(col, v).re())
            .collect()
    }

    fn combine(&self, idx: &[usize], coef: &[S], m: usize) -> Vec<S> {
        let mut out = vec![S::zero(); m];
        for (&j, &w) in idx.iter().zip(coef) {
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * w;
            }
        }
        out
    }
}

pub(super) fn solve<S: Scalar>(
    a: &Matrix<S>,
    y: &[S],
    radius: S::Real,
    config: &SolverConfig,
) -> Result<RawSolution<S>> {
    let zero = S::Real::zero();
    let one = S::Real::one();
    let (m, n) = (a.rows(), a.cols());
    let at = a.adjoint();
    let cols = Columns { at: &at };
    let col_sq: Vec<S::Real> = (0..n)
        .map(|j| cols.col(j).iter().map(|v| v.norm_sqr()).sum())
        .collect();
    let empty: Vec<bool> = col_sq.iter().map(|&s| s == zero).collect();
    // Columns found to lie in the span of the active set; cleared whenever a
    // column leaves, since the span shrinks.
    let mut excluded = empty.clone();

    let mut c = vec![S::zero(); n];
    let mut r = y.to_vec();
    let mut g = cols.correlate(&r);

    let slack = S::Real::of(1e-9) * norm2(y) + S::Real::of(config.abs_tol);
    // The path ended above the radius. Least squares decides whether the
    // radius is out of reach or the path lost accuracy on the way.
    let infeasible = |r: &[S]| {
        let (ls, _) = min_norm_lstsq(a, y);
        let floor = match a.mul_vec(&ls) {
            Ok(al) => norm2(&y.iter().zip(&al).map(|(&u, &v)| u - v).collect::<Vec<S>>()),
            Err(e) => return e,
        };
        if floor > radius + slack {
            SrfeError::Infeasible {
                radius: radius.as_f64(),
                min_residual: floor.as_f64(),
            }
        } else {
            SrfeError::Numerical(format!(
                "the homotopy path degenerated at residual {:.3e} above the radius {:.3e} \
                 (least squares reaches {:.3e}); the active columns are nearly dependent, \
                 so try a larger eta or the admm method",
                norm2(r).as_f64(),
                radius.as_f64(),
                floor.as_f64()
            ))
        }
    };

    let Some(j0) = (0..n)
        .filter(|&j| !excluded[j])
        .max_by(|&i, &j| g[i].abs().partial_cmp(&g[j].abs()).unwrap().then(j.cmp(&i)))
    else {
        return Err(infeasible(&r));
    };
    let mut lambda = g[j0].abs();
    let lambda_floor = lambda * S::Real::of(LAMBDA_FLOOR);
    let mut null_steps = 0;
    if lambda == zero {
        return Err(infeasible(&r));
    }

    let mut active = vec![j0];
    let mut signs = vec![g[j0].signum()];
    let mut in_active = vec![false; n];
    in_active[j0] = true;
    let dep_tol = S::Real::of(DEPENDENCE_TOL);
    let mut qr = ColumnQr::<S>::new(m);
    qr.append(cols.col(j0), dep_tol)?;

    let slope_guard = S::Real::of(1e-12);
    let mut last_removed: Option<usize> = None;
    let mut last_added: Option<usize> = Some(j0);
    let mut steps = 0;
    let mut converged = false;
    let (mut adds, mut removals, mut exclusions, mut empty_steps) =
        (0usize, 0usize, 0usize, 0usize);

    // Direction `d`, its image `v = A_S d` and `Aᵀv`; kept across steps that
    // leave the active set unchanged.
    let mut dir: Option<(Vec<S>, Vec<S>, Vec<S::Real>)> = None;

    while steps < config.max_iters {
        steps += 1;
        let (d, v, av) = dir.get_or_insert_with(|| {
            let s: Vec<S> = signs.iter().map(|&v| S::from_real(v)).collect();
            let d = qr.solve_normal(&s);
            let v = cols.combine(&active, &d, m);
            let av = cols.correlate(&v);
            (d, v, av)
        });
        let (d, v, av) = (&*d, &*v, &*av);

        let mut gamma = lambda;
        let mut event = Event::LambdaZero;

        let rv = dot_c(&r, v).re();
        let vv: S::Real = v.iter().map(|x| x.norm_sqr()).sum();
        let rr: S::Real = r.iter().map(|x| x.norm_sqr()).sum();
        let disc = rv * rv - vv * (rr - radius * radius);
        if vv > zero && disc >= zero {
            let gs = ((rv - disc.sqrt()) / vv).max(zero);
            if gs < gamma {
                gamma = gs;
                event = Event::Stop;
            }
        }

        for j in 0..n {
            if in_active[j] || excluded[j] {
                continue;
            }
            let (gj, aj) = (g[j], av[j]);
            // A column that just left sits on one boundary; it may still
            // cross to the other one within this step.
            let just_left = Some(j) == last_removed;
            let mut best = S::Real::infinity();
            if aj < one - slope_guard && !(just_left && gj > zero) {
                best = best.min(((lambda - gj) / (one - aj)).max(zero));
            }
            if aj > -one + slope_guard && !(just_left && gj < zero) {
                best = best.min(((lambda + gj) / (one + aj)).max(zero));
            }
            if best < gamma {
                gamma = best;
                event = Event::Add(j);
            }
        }

        for (i, (&j, &di)) in active.iter().zip(d).enumerate() {
            if Some(j) == last_added {
                continue;
            }
            let t = -c[j].re() / di.re();
            if t > zero && t < gamma {
                gamma = t;
                event = Event::Remove(i);
            }
        }

        for (&j, &di) in active.iter().zip(d) {
            c[j] += di.scale(gamma);
        }
        for (ri, &vi) in r.iter_mut().zip(v) {
            *ri -= vi.scale(gamma);
        }
        for (gj, &aj) in g.iter_mut().zip(av) {
            *gj -= gamma * aj;
        }
        lambda -= gamma;
        last_removed = None;
        last_added = None;
        // Excluding a column counts as progress even when the step is empty.
        let mut moved = gamma > zero;
        if event != Event::Stop && lambda <= lambda_floor {
            event = Event::LambdaZero;
        }

        match event {
            Event::Stop => {
                converged = true;
                break;
            }
            Event::LambdaZero => {
                // Least-squares point of the active set. Every correlation is
                // (numerically) zero, so no column can lower the residual.
                if norm2(&r) > radius + slack {
                    return Err(infeasible(&r));
                }
                converged = true;
                break;
            }
            Event::Add(j) => {
                match qr.append(cols.col(j), dep_tol) {
                    Ok(()) => {
                        adds += 1;
                        active.push(j);
                        signs.push(g[j].signum());
                        in_active[j] = true;
                        last_added = Some(j);
                        dir = None;
                    }
                    Err(_) => {
                        // Column lies in the span of the active set.
                        excluded[j] = true;
                        exclusions += 1;
                        moved = true;
                    }
                }
            }
            Event::Remove(i) => {
                removals += 1;
                let j = active.remove(i);
                signs.remove(i);
                qr.remove(i);
                in_active[j] = false;
                c[j] = S::zero();
                last_removed = Some(j);
                excluded.copy_from_slice(&empty);
                dir = None;
            }
        }

        empty_steps += usize::from(gamma == zero);
        null_steps = if moved { 0 } else { null_steps + 1 };
        if null_steps >= MAX_NULL_STEPS {
            if norm2(&r) > radius + slack {
                return Err(infeasible(&r));
            }
            converged = true;
            break;
        }

        if steps % REFRESH_EVERY == 0 {
            let coef: Vec<S> = active.iter().map(|&j| c[j]).collect();
            let ac = cols.combine(&active, &coef, m);
            for ((ri, &yi), &aci) in r.iter_mut().zip(y).zip(&ac) {
                *ri = yi - aci;
            }
            g = cols.correlate(&r);
            dir = None;
        }
    }

    log::debug!(
        "homotopy: {steps} steps, {adds} additions, {removals} removals, {exclusions} exclusions, \
         {empty_steps} empty steps, final support {}",
        active.len()
    );
    if !converged {
        log::warn!("homotopy stopped after {steps} steps without reaching the radius");
    }
    let rn = norm2(&r);
    Ok(RawSolution {
        c,
        iterations: steps,
        primal_residual: (rn - radius).abs().as_f64(),
        dual_residual: 0.0,
        converged,
    })
}

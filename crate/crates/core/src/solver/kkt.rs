//! Optimality certificate for the BPDN problem.
//!
//! For `c ≠ 0` and radius `R > 0`, `c` is optimal iff with `r = y − Ac` and
//! some `λ > 0`:
//!
//! * `‖r‖₂ = R`,
//! * `(Aᴴr)_j = λ·c_j/|c_j|` on the support,
//! * `|(Aᴴr)_j| ≤ λ` off the support.
//!
//! `λ` is recovered as `Re⟨r, Ac⟩ / ‖c‖₁`, which is exact at an optimum.
//! Violations of the gradient conditions are measured relative to `λ`.
//! For `R = 0` the multiplier is a dual vector `v` with `A_Sᴴ v = sign(c_S)`.
//! The certificate uses the minimum-norm such `v` and checks
//! `|a_jᴴ v| ≤ 1` off the support.

use num_traits::{Float, One, Zero};
use serde::{Deserialize, Serialize};

use super::lstsq::min_norm_lstsq;
use crate::error::{shape_err, Result};
use crate::linalg::Matrix;
use crate::scalar::{dot_c, norm1, norm2, Real, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktCertificate {
    pub residual_norm: f64,
    pub radius: f64,
    pub lambda: f64,
    /// `(‖r‖ − R)⁺`.
    pub feasibility: f64,
    pub support_violation: f64,
    pub off_support_violation: f64,
    /// `(R − ‖r‖)⁺ / R` for nonzero `c`.
    pub slackness: f64,
    pub max_violation: f64,
}

impl KktCertificate {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation < tol
    }
}

pub fn verify_kkt<S: Scalar>(
    a: &Matrix<S>,
    y: &[S],
    c: &[S],
    radius: f64,
) -> Result<KktCertificate> {
    if y.len() != a.rows() || c.len() != a.cols() {
        return Err(shape_err(format!(
            "certificate for a {}×{} matrix with |y| = {}, |c| = {}",
            a.rows(),
            a.cols(),
            y.len(),
            c.len()
        )));
    }
    let ac = a.mul_vec(c)?;
    let r: Vec<S> = y.iter().zip(&ac).map(|(&u, &v)| u - v).collect();
    let rn = norm2(&r).as_f64();
    let feasibility = (rn - radius).max(0.0);
    let mut cert = KktCertificate {
        residual_norm: rn,
        radius,
        lambda: 0.0,
        feasibility,
        support_violation: 0.0,
        off_support_violation: 0.0,
        slackness: 0.0,
        max_violation: feasibility,
    };
    let support: Vec<usize> = (0..c.len()).filter(|&j| c[j] != S::zero()).collect();
    if support.is_empty() {
        return Ok(cert);
    }

    let (support_violation, off_support_violation) = if radius > 0.0 {
        let l1 = norm1(c);
        let lambda = dot_c(&r, &ac).re() / l1;
        cert.lambda = lambda.as_f64();
        cert.slackness = ((radius - rn) / radius).max(0.0);
        if !(lambda > S::Real::zero()) {
            (f64::MAX, f64::MAX)
        } else {
            let g = a.adjoint_mul_vec(&r)?;
            let inv = lambda.recip();
            let mut on = S::Real::zero();
            let mut off = S::Real::zero();
            for (&gj, &cj) in g.iter().zip(c) {
                if cj != S::zero() {
                    on = on.max((gj.scale(inv) - cj.unit()).modulus());
                } else {
                    off = off.max(gj.modulus() * inv - S::Real::one());
                }
            }
            (on.as_f64(), off.as_f64())
        }
    } else {
        // A_Sᴴ v = u_S, solved for the minimum-norm v.
        let ash = a.select_columns(&support).adjoint();
        let u: Vec<S> = support.iter().map(|&j| c[j].unit()).collect();
        let (v, _) = min_norm_lstsq(&ash, &u);
        let back = ash.mul_vec(&v)?;
        let on = back
            .iter()
            .zip(&u)
            .map(|(&p, &q)| (p - q).modulus())
            .fold(S::Real::zero(), |x, y| x.max(y));
        let g = a.adjoint_mul_vec(&v)?;
        let off = (0..c.len())
            .filter(|&j| c[j] == S::zero())
            .map(|j| g[j].modulus() - S::Real::one())
            .fold(S::Real::zero(), |x, y| x.max(y));
        (on.as_f64(), off.as_f64())
    };
    cert.support_violation = support_violation;
    cert.off_support_violation = off_support_violation.max(0.0);
    cert.max_violation = [
        cert.feasibility,
        cert.support_violation,
        cert.off_support_violation,
        cert.slackness,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_optimal_inside_ball() {
        let a = Matrix::from_fn(3, 4, |i, j| (i + 2 * j) as f64);
        let cert = verify_kkt(&a, &[0.1, 0.0, -0.1], &[0.0; 4], 1.0).unwrap();
        assert!(cert.passes(1e-12));
    }

    #[test]
    fn identity_solution_certified_and_perturbation_detected() {
        let a = Matrix::<f64>::identity(3);
        let cert = verify_kkt(&a, &[3.0, 0.0, 0.0], &[2.0, 0.0, 0.0], 1.0).unwrap();
        assert!(cert.passes(1e-12), "{cert:?}");
        assert!((cert.lambda - 1.0).abs() < 1e-12);
        let bad = verify_kkt(&a, &[3.0, 0.0, 0.0], &[2.0, 0.1, 0.0], 1.0).unwrap();
        assert!(bad.max_violation > 0.05);
    }

    #[test]
    fn exact_interpolation_certificate() {
        let a = Matrix::<f64>::identity(2);
        let cert = verify_kkt(&a, &[1.0, 0.0], &[1.0, 0.0], 0.0).unwrap();
        assert!(cert.passes(1e-12));
    }
}

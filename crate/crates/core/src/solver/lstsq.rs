//! Minimum-norm least squares through Householder QR with column pivoting.

use crate::linalg::Matrix;
use crate::scalar::{Real, Scalar};
use num_traits::{Float, Zero};

/// Householder QR of a column-major working copy. `Q = H_0 H_1 … H_{k-1}`.
struct Householder<S: Scalar> {
    /// Column-major `R` (upper part) after factorization.
    cols: Vec<Vec<S>>,
    /// Reflector vectors `v_i`, supported on rows `i..`, with `H = I − τ v vᴴ`.
    reflectors: Vec<(Vec<S>, S::Real)>,
    perm: Vec<usize>,
    rank: usize,
}

impl<S: Scalar> Householder<S> {
    fn factor(rows: usize, mut cols: Vec<Vec<S>>, pivot: bool) -> Self {
        let n = cols.len();
        let k = rows.min(n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut norms: Vec<S::Real> = cols
            .iter()
            .map(|c| c.iter().map(|x| x.norm_sqr()).sum())
            .collect();
        let mut reflectors = Vec::with_capacity(k);
        for i in 0..k {
            if pivot {
                // Recompute trailing norms exactly; downdating loses accuracy
                // and the matrices here are small.
                for j in i..n {
                    norms[j] = cols[j][i..].iter().map(|x| x.norm_sqr()).sum();
                }
                let mut best = i;
                for j in i + 1..n {
                    if norms[j] > norms[best] {
                        best = j;
                    }
                }
                cols.swap(i, best);
                norms.swap(i, best);
                perm.swap(i, best);
            }
            let x = &cols[i][i..];
            let alpha = x.iter().map(|v| v.norm_sqr()).sum::<S::Real>().sqrt();
            if alpha == S::Real::zero() {
                reflectors.push((vec![S::zero(); rows - i], S::Real::zero()));
                continue;
            }
            let phase = if x[0] == S::zero() {
                S::one()
            } else {
                x[0].unit()
            };
            let mut v = x.to_vec();
            v[0] += phase.scale(alpha);
            let vnorm: S::Real = v.iter().map(|t| t.norm_sqr()).sum();
            let tau = S::Real::of(2.0) / vnorm;
            for col in cols.iter_mut().skip(i) {
                apply_reflector(&v, tau, &mut col[i..]);
            }
            reflectors.push((v, tau));
        }
        let mut rank = 0;
        if k > 0 {
            let r00 = cols[0][0].modulus();
            let tol = S::Real::of(rows.max(n) as f64) * S::Real::epsilon() * r00;
            rank = (0..k).take_while(|&i| cols[i][i].modulus() > tol).count();
        }
        Self {
            cols,
            reflectors,
            perm,
            rank,
        }
    }

    /// `Qᴴ b`.
    fn apply_qh(&self, b: &mut [S]) {
        for (i, (v, tau)) in self.reflectors.iter().enumerate() {
            apply_reflector(v, *tau, &mut b[i..]);
        }
    }

    /// `Q b`.
    fn apply_q(&self, b: &mut [S]) {
        for (i, (v, tau)) in self.reflectors.iter().enumerate().rev() {
            apply_reflector(v, *tau, &mut b[i..]);
        }
    }

    fn r(&self, i: usize, j: usize) -> S {
        self.cols[j][i]
    }
}

#[inline]
fn apply_reflector<S: Scalar>(v: &[S], tau: S::Real, x: &mut [S]) {
    if tau == S::Real::zero() {
        return;
    }
    let mut w = S::zero();
    for (&vi, &xi) in v.iter().zip(x.iter()) {
        w += vi.conj() * xi;
    }
    let w = w.scale(tau);
    for (xi, &vi) in x.iter_mut().zip(v) {
        *xi -= vi * w;
    }
}

/// Minimum-norm minimizer of `‖Ac − y‖₂` and the numerical rank of `A`.
pub(crate) fn min_norm_lstsq<S: Scalar>(a: &Matrix<S>, y: &[S]) -> (Vec<S>, usize) {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return (vec![S::zero(); n], 0);
    }
    let qr = Householder::factor(m, a.columns(), true);
    let r = qr.rank;
    if r == 0 {
        return (vec![S::zero(); n], 0);
    }
    let mut qty = y.to_vec();
    qr.apply_qh(&mut qty);
    let w = &qty[..r];

    // B = [R11 R12] is r × n with full row rank. With Bᴴ = Q₂R₂ the minimum
    // norm solution of B z = w is z = Q₂ R₂⁻ᴴ w.
    let bh_cols: Vec<Vec<S>> = (0..r)
        .map(|i| {
            (0..n)
                .map(|j| if j >= i { qr.r(i, j).conj() } else { S::zero() })
                .collect()
        })
        .collect();
    let qr2 = Householder::factor(n, bh_cols, false);
    // Solve R₂ᴴ t = w (lower triangular).
    let mut t = vec![S::zero(); n];
    for i in 0..r {
        let mut acc = w[i];
        for k in 0..i {
            acc -= qr2.r(k, i).conj() * t[k];
        }
        t[i] = acc / qr2.r(i, i).conj();
    }
    qr2.apply_q(&mut t);
    let mut c = vec![S::zero(); n];
    for (j, &p) in qr.perm.iter().enumerate() {
        c[p] = t[j];
    }
    (c, r)
}

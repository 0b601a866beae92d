//! Scalar abstractions.
//!
//! [`Real`] covers the floating point types the library computes in (`f32`,
//! `f64`). [`Scalar`] is the coefficient field of a feature matrix: either a
//! real type or `Complex<R>` over one. Everything downstream of feature
//! construction (solvers, diagnostics, evaluation) is written against
//! `Scalar` so the same code serves sine/cosine/ReLU features and complex
//! exponentials.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive, Zero};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type used for inputs, weights and magnitudes.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64`; exact for `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field of feature-matrix entries and expansion coefficients.
pub trait Scalar:
    Copy
    + NumAssign
    + std::ops::Neg<Output = Self>
    + Sum
    + PartialEq
    + Debug
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    type Real: Real;

    /// `true` when the field has no imaginary part.
    const IS_REAL: bool;

    fn from_real(r: Self::Real) -> Self;

    /// `re + i·im`; `None` for real fields when `im != 0`.
    fn from_parts(re: Self::Real, im: Self::Real) -> Option<Self>;

    fn re(self) -> Self::Real;

    fn im(self) -> Self::Real;

    fn conj(self) -> Self;

    /// Modulus.
    fn modulus(self) -> Self::Real;

    /// Squared modulus.
    fn norm_sqr(self) -> Self::Real;

    fn scale(self, r: Self::Real) -> Self;

    fn is_finite(self) -> bool;

    /// `x / |x|`, or zero at the origin. The sign for real fields.
    fn unit(self) -> Self {
        let r = self.modulus();
        if r == Self::Real::zero() {
            Self::zero()
        } else {
            self.scale(r.recip())
        }
    }
}

macro_rules! real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;
            const IS_REAL: bool = true;

            #[inline]
            fn from_real(r: $t) -> Self {
                r
            }

            #[inline]
            fn from_parts(re: $t, im: $t) -> Option<Self> {
                (im == 0.0).then_some(re)
            }

            #[inline]
            fn re(self) -> $t {
                self
            }

            #[inline]
            fn im(self) -> $t {
                0.0
            }

            #[inline]
            fn conj(self) -> Self {
                self
            }

            #[inline]
            fn modulus(self) -> $t {
                self.abs()
            }

            #[inline]
            fn norm_sqr(self) -> $t {
                self * self
            }

            #[inline]
            fn scale(self, r: $t) -> Self {
                self * r
            }

            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
        }
    };
}

macro_rules! complex_scalar {
    ($t:ty) => {
        impl Scalar for Complex<$t> {
            type Real = $t;
            const IS_REAL: bool = false;

            #[inline]
            fn from_real(r: $t) -> Self {
                Complex::new(r, 0.0)
            }

            #[inline]
            fn from_parts(re: $t, im: $t) -> Option<Self> {
                Some(Complex::new(re, im))
            }

            #[inline]
            fn re(self) -> $t {
                self.re
            }

            #[inline]
            fn im(self) -> $t {
                self.im
            }

            #[inline]
            fn conj(self) -> Self {
                Complex::conj(&self)
            }

            #[inline]
            fn modulus(self) -> $t {
                self.norm()
            }

            #[inline]
            fn norm_sqr(self) -> $t {
                Complex::norm_sqr(&self)
            }

            #[inline]
            fn scale(self, r: $t) -> Self {
                Complex::new(self.re * r, self.im * r)
            }

            #[inline]
            fn is_finite(self) -> bool {
                Complex::is_finite(self)
            }
        }
    };
}

real_scalar!(f32);
real_scalar!(f64);
complex_scalar!(f32);
complex_scalar!(f64);

/// Conjugate-linear inner product `⟨a, b⟩ = Σ conj(a_i)·b_i`.
#[inline]
pub fn dot_c<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    // Four running sums in a fixed order: breaks the add latency chain and
    // stays deterministic.
    let mut acc = [S::zero(); 4];
    let (ha, ta) = a.split_at(a.len() - a.len() % 4);
    let (hb, tb) = b.split_at(ha.len());
    for (x, y) in ha.chunks_exact(4).zip(hb.chunks_exact(4)) {
        for k in 0..4 {
            acc[k] += x[k].conj() * y[k];
        }
    }
    for (&x, &y) in ta.iter().zip(tb) {
        acc[0] += x.conj() * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// Euclidean norm.
pub fn norm2<S: Scalar>(v: &[S]) -> S::Real {
    v.iter().map(|x| x.norm_sqr()).sum::<S::Real>().sqrt()
}

pub fn norm1<S: Scalar>(v: &[S]) -> S::Real {
    v.iter().map(|x| x.modulus()).sum()
}

pub fn norm_inf<S: Scalar>(v: &[S]) -> S::Real {
    v.iter()
        .map(|x| x.modulus())
        .fold(S::Real::zero(), |a, b| a.max(b))
}

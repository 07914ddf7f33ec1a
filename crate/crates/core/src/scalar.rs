// SPDX-License-Identifier: Apache-2.0

//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::{Complex, RealField};
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar (f32 or f64).
///
/// Combines the num-traits conversions with nalgebra's `RealField`, so the
/// same type drives both the closed-form pulse algebra and the dense
/// eigen/SVD routines used by the dynamics.
pub trait Real: Copy + FloatConst + FromPrimitive + ToPrimitive + RealField + Send + Sync + 'static {
    /// Converts an f64 literal. Infallible for f32/f64.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real scalar converts to f64")
    }

    /// A tolerance of `reference` for f64, widened to the precision floor of
    /// narrower types (a thousand ulps of one).
    #[inline]
    fn tolerance(reference: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(1e3);
        Self::lit(reference).max(floor)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn from_i64_lossy(n: i64) -> Self {
        Self::from_i64(n).expect("i64 representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{-i theta}`.
#[inline]
pub(crate) fn cis_neg<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), -theta.sin())
}

/// `e^{i theta}`.
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Largest entry modulus of a complex matrix.
pub fn max_modulus<T: Real>(m: &nalgebra::DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(modulus(*z)))
}

#[inline]
pub(crate) fn modulus<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

//! Scalar abstraction shared by the numerical modules.
//!
//! Everything that touches phases, couplings or matrices is generic over
//! [`Real`], which is implemented for `f32` and `f64`. Math goes through the
//! `nalgebra` real-field methods (`sin`, `cos`, `sqrt`, ...) so the symmetric
//! eigensolver can be used on the same type.

use std::fmt::{Debug, Display};

use nalgebra as na;
use num_traits as nt;

/// Floating point scalar usable by the dynamics, stability and oracle code.
pub trait Real:
    Copy
    + na::RealField
    + nt::FromPrimitive
    + nt::ToPrimitive
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64` (used for literals and RNG samples).
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as nt::FromPrimitive>::from_usize(n).expect("count is representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <Self as nt::ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn finite(self) -> bool {
        self.to_f64_lossy().is_finite()
    }

    /// Machine epsilon of the concrete type.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Wraps an angle into `[0, 2π)`.
#[inline]
pub fn wrap_phase<T: Real>(x: T) -> T {
    let two_pi = T::two_pi();
    let mut y = x - two_pi * (x / two_pi).floor();
    // floor can leave y == 2π for tiny negative x
    if y >= two_pi {
        y -= two_pi;
    }
    if y < T::zero() {
        y = T::zero();
    }
    y
}

/// Circular distance between two angles, in `[0, π]`.
#[inline]
pub fn circular_distance<T: Real>(a: T, b: T) -> T {
    let d = wrap_phase(a - b);
    d.min(T::two_pi() - d)
}

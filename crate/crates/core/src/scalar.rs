//! Floating-point abstraction shared by every numeric routine in the crate.
//!
//! All geometry, kernels and solvers are written against [`Real`], which is
//! implemented for `f32` and `f64`. Accuracy targets quoted in the tests apply
//! to `f64`; `f32` is supported for low-precision exploratory runs.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real scalar usable throughout the solver.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in target float")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in target float")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`].
pub type C<T> = Complex<T>;

/// `e^{i x}` for real `x`.
#[inline]
pub fn cis<T: Real>(x: T) -> C<T> {
    C::new(x.cos(), x.sin())
}

/// Imaginary unit.
#[inline]
pub fn im_unit<T: Real>() -> C<T> {
    C::new(T::zero(), T::one())
}

#[inline]
pub fn re<T: Real>(x: T) -> C<T> {
    C::new(x, T::zero())
}

/// Machine epsilon-scaled tolerance helper.
#[inline]
pub fn eps<T: Real>() -> T {
    T::epsilon()
}

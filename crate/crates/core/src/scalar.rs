//! Scalar abstraction: the whole crate is generic over the underlying real
//! float type via `num-traits`. Concrete aliases for `f64` live at the crate
//! root.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive};

/// Real scalar type the library is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Convert an `f64` literal into the working scalar type.
#[inline]
pub fn from_f64<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal not representable in scalar type")
}

/// Complex number over the working scalar type.
pub type C<T> = Complex<T>;

/// Complex zero.
#[inline]
pub fn czero<T: Scalar>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// Complex one.
#[inline]
pub fn cone<T: Scalar>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// The imaginary unit.
#[inline]
pub fn ci<T: Scalar>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// Complex number from real/imaginary `f64` literals.
#[inline]
pub fn c64<T: Scalar>(re: f64, im: f64) -> C<T> {
    Complex::new(from_f64(re), from_f64(im))
}

/// Real literal promoted to a complex number.
#[inline]
pub fn cre<T: Scalar>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

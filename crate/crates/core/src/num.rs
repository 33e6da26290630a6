//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the simulator is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion from a count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `exp(i x)` for real `x`.
#[inline]
pub fn cis<T: Real>(x: T) -> Complex<T> {
    let (s, c) = x.sin_cos();
    Complex::new(c, s)
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}

/// `sinh(z)/z` for complex `z`; the series branch keeps the error below
/// 1e-12 for `|z| < 1e-4`.
pub fn sinhc<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.norm() < T::lit(1e-4) {
        let z2 = z * z;
        real::<T>(T::one()) + z2 / T::lit(6.0) + z2 * z2 / T::lit(120.0)
    } else {
        z.sinh() / z
    }
}

/// `(1 - exp(-z))/z`, finite at `z = 0` where it equals one.
pub fn one_minus_exp_over<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.norm() < T::lit(1e-4) {
        let z2 = z * z;
        real::<T>(T::one()) - z / T::lit(2.0) + z2 / T::lit(6.0) - z2 * z / T::lit(24.0)
    } else {
        (real::<T>(T::one()) - (-z).exp()) / z
    }
}

/// The exponential-integrator weights `phi1(z) = (e^z - 1)/z` and
/// `phi2(z) = (e^z - 1 - z)/z^2`.
pub fn phi12<T: Real>(z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let one = real::<T>(T::one());
    if z.norm() < T::lit(1e-2) {
        // Taylor to z^6; truncation below 1e-16 in this disc.
        let mut p1 = one;
        let mut p2 = one / T::lit(2.0);
        let mut term = one;
        let mut fact1 = T::one();
        let mut fact2 = T::lit(2.0);
        for k in 1..=6 {
            term = term * z;
            fact1 = fact1 * T::of_usize(k + 1);
            fact2 = fact2 * T::of_usize(k + 2);
            p1 = p1 + term / fact1;
            p2 = p2 + term / fact2;
        }
        (p1, p2)
    } else {
        let ez = z.exp();
        ((ez - one) / z, (ez - one - z) / (z * z))
    }
}

/// Principal logarithm that maps a signed-zero imaginary part onto the upper
/// branch, so real negative arguments get `+i pi` (the `+i0` limit).
#[inline]
pub fn log_upper<T: Real>(z: Complex<T>) -> Complex<T> {
    Complex::new(z.re, z.im + T::zero()).ln()
}

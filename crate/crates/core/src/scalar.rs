//! Scalar abstraction shared by every numeric routine.

use nalgebra::{Complex, RealField};
use num_traits::ToPrimitive;

/// Real floating-point scalar usable by the kernels (`f32` or `f64`).
pub trait Real: RealField + Copy + ToPrimitive + Send + Sync {
    /// Converts an `f64` literal into `Self`.
    fn of(x: f64) -> Self;

    /// Lossy conversion to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn of(x: f64) -> Self {
        x
    }
}

impl Real for f32 {
    fn of(x: f64) -> Self {
        x as f32
    }
}

/// Builds a complex number from real and imaginary parts.
pub fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// Lifts a real number to the complex plane.
pub fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Natural log of `n!`.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

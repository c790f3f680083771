//! Scalar abstraction: the estimation pipeline is generic over f32/f64.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating-point sample type. Implemented for `f32` and `f64`; the extra
/// bounds are exactly what `rustfft::FftNum` and the noise synthesis need.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Signed
    + Sum<Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// One standard normal variate from `rng`.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Conversion from an `f64` configuration value.
    fn cast(x: f64) -> Self {
        Self::from_f64(x).expect("configuration value representable")
    }

    /// Widening conversion used for reporting and accumulation.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar widens to f64")
    }
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Normalized sinc, `sin(pi x) / (pi x)`.
pub fn sinc<T: Scalar>(x: T) -> T {
    let px = T::PI() * x;
    if px.abs() < T::cast(1e-6) {
        T::one() - px * px / T::cast(6.0)
    } else {
        px.sin() / px
    }
}

//! Generic real scalar for the numeric core: f32 or f64.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar the library is generic over.
///
/// `rustfft::FftNum` brings `Copy + Send + Sync + 'static` along with the
/// numeric casts; the rest is what the quadrature and fitting code needs.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + rustfft::FftNum + Sum<Self> + Display + LowerExp + Debug
{
    /// Lift an `f64` constant into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    /// `2*pi` in the scalar type.
    fn two_pi() -> Self {
        Self::PI() + Self::PI()
    }
}

impl Real for f32 {}
impl Real for f64 {}

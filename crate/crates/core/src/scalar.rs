//! Scalar abstraction for the numeric core.

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by the neural network, the experience buffer
/// and the reward/return arithmetic. Implemented for `f32` and `f64`; the
/// crate-root aliases pin `f64` as the shipped default.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + std::fmt::Debug + std::fmt::Display + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion from `f64` for constants and config values.
    fn from_real(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant")
    }

    /// Conversion to `f64` for reporting and serialization.
    fn to_real(self) -> f64 {
        self.to_f64().expect("scalar fits f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

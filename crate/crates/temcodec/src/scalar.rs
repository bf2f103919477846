//! Scalar abstraction.
//!
//! Every numeric routine in this crate is generic over a floating-point type
//! implementing [`Real`], so the same code runs in `f32` or `f64`. Concrete
//! type aliases for the common `f64` instantiation live at the crate root.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the crate (`f32` or `f64`).
pub trait Real:
    'static
    + Send
    + Sync
    + Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + serde::Serialize
    + serde::de::DeserializeOwned
{
    /// Lossy view as `f64`, for reports and serialized summaries.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

//! Scalar abstraction used by the trust arithmetic.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the trust engine is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
    /// Converts an `f64` literal. Every finite `f64` maps to some value of the target type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Clamps into the closed unit interval.
    #[inline]
    fn unit_clamp(self) -> Self {
        self.max(Self::zero()).min(Self::one())
    }

    #[inline]
    fn in_unit(self) -> bool {
        self >= Self::zero() && self <= Self::one()
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the numeric core is generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Absolute slack below zero tolerated on a posterior variance before it is
    /// reported as a numerical failure. Results inside the slack clamp to zero.
    fn variance_slack() -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn variance_slack() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    #[inline]
    fn variance_slack() -> Self {
        1e-5
    }
}

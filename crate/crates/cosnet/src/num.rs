//! Scalar abstraction so every numeric path runs in either `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar the library is generic over.
///
/// Implemented for `f32` and `f64`. Tracks, rewards, policies and the
/// optimizer are all parameterized on it; the CLI pins `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant into the scalar domain.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable")
    }

    /// Converts a count into the scalar domain.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }

    /// Lossy view as `f64`, for reporting and serialization.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

//! Floating-point abstraction shared by the numeric core.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point: `f32` or `f64`.
///
/// Physics, search and network code is written against this trait. Everything
/// that touches files or random generators works in `f64` and converts at the
/// boundary with [`Scalar::of`] / [`Scalar::to_f64`].
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Default absolute residual tolerance for the implicit current solve (A).
    const CURRENT_TOL: f64;

    /// Lossy conversion from an `f64` literal or measurement.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 converts to every Scalar")
    }

    #[inline]
    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("Scalar converts to f64")
    }
}

impl Scalar for f64 {
    const CURRENT_TOL: f64 = 1e-9;
}

impl Scalar for f32 {
    // a few ulps of a ~10 A current
    const CURRENT_TOL: f64 = 1e-4;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        assert_eq!(<f64 as Scalar>::of(0.25).to_f64(), 0.25);
        assert_eq!(<f32 as Scalar>::of(0.25).to_f64(), 0.25);
    }
}

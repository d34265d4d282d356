use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the game machinery is generic over (`f32` or `f64`).
///
/// The associated tolerances scale the numerical contracts to the precision of
/// the type: the `f64` values are the ones the library is specified against.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Allowed deviation of a probability vector's sum from one.
    const SIMPLEX_TOL: f64;
    /// Residual target for linear solves and value iteration.
    const SOLVER_TOL: f64;

    /// Converts an `f64` literal. Every finite `f64` is representable (possibly rounded).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    const SIMPLEX_TOL: f64 = 1e-12;
    const SOLVER_TOL: f64 = 1e-10;
}

impl Scalar for f32 {
    const SIMPLEX_TOL: f64 = 1e-5;
    const SOLVER_TOL: f64 = 1e-5;
}

/// Sup-norm of a slice.
pub fn sup_norm<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Sup-norm distance between two equally sized slices.
pub fn sup_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

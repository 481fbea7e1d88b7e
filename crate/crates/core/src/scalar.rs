//! Scalar abstraction: every numerical routine in this crate is generic over
//! the floating point type through [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating point scalar used by the model, solver and simulator.
///
/// Implemented for `f32` and `f64`. The default aliases at the crate root
/// fix `f64`, which is what the CLI and the file formats use.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + Sum + Send + Sync + Debug + Display + 'static
{
    /// Convert an `f64` literal into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    /// Widen to `f64` (used for printing and file output).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Positive part, `max(x, 0)`.
pub fn pos<T: Real>(x: T) -> T {
    x.max(T::zero())
}

/// Negative part, `max(-x, 0)`, so that `x = pos(x) - neg(x)`.
pub fn neg<T: Real>(x: T) -> T {
    (-x).max(T::zero())
}

//! Scalar abstraction shared by the numeric core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the evaluator and searches are generic over.
///
/// Implemented for `f32` and `f64`. Benchmarks, the CLI and the acceptance
/// suite run on `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not
    /// representable at all, which cannot happen for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `|a - b| <= tol * max(1, |a|, |b|)`
pub fn approx_eq<T: Scalar>(a: T, b: T, tol: T) -> bool {
    let scale = T::one().max(a.abs()).max(b.abs());
    (a - b).abs() <= tol * scale
}

/// `new` beats `old` by more than accumulated rounding noise
/// (`1e-12 * max(1, |old|)`). Search loops accept moves only under this test
/// so that a flip and its undo can never both look improving.
#[inline]
pub fn improves<T: Scalar>(new: T, old: T) -> bool {
    new - old > T::lit(1e-12) * T::one().max(old.abs())
}

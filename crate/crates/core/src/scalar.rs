//! Scalar abstraction shared by every module.
//!
//! All geometry and dynamics in this crate is written against [`Real`], which
//! is implemented for `f32` and `f64`. The crate root re-exports `f64`
//! aliases of the main types for callers who do not care about precision.

use std::fmt::{Debug, Display};

use num_traits::FloatConst;
use ode_solvers::dop_shared::FloatNumber;

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: FloatNumber + FloatConst + Debug + Display + Default + Send + Sync {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn of(value: f64) -> Self {
        <Self as num_traits::NumCast>::from(value).expect("f64 literal representable")
    }

    /// Lossy conversion to `f64`, used for error payloads and reports.
    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

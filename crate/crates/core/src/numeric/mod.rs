//! Scalar-generic numerical building blocks: smoothing kernels, composite
//! quadrature rules and boundary weight functions.
//!
//! Everything here is written against [`Real`] so the same code runs in `f32`
//! or `f64`; the statistical pipeline instantiates it with `f64`.

pub mod kernel;
pub mod quadrature;
pub mod weight;

use num_traits::{Float, FromPrimitive};
use std::fmt::{Debug, Display};

pub use kernel::{Kernel, KernelShape};
pub use weight::WeightFunction;

/// Floating point scalar used by the generic numerics.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

//! Relational event networks with time-varying Cox intensities: simulation,
//! network partitions and mixing estimates, localized likelihood estimation
//! and an L2 goodness-of-fit test for a constant parameter.

pub mod bandwidth;
pub mod calibration;
pub mod error;
pub mod estimate;
pub mod goftest;
pub mod io;
pub mod netcore;
pub mod numeric;
pub mod partition;
pub mod simulate;

pub use error::{Error, Result};

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use netcore::{DynamicNetwork, Interval, Pair};
pub use simulate::{CovariateField, EventLog, ParameterPath};

/// Double-precision kernel.
pub type Kernel = numeric::Kernel<f64>;
/// Double-precision weight function.
pub type WeightFunction = numeric::WeightFunction<f64>;
